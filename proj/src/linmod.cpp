#include "citepred/linmod.hpp"

#include <cmath>
#include <limits>

#include "citepred/special.hpp"

namespace citepred {

double FittedLinearModel::sigma_mle() const {
  return std::sqrt(rss / static_cast<double>(n));
}

FittedLinearModel fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                          std::vector<std::string> column_names, std::optional<Eigen::Index> intercept_col) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw ShapeError("fit_ols: response length differs from row count");
  if (n <= p) throw ValidationError("fit_ols: need more observations than coefficients (n = " + std::to_string(n) +
                                    ", p = " + std::to_string(p) + ")");
  if (column_names.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) column_names.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(column_names.size()) != p) throw ShapeError("fit_ols: column name count mismatch");
  if (intercept_col && (*intercept_col < 0 || *intercept_col >= p)) intercept_col.reset();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon());
  const Eigen::Index rank = qr.rank();
  if (rank < p) {
    std::string dependent;
    for (Eigen::Index k = rank; k < p; ++k) {
      if (!dependent.empty()) dependent += ", ";
      dependent += column_names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
    }
    throw NumericalError("fit_ols: design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                         std::to_string(p) + "); linearly dependent columns: " + dependent);
  }

  FittedLinearModel m;
  m.n = n;
  m.column_names = std::move(column_names);
  m.intercept_col = intercept_col;
  m.beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * m.beta;
  m.rss = resid.squaredNorm();
  m.df_resid = n - p;
  m.df_model = intercept_col ? p - 1 : p;
  m.sigma_hat = std::sqrt(m.rss / static_cast<double>(m.df_resid));
  m.tss = intercept_col ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  m.r2 = m.tss > 0.0 ? 1.0 - m.rss / m.tss : 1.0;
  const double denom_tss = intercept_col ? static_cast<double>(n - 1) : static_cast<double>(n);
  m.adj_r2 = 1.0 - (1.0 - m.r2) * denom_tss / static_cast<double>(m.df_resid);

  // (XᵀX)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd diag_perm = r_inv.rowwise().squaredNorm();
  const auto& perm = qr.colsPermutation().indices();
  m.std_errors.resize(p);
  m.t_stats.resize(p);
  m.p_values.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) m.std_errors(perm(k)) = m.sigma_hat * std::sqrt(diag_perm(k));
  const double df = static_cast<double>(m.df_resid);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = m.std_errors(j);
    if (se > 0.0) {
      m.t_stats(j) = m.beta(j) / se;
    } else {
      m.t_stats(j) = m.beta(j) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m.beta(j));
    }
    m.p_values(j) = special::student_t_two_sided_p(m.t_stats(j), df);
  }

  if (m.df_model > 0) {
    const double explained = std::max(m.tss - m.rss, 0.0) / static_cast<double>(m.df_model);
    const double noise = m.rss / df;
    m.f_stat = noise > 0.0 ? explained / noise : std::numeric_limits<double>::infinity();
    m.f_p_value = special::f_upper_p(m.f_stat, static_cast<double>(m.df_model), df);
  } else {
    m.f_stat = std::numeric_limits<double>::quiet_NaN();
    m.f_p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

FittedLinearModel fit_ols(const DesignMatrix& dm) {
  if (dm.response_kind != ResponseKind::weighted_sjr) {
    throw ConfigError("fit_ols: the linear model is fitted to the weighted-SJR response only");
  }
  check_design_matrix(dm);
  return fit_ols(dm.x, dm.y, dm.column_names, dm.intercept_col);
}

Eigen::VectorXd predict_lm(const FittedLinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x_new,
                           PredictionScale scale) {
  if (x_new.cols() != model.beta.size()) {
    throw ShapeError("predict_lm: expected " + std::to_string(model.beta.size()) + " columns, got " +
                     std::to_string(x_new.cols()));
  }
  Eigen::VectorXd eta = x_new * model.beta;
  if (scale == PredictionScale::raw) eta = eta.array().sinh().matrix();
  return eta;
}

Eigen::VectorXd predict_lm(const FittedLinearModel& model, const DesignMatrix& dm, PredictionScale scale) {
  if (dm.column_names != model.column_names) throw ShapeError("predict_lm: column names or order differ from the fit");
  return predict_lm(model, dm.x, scale);
}

LinearCoefficientReading interpret_lm_coefficient(double beta_j) {
  return {beta_j, beta_j};
}

}  // namespace citepred
