#include "citepred/negbin.hpp"

#include <algorithm>
#include <limits>

namespace citepred {

namespace {

// ∂ℓ_i/∂ψ and ∂²ℓ_i/∂ψ² for one observation.
struct PsiTerms {
  double d1 = 0.0;
  double d2 = 0.0;
};

PsiTerms psi_terms(double y, double mu, double psi) {
  const double s = psi + mu;
  PsiTerms t;
  t.d1 = special::digamma_ratio(y, psi) - std::log1p(mu / psi) + (mu - y) / s;
  t.d2 = special::trigamma_ratio(y, psi) + mu / (psi * s) + (y - mu) / (s * s);
  return t;
}

double loglik(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& mu, double psi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += nb_log_pmf(y(i), mu(i), psi);
  return total;
}

// d/dθ and d²/dθ² of the log-likelihood at θ = log ψ with means fixed.
std::pair<double, double> profile_derivatives(const Eigen::Ref<const Eigen::VectorXd>& y,
                                              const Eigen::Ref<const Eigen::VectorXd>& mu, double theta) {
  const double psi = std::exp(theta);
  double d1 = 0.0;
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto t = psi_terms(y(i), mu(i), psi);
    d1 += t.d1;
    d2 += t.d2;
  }
  return {psi * d1, psi * psi * d2 + psi * d1};
}

Eigen::VectorXd means(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  return (x * alpha).array().exp().matrix();
}

bool all_positive_finite(const Eigen::VectorXd& mu) {
  return mu.allFinite() && (mu.array() > 0.0).all();
}

// One Fisher-scoring step: weighted least squares of the working response.
Eigen::VectorXd irls_step(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& mu, double psi, bool poisson) {
  const Eigen::VectorXd eta = x * alpha;
  Eigen::ArrayXd w = mu.array();
  if (!poisson) w /= 1.0 + mu.array() / psi;
  const Eigen::ArrayXd sw = w.sqrt();
  const Eigen::VectorXd z = (eta.array() + (y.array() - mu.array()) / mu.array()).matrix();
  const Eigen::MatrixXd xw = sw.matrix().asDiagonal() * x;
  const Eigen::VectorXd zw = (sw * z.array()).matrix();
  return xw.colPivHouseholderQr().solve(zw);
}

double relative_change(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return ((a - b).array().abs() / (1.0 + b.array().abs())).maxCoeff();
}

}  // namespace

NbDerivatives nb_loglik_derivatives(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const Eigen::Ref<const Eigen::VectorXd>& alpha, double log_psi, bool with_hessian) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n || alpha.size() != p) throw ShapeError("nb_loglik_derivatives: dimension mismatch");
  const double psi = std::exp(log_psi);
  const Eigen::VectorXd mu = means(x, alpha);
  if (!all_positive_finite(mu)) throw NumericalError("nb_loglik_derivatives: non-finite fitted means");

  NbDerivatives d;
  d.gradient = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd score_eta(n);
  Eigen::VectorXd w_eta(n);
  Eigen::VectorXd cross(n);
  double d1_psi = 0.0;
  double d2_psi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = mu(i);
    const double yi = y(i);
    const double s = m + psi;
    d.log_lik += nb_log_pmf(yi, m, psi);
    score_eta(i) = psi * (yi - m) / s;
    w_eta(i) = psi * m * (yi + psi) / (s * s);
    cross(i) = psi * m * (yi - m) / (s * s);
    const auto t = psi_terms(yi, m, psi);
    d1_psi += t.d1;
    d2_psi += t.d2;
  }
  d.gradient.head(p) = x.transpose() * score_eta;
  d.gradient(p) = psi * d1_psi;
  if (with_hessian) {
    d.hessian.resize(p + 1, p + 1);
    d.hessian.topLeftCorner(p, p) = -(x.transpose() * w_eta.asDiagonal() * x);
    const Eigen::VectorXd h_alpha_theta = x.transpose() * cross;
    d.hessian.topRightCorner(p, 1) = h_alpha_theta;
    d.hessian.bottomLeftCorner(1, p) = h_alpha_theta.transpose();
    d.hessian(p, p) = psi * psi * d2_psi + psi * d1_psi;
  }
  return d;
}

Eigen::VectorXd nb_nll_gradient(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXd>& alpha, double log_psi) {
  return -nb_loglik_derivatives(x, y, alpha, log_psi, false).gradient;
}

double profile_psi(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& mu,
                   double psi_start, PsiBounds bounds) {
  if (y.size() != mu.size()) throw ShapeError("profile_psi: length mismatch");
  const double lo_bound = std::log(bounds.min);
  const double hi_bound = std::log(bounds.max);
  double theta = std::clamp(std::log(psi_start), lo_bound, hi_bound);
  auto [g, h] = profile_derivatives(y, mu, theta);
  if (g == 0.0) return std::exp(theta);

  // Expand a bracket [lo, hi] with g(lo) > 0 > g(hi) in unit steps of log ψ.
  double lo = theta;
  double hi = theta;
  if (g > 0.0) {
    for (;;) {
      if (hi >= hi_bound) return bounds.max;
      lo = hi;
      hi = std::min(hi + 1.0, hi_bound);
      if (profile_derivatives(y, mu, hi).first <= 0.0) break;
    }
  } else {
    for (;;) {
      if (lo <= lo_bound) return bounds.min;
      hi = lo;
      lo = std::max(lo - 1.0, lo_bound);
      if (profile_derivatives(y, mu, lo).first >= 0.0) break;
    }
  }

  theta = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    std::tie(g, h) = profile_derivatives(y, mu, theta);
    if (g > 0.0) {
      lo = theta;
    } else if (g < 0.0) {
      hi = theta;
    } else {
      break;
    }
    double next = h < 0.0 ? theta - g / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - theta);
    theta = next;
    if (step < 1e-13 * (1.0 + std::fabs(theta)) || hi - lo < 1e-13) break;
  }
  return std::exp(theta);
}

FittedNegBinModel fit_negbin(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             std::vector<std::string> column_names, const NegBinOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw ShapeError("fit_negbin: response length differs from row count");
  if (n <= p + 1) throw ValidationError("fit_negbin: need n > p + 1 observations");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(y(i) >= 0.0) || y(i) != std::floor(y(i))) {
      throw ValidationError("fit_negbin: response must be non-negative integers (row " + std::to_string(i) + ")");
    }
  }
  if ((y.array() == 0.0).all()) throw NumericalError("fit_negbin: degenerate fit, all responses are zero");
  if (column_names.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) column_names.push_back("x" + std::to_string(j));
  }

  // Start: α from a Poisson IRLS fit whose intercept (if any) is log ȳ.
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if ((x.col(j).array() == 1.0).all()) {
      alpha(j) = std::log(y.mean());
      break;
    }
  }
  Eigen::VectorXd mu = means(x, alpha);
  {
    double ll = loglik(y, mu, options.psi_bounds.max);
    for (int it = 0; it < 25; ++it) {
      const Eigen::VectorXd cand = irls_step(x, y, alpha, mu, 0.0, true);
      const Eigen::VectorXd cand_mu = means(x, cand);
      if (!cand.allFinite() || !all_positive_finite(cand_mu)) break;
      const double cand_ll = loglik(y, cand_mu, options.psi_bounds.max);
      if (!(cand_ll >= ll)) break;
      const double change = relative_change(cand, alpha);
      alpha = cand;
      mu = cand_mu;
      const double gain = cand_ll - ll;
      ll = cand_ll;
      if (change < 1e-8 || gain < 1e-10) break;
    }
  }
  // Method of moments on the Poisson residuals.
  double psi = 1.0;
  {
    const double excess = ((y - mu).array().square() - mu.array()).sum();
    psi = excess > 0.0 ? mu.squaredNorm() / excess : options.psi_bounds.max;
    psi = std::clamp(psi, std::max(options.psi_bounds.min, 1e-4), std::min(options.psi_bounds.max, 1e6));
  }

  FittedNegBinModel m;
  m.n = n;
  m.column_names = std::move(column_names);
  double ll = loglik(y, mu, psi);
  bool converged = false;
  int outer = 0;
  for (outer = 1; outer <= options.max_outer; ++outer) {
    const Eigen::VectorXd alpha_prev = alpha;
    const double theta_prev = std::log(psi);
    const double ll_prev = ll;

    // (a) IRLS in α at fixed ψ, step-halving to keep ℓ non-decreasing.
    for (int inner = 0; inner < options.max_inner; ++inner) {
      const Eigen::VectorXd target = irls_step(x, y, alpha, mu, psi, false);
      Eigen::VectorXd step = target - alpha;
      bool accepted = false;
      for (int halving = 0; halving < 30 && step.allFinite(); ++halving) {
        const Eigen::VectorXd cand = alpha + step;
        const Eigen::VectorXd cand_mu = means(x, cand);
        if (all_positive_finite(cand_mu)) {
          const double cand_ll = loglik(y, cand_mu, psi);
          if (cand_ll >= ll) {
            const double gain = cand_ll - ll;
            const double change = relative_change(cand, alpha);
            alpha = cand;
            mu = cand_mu;
            ll = cand_ll;
            accepted = gain > 1e-12 * (1.0 + std::fabs(ll)) && change > 1e-12;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }

    // (b) profile step in log ψ.
    const double psi_new = profile_psi(y, mu, psi, options.psi_bounds);
    const double ll_psi = loglik(y, mu, psi_new);
    if (ll_psi >= ll) {
      psi = psi_new;
      ll = ll_psi;
    }
    m.log_lik_trace.push_back(ll);

    Eigen::VectorXd now(p + 1), before(p + 1);
    now << alpha, std::log(psi);
    before << alpha_prev, theta_prev;
    if (std::fabs(ll - ll_prev) < options.loglik_tol && relative_change(now, before) < options.param_tol) {
      converged = true;
      break;
    }
  }
  m.iterations = std::min(outer, options.max_outer);

  // Joint Newton polish in (α, log ψ); only ascent steps are taken.
  const bool psi_interior = psi > options.psi_bounds.min * (1 + 1e-9) && psi < options.psi_bounds.max * (1 - 1e-9);
  NbDerivatives d = nb_loglik_derivatives(x, y, alpha, std::log(psi));
  for (int it = 0; it < 5 && psi_interior; ++it) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-d.hessian);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) break;
    Eigen::VectorXd step = ldlt.solve(d.gradient);
    bool moved = false;
    for (int halving = 0; halving < 20; ++halving) {
      const Eigen::VectorXd cand_alpha = alpha + step.head(p);
      const double cand_theta = std::clamp(std::log(psi) + step(p), std::log(options.psi_bounds.min),
                                           std::log(options.psi_bounds.max));
      const Eigen::VectorXd cand_mu = means(x, cand_alpha);
      if (all_positive_finite(cand_mu)) {
        const double cand_ll = loglik(y, cand_mu, std::exp(cand_theta));
        if (cand_ll >= ll) {
          alpha = cand_alpha;
          psi = std::exp(cand_theta);
          mu = cand_mu;
          ll = cand_ll;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    d = nb_loglik_derivatives(x, y, alpha, std::log(psi));
    if (!moved) break;
  }

  const bool at_bound = !(psi > options.psi_bounds.min * (1 + 1e-9) && psi < options.psi_bounds.max * (1 - 1e-9));
  m.alpha = alpha;
  m.psi = psi;
  m.log_lik = ll;
  // At a ψ bound only the α block of the gradient has to vanish.
  m.gradient_norm = at_bound ? d.gradient.head(p).cwiseAbs().maxCoeff() : d.gradient.cwiseAbs().maxCoeff();
  const double grad_limit = options.gradient_tol * std::max<double>(1.0, static_cast<double>(n));
  m.converged = converged && m.gradient_norm <= grad_limit;
  if (!converged) {
    m.diagnostics = "outer iteration limit (" + std::to_string(options.max_outer) + ") reached; last log-likelihood change " +
                    std::to_string(m.log_lik_trace.size() >= 2
                                       ? m.log_lik_trace.back() - m.log_lik_trace[m.log_lik_trace.size() - 2]
                                       : 0.0);
  } else if (!m.converged) {
    m.diagnostics = "gradient norm " + std::to_string(m.gradient_norm) + " above tolerance " + std::to_string(grad_limit);
  }

  // Wald inference from the observed information.
  m.std_errors = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  m.psi_std_error = std::numeric_limits<double>::quiet_NaN();
  const Eigen::Index q = at_bound ? p : p + 1;
  Eigen::LDLT<Eigen::MatrixXd> info(-d.hessian.topLeftCorner(q, q));
  if (info.info() == Eigen::Success && (info.vectorD().array() > 0.0).all()) {
    const Eigen::MatrixXd cov = info.solve(Eigen::MatrixXd::Identity(q, q));
    m.std_errors = cov.diagonal().head(p).cwiseSqrt();
    if (!at_bound) m.psi_std_error = psi * std::sqrt(cov(p, p));
  }
  m.z_stats = m.alpha.cwiseQuotient(m.std_errors);
  m.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) m.p_values(j) = special::normal_two_sided_p(m.z_stats(j));
  m.psi_z = m.psi / m.psi_std_error;
  m.psi_p_value = special::normal_two_sided_p(m.psi_z);
  return m;
}

FittedNegBinModel fit_negbin(const DesignMatrix& dm, const NegBinOptions& options) {
  if (dm.response_kind != ResponseKind::citation_count) {
    throw ConfigError("fit_negbin: negative binomial regression is fitted to citation counts only");
  }
  check_design_matrix(dm);
  return fit_negbin(dm.x, dm.y, dm.column_names, options);
}

Eigen::VectorXd predict_nb(const FittedNegBinModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x_new) {
  if (x_new.cols() != model.alpha.size()) {
    throw ShapeError("predict_nb: expected " + std::to_string(model.alpha.size()) + " columns, got " +
                     std::to_string(x_new.cols()));
  }
  Eigen::VectorXd nu = means(x_new, model.alpha);
  if (!all_positive_finite(nu)) throw NumericalError("predict_nb: fitted mean overflowed");
  return nu;
}

Eigen::VectorXd predict_nb(const FittedNegBinModel& model, const DesignMatrix& dm) {
  if (dm.column_names != model.column_names) throw ShapeError("predict_nb: column names or order differ from the fit");
  return predict_nb(model, dm.x);
}

}  // namespace citepred
