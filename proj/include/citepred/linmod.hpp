#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citepred/features.hpp"

namespace citepred {

/// OLS fit of E(y) = Xβ with classical inference.
struct FittedLinearModel {
  Eigen::VectorXd beta;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  double sigma_hat = 0.0;  ///< sqrt(RSS / df_resid)
  double rss = 0.0;
  double tss = 0.0;        ///< centered when an intercept is present
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;     ///< NaN for an intercept-only model
  double f_p_value = 0.0;
  Eigen::Index df_model = 0;
  Eigen::Index df_resid = 0;
  Eigen::Index n = 0;
  std::vector<std::string> column_names;
  std::optional<Eigen::Index> intercept_col;

  Eigen::Index num_coefficients() const { return beta.size(); }
  /// σ̂ with the n divisor, used inside likelihood-based criteria.
  double sigma_mle() const;
};

/// Column-pivoted Householder QR least squares. Throws NumericalError naming
/// the dependent columns when X is rank deficient and ValidationError when n ≤ p.
FittedLinearModel fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                          std::vector<std::string> column_names = {},
                          std::optional<Eigen::Index> intercept_col = Eigen::Index{0});

/// Fits a weighted-SJR design matrix; rejects count responses.
FittedLinearModel fit_ols(const DesignMatrix& dm);

enum class PredictionScale {
  arsinh,  ///< linear predictor, the model's own scale
  raw,     ///< sinh of the linear predictor; biased as a mean estimate under the transform
};

Eigen::VectorXd predict_lm(const FittedLinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x_new,
                           PredictionScale scale = PredictionScale::arsinh);
/// Also checks that column names and order match the fit.
Eigen::VectorXd predict_lm(const FittedLinearModel& model, const DesignMatrix& dm,
                           PredictionScale scale = PredictionScale::arsinh);

/// Reading of a coefficient in an arsinh–arsinh model: roughly β percent per
/// 1% change for large regressor values, β units per unit for small ones.
struct LinearCoefficientReading {
  double percent_effect_large_x = 0.0;
  double unit_effect_small_x = 0.0;
};

LinearCoefficientReading interpret_lm_coefficient(double beta_j);

/// Gaussian negative log-likelihood Σ ½log(2πσ²) + (y − μ)²/(2σ²).
template <typename DerivedY, typename DerivedMu>
double gaussian_nll(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedMu>& mu, double sigma) {
  if (y.size() != mu.size()) throw ShapeError("gaussian_nll: length mismatch");
  if (!(sigma > 0.0)) throw DomainError("gaussian_nll: sigma must be positive");
  const double n = static_cast<double>(y.size());
  constexpr double log_2pi = 1.8378770664093454836;
  return 0.5 * n * (log_2pi + 2.0 * std::log(sigma)) + (y - mu).squaredNorm() / (2.0 * sigma * sigma);
}

}  // namespace citepred
