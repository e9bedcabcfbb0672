#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citepred/features.hpp"
#include "citepred/special.hpp"

namespace citepred {

/// log f(y; μ, ψ) for NB2: mean μ, variance μ + μ²/ψ.
inline double nb_log_pmf(double y, double mu, double psi) {
  // ψ log(ψ/(ψ+μ)) = −ψ log1p(μ/ψ) keeps the Poisson limit accurate.
  return special::lgamma_ratio(y, psi) - std::lgamma(y + 1.0) - psi * std::log1p(mu / psi) +
         (y > 0.0 ? y * (std::log(mu) - std::log(psi + mu)) : 0.0);
}

/// −Σ log f(y_i; μ_i, ψ).
template <typename DerivedY, typename DerivedMu>
double nb_nll(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedMu>& mu, double psi) {
  if (y.size() != mu.size()) throw ShapeError("nb_nll: length mismatch");
  if (!(psi > 0.0) || !std::isfinite(psi)) throw DomainError("nb_nll: psi must be positive and finite");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double m = mu(i);
    const double yi = y(i);
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("nb_nll: mu must be positive and finite");
    if (!(yi >= 0.0) || yi != std::floor(yi)) throw DomainError("nb_nll: y must be non-negative integers");
    total -= nb_log_pmf(yi, m, psi);
  }
  return total;
}

/// NB deviance Σ 2[y log(y/μ) − (y + ψ) log((y + ψ)/(μ + ψ))].
template <typename DerivedY, typename DerivedMu>
double nb_deviance(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedMu>& mu, double psi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yi = y(i);
    const double m = mu(i);
    const double term = yi > 0.0 ? yi * std::log(yi / m) : 0.0;
    total += 2.0 * (term - (yi + psi) * std::log((yi + psi) / (m + psi)));
  }
  return total;
}

/// Value, gradient and Hessian of the NB log-likelihood in (α, log ψ).
/// The last gradient entry and the last Hessian row/column belong to log ψ.
struct NbDerivatives {
  double log_lik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

NbDerivatives nb_loglik_derivatives(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const Eigen::Ref<const Eigen::VectorXd>& alpha, double log_psi,
                                    bool with_hessian = true);

/// Gradient of nb_nll(y, exp(Xα), exp(log ψ)) in (α, log ψ).
Eigen::VectorXd nb_nll_gradient(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                                const Eigen::Ref<const Eigen::VectorXd>& alpha, double log_psi);

struct PsiBounds {
  double min = 1e-8;
  double max = 1e8;
};

/// ψ maximizing the NB likelihood for fixed means. Safeguarded Newton in
/// log ψ inside an expanding bracket; returns a bound when the maximum lies
/// beyond it.
double profile_psi(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& mu,
                   double psi_start, PsiBounds bounds = {});

struct NegBinOptions {
  int max_outer = 200;
  int max_inner = 25;
  double loglik_tol = 1e-8;
  double param_tol = 1e-6;
  /// Converged fits must have ‖∇ℓ‖∞ ≤ gradient_tol · max(1, n).
  double gradient_tol = 1e-6;
  PsiBounds psi_bounds{};
};

struct FittedNegBinModel {
  Eigen::VectorXd alpha;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd z_stats;
  Eigen::VectorXd p_values;
  double psi = 1.0;
  double psi_std_error = 0.0;  ///< NaN when ψ sits on a bound
  double psi_z = 0.0;
  double psi_p_value = 1.0;
  double log_lik = 0.0;
  double gradient_norm = 0.0;
  Eigen::Index n = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> log_lik_trace;  ///< after each outer iteration
  std::vector<std::string> column_names;
  std::string diagnostics;

  Eigen::Index num_coefficients() const { return alpha.size(); }
};

/// ML negative binomial regression with log link: alternates IRLS for α at
/// fixed ψ with a profile step in log ψ, then polishes with joint Newton steps.
/// A fit that misses the tolerances is returned with converged = false.
FittedNegBinModel fit_negbin(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             std::vector<std::string> column_names = {}, const NegBinOptions& options = {});

FittedNegBinModel fit_negbin(const DesignMatrix& dm, const NegBinOptions& options = {});

Eigen::VectorXd predict_nb(const FittedNegBinModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x_new);
Eigen::VectorXd predict_nb(const FittedNegBinModel& model, const DesignMatrix& dm);

/// Percent change in the mean per unit increase: 100·(exp(α) − 1).
inline double interpret_nb_coefficient(double alpha_j) { return 100.0 * std::expm1(alpha_j); }

}  // namespace citepred
