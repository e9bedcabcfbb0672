#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citepred/features.hpp"
#include "citepred/negbin.hpp"

namespace citepred {

enum class LossKind { squared_error, negbin_nll };
enum class PsiPolicy { fixed, profile_each_iteration };

/// Loss ρ(y, η) minimized by boosting. `psi` is the NB dispersion used for
/// the gradient: the fixed value, or the starting value when profiled.
/// squared_error ignores both ψ fields.
struct LossSpec {
  LossKind kind = LossKind::squared_error;
  PsiPolicy psi_policy = PsiPolicy::profile_each_iteration;
  double psi = 1.0;

  static LossSpec squared_error() { return {}; }
  static LossSpec negbin(PsiPolicy policy = PsiPolicy::profile_each_iteration, double psi = 1.0) {
    return {LossKind::negbin_nll, policy, psi};
  }
};

/// ρ(y, η): ½(y − η)² or −log f_NB(y; exp(η), ψ).
double pointwise_loss(const LossSpec& loss, double y, double eta);

/// u_i = −∂ρ(y_i, η)/∂η at η_i.
template <typename DerivedY, typename DerivedEta>
Eigen::VectorXd negative_gradient(const LossSpec& loss, const Eigen::MatrixBase<DerivedY>& y,
                                  const Eigen::MatrixBase<DerivedEta>& eta) {
  if (y.size() != eta.size()) throw ShapeError("negative_gradient: length mismatch");
  if (!eta.allFinite()) throw DomainError("negative_gradient: non-finite linear predictor");
  if (loss.kind == LossKind::squared_error) return (y - eta).eval();
  const double psi = loss.psi;
  Eigen::VectorXd u(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta(i));
    u(i) = y(i) - (y(i) + psi) * mu / (mu + psi);
  }
  return u;
}

/// Mean of pointwise_loss over observations.
template <typename DerivedY, typename DerivedEta>
double empirical_risk(const LossSpec& loss, const Eigen::MatrixBase<DerivedY>& y,
                      const Eigen::MatrixBase<DerivedEta>& eta) {
  if (y.size() != eta.size()) throw ShapeError("empirical_risk: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += pointwise_loss(loss, y(i), eta(i));
  return total / static_cast<double>(y.size());
}

struct BaseLearnerFit {
  double coefficient = 0.0;
  double rss = 0.0;
};

/// Least squares of u on a single column without intercept.
BaseLearnerFit fit_base_learner(const Eigen::Ref<const Eigen::VectorXd>& u,
                                const Eigen::Ref<const Eigen::VectorXd>& x_j);

struct BoostingOptions {
  double sl = 0.1;
  int m_stop = 100;
  /// Center and scale non-intercept columns to unit variance before the RSS
  /// comparison; coefficients are reported back on the original scale.
  bool standardize = true;
};

/// Fitted component-wise boosting path. One base-learner per design column;
/// the intercept column is its own (unscaled) learner.
struct BoostingModel {
  std::vector<std::string> component_names;
  Eigen::Index intercept_col = 0;
  Eigen::VectorXd center;  ///< per column; 0 for the intercept
  Eigen::VectorXd scale;   ///< per column; 1 for the intercept
  std::vector<bool> active;  ///< false for zero-variance columns
  LossSpec loss;
  double sl = 0.1;
  int m_stop = 0;
  double offset = 0.0;
  std::vector<Eigen::Index> selections;  ///< j* per iteration
  std::vector<double> increments;        ///< sl · b_{j*}, base-learner scale
  std::vector<double> train_risk;        ///< mean loss for m = 0..m_stop
  std::vector<double> psi_path;          ///< NB dispersion for m = 0..m_stop
  std::vector<double> oob_risk;          ///< mean held-out loss for m = 0..m_stop, if requested

  double psi() const { return psi_path.empty() ? loss.psi : psi_path.back(); }
};

/// Runs m_stop iterations from the zero offset. When `holdout` is given, its
/// risk is recorded for every m. Throws NumericalError naming the iteration
/// if the training risk becomes non-finite.
BoostingModel boost(const DesignMatrix& dm, const LossSpec& loss, const BoostingOptions& options,
                    const DesignMatrix* holdout = nullptr);

/// Aggregated base-learner-scale coefficients after m iterations (zeros at m = 0).
Eigen::VectorXd coefficients_at(const BoostingModel& model, int m);

/// Coefficients after m iterations on the scale of the design-matrix columns.
Eigen::VectorXd original_coefficients_at(const BoostingModel& model, int m);

/// Linear predictor of the final model for the design-matrix columns in `x`.
Eigen::VectorXd boosted_linear_predictor(const BoostingModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Mean-scale prediction: η for squared error, exp(η) for NB.
Eigen::VectorXd predict_boost(const BoostingModel& model, const DesignMatrix& dm);

struct SelectionShare {
  Eigen::Index component = 0;
  std::string name;
  int count = 0;
  double probability = 0.0;
};

/// count(j) / m_stop for every selected component, sorted by probability
/// descending then by component index.
std::vector<SelectionShare> selection_probabilities(const BoostingModel& model);

/// Distinct components selected in the first m iterations.
int distinct_selected(const BoostingModel& model, int m);

struct CvOptions {
  double sl = 0.1;
  int m_max = 5000;
  int folds = 10;
  double subsample_fraction = 0.5;
  std::uint64_t seed = 0;
  bool standardize = true;
  /// Worker threads for the folds; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

struct CvResult {
  int m_opt = 0;
  std::vector<int> fold_optima;
  std::vector<std::vector<double>> oob_curves;  ///< per fold, m = 0..m_max
  std::vector<Eigen::Index> fit_sizes;
};

/// Subsampling cross-validation of m_stop: each fold boosts on a random
/// subsample and tracks the out-of-bag risk; m_opt is the rounded mean of
/// the per-fold minimizers over m ≥ 1.
CvResult subsample_cv(const DesignMatrix& dm, const LossSpec& loss, const CvOptions& options);

}  // namespace citepred
