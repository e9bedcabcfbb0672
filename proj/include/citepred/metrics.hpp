#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "citepred/boosting.hpp"
#include "citepred/features.hpp"
#include "citepred/linmod.hpp"
#include "citepred/negbin.hpp"

namespace citepred {

/// 2k − 2 log L.
double aic(int k, double log_lik);
/// ln(n_train)·k − 2 log L.
double bic(Eigen::Index n_train, int k, double log_lik);

template <typename DerivedY, typename DerivedHat>
double msep(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedHat>& yhat) {
  if (y.size() != yhat.size() || y.size() == 0) throw ShapeError("msep: lengths must match and be non-zero");
  return (y - yhat).squaredNorm() / static_cast<double>(y.size());
}

template <typename DerivedY, typename DerivedHat>
double mae(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedHat>& yhat) {
  if (y.size() != yhat.size() || y.size() == 0) throw ShapeError("mae: lengths must match and be non-zero");
  return (y - yhat).cwiseAbs().sum() / static_cast<double>(y.size());
}

struct EvaluationReport {
  std::string split_label;  ///< "train" or "test"
  Eigen::Index n = 0;
  double nll = 0.0;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> r2;
  std::optional<double> adj_r2;
  double msep = 0.0;
  double mae = 0.0;
  int k = 0;  ///< estimated parameters: coefficients plus σ or ψ
};

struct Evaluation {
  EvaluationReport train;
  std::optional<EvaluationReport> test;
  std::string notice;  ///< set when the test report is omitted
};

/// Gaussian likelihood with σ̂ = sqrt(RSS_train / n_train); metrics on the arsinh scale.
Evaluation evaluate(const FittedLinearModel& model, const DesignMatrix& train, const DesignMatrix* test = nullptr);
/// NB likelihood at ψ̂; MSEP and MAE on the count scale against ν̂.
Evaluation evaluate(const FittedNegBinModel& model, const DesignMatrix& train, const DesignMatrix* test = nullptr);
/// k counts the distinct selected components plus σ or ψ.
Evaluation evaluate(const BoostingModel& model, const DesignMatrix& train, const DesignMatrix* test = nullptr);

}  // namespace citepred
