#pragma once

#include <string>
#include <vector>

#include "citepred/boosting.hpp"
#include "citepred/linmod.hpp"
#include "citepred/metrics.hpp"
#include "citepred/negbin.hpp"

namespace citepred {

/// One line of a coefficient table. Missing inference values are NaN.
struct CoefficientRow {
  std::string term;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
};

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1.
std::string significance_stars(double p);

std::vector<CoefficientRow> coefficient_rows(const FittedLinearModel& model);
/// Coefficients followed by a "psi" row.
std::vector<CoefficientRow> coefficient_rows(const FittedNegBinModel& model);
/// Original-scale boosted coefficients, without inference; NB adds "psi".
std::vector<CoefficientRow> coefficient_rows(const BoostingModel& model);

/// `term,estimate,std_error,t,p,stars`
std::string coefficient_csv(const std::vector<CoefficientRow>& rows);
std::string coefficient_text(const std::vector<CoefficientRow>& rows, const std::string& title,
                             const std::vector<std::string>& footer = {});

/// `metric,train,test` over NLL, R2, Adj R2, AIC, BIC, MSEP, MAE, n, k.
std::string performance_csv(const Evaluation& ev);
std::string performance_text(const Evaluation& ev, const std::string& title);

/// `m,component,coefficient_increment,train_risk`
std::string path_csv(const BoostingModel& model);
/// `component,count,probability`, highest probability first.
std::string selection_csv(const BoostingModel& model);
std::string selection_text(const BoostingModel& model, std::size_t top);
/// `fold,m,oob_risk`
std::string cv_curves_csv(const CvResult& cv);

}  // namespace citepred
