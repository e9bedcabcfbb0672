#include "citepred/metrics.hpp"

namespace citepred {

double aic(int k, double log_lik) {
  if (k < 1) throw DomainError("aic: k must be at least 1");
  return 2.0 * k - 2.0 * log_lik;
}

double bic(Eigen::Index n_train, int k, double log_lik) {
  if (n_train < 2) throw DomainError("bic: n_train must be at least 2");
  if (k < 1) throw DomainError("bic: k must be at least 1");
  return std::log(static_cast<double>(n_train)) * k - 2.0 * log_lik;
}

namespace {

void check_columns(const std::vector<std::string>& names, const DesignMatrix& dm) {
  if (dm.column_names != names) throw ShapeError("evaluate: matrix columns do not match the model");
}

Evaluation finish(Evaluation ev, const DesignMatrix* test) {
  if (!test || test->rows() == 0) {
    ev.test.reset();
    ev.notice = "test set is empty; test report omitted";
  }
  return ev;
}

template <typename Nll>
EvaluationReport base_report(const char* label, const DesignMatrix& dm, const Eigen::VectorXd& yhat, int k, Nll nll) {
  EvaluationReport r;
  r.split_label = label;
  r.n = dm.rows();
  r.k = k;
  r.nll = nll(dm.y, yhat);
  r.msep = msep(dm.y, yhat);
  r.mae = mae(dm.y, yhat);
  return r;
}

// An exact Gaussian fit has unbounded likelihood; AIC and BIC stay unset.
double gaussian_nll_or_inf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double sigma) {
  if (sigma > 0.0) return gaussian_nll(y, mu, sigma);
  return (y - mu).isZero(0.0) ? -INFINITY : INFINITY;
}

void add_criteria(EvaluationReport& r) {
  if (!std::isfinite(r.nll)) return;
  r.aic = aic(r.k, -r.nll);
  r.bic = bic(r.n, r.k, -r.nll);
}

}  // namespace

Evaluation evaluate(const FittedLinearModel& model, const DesignMatrix& train, const DesignMatrix* test) {
  check_columns(model.column_names, train);
  const int k = static_cast<int>(model.num_coefficients()) + 1;
  const double sigma = model.sigma_mle();
  auto nll = [sigma](const Eigen::VectorXd& y, const Eigen::VectorXd& mu) { return gaussian_nll_or_inf(y, mu, sigma); };
  Evaluation ev;
  ev.train = base_report("train", train, predict_lm(model, train), k, nll);
  add_criteria(ev.train);
  ev.train.r2 = model.r2;
  ev.train.adj_r2 = model.adj_r2;
  if (test && test->rows() > 0) {
    check_columns(model.column_names, *test);
    ev.test = base_report("test", *test, predict_lm(model, *test), k, nll);
  }
  return finish(std::move(ev), test);
}

Evaluation evaluate(const FittedNegBinModel& model, const DesignMatrix& train, const DesignMatrix* test) {
  check_columns(model.column_names, train);
  const int k = static_cast<int>(model.num_coefficients()) + 1;
  const double psi = model.psi;
  auto nll = [psi](const Eigen::VectorXd& y, const Eigen::VectorXd& mu) { return nb_nll(y, mu, psi); };
  Evaluation ev;
  ev.train = base_report("train", train, predict_nb(model, train), k, nll);
  add_criteria(ev.train);
  if (test && test->rows() > 0) {
    check_columns(model.column_names, *test);
    ev.test = base_report("test", *test, predict_nb(model, *test), k, nll);
  }
  return finish(std::move(ev), test);
}

Evaluation evaluate(const BoostingModel& model, const DesignMatrix& train, const DesignMatrix* test) {
  check_columns(model.component_names, train);
  const int coefficients = distinct_selected(model, model.m_stop);
  const int k = coefficients + 1;
  const Eigen::VectorXd train_hat = predict_boost(model, train);
  Evaluation ev;
  if (model.loss.kind == LossKind::squared_error) {
    const double rss = (train.y - train_hat).squaredNorm();
    const double n = static_cast<double>(train.rows());
    const double sigma = std::sqrt(rss / n);
    auto nll = [sigma](const Eigen::VectorXd& y, const Eigen::VectorXd& mu) { return gaussian_nll_or_inf(y, mu, sigma); };
    ev.train = base_report("train", train, train_hat, k, nll);
    const double tss = (train.y.array() - train.y.mean()).square().sum();
    ev.train.r2 = 1.0 - rss / tss;
    ev.train.adj_r2 = 1.0 - (1.0 - *ev.train.r2) * (n - 1.0) / (n - coefficients);
    if (test && test->rows() > 0) {
      check_columns(model.component_names, *test);
      ev.test = base_report("test", *test, predict_boost(model, *test), k, nll);
    }
  } else {
    const double psi = model.psi();
    auto nll = [psi](const Eigen::VectorXd& y, const Eigen::VectorXd& mu) { return nb_nll(y, mu, psi); };
    ev.train = base_report("train", train, train_hat, k, nll);
    if (test && test->rows() > 0) {
      check_columns(model.component_names, *test);
      ev.test = base_report("test", *test, predict_boost(model, *test), k, nll);
    }
  }
  add_criteria(ev.train);
  return finish(std::move(ev), test);
}

}  // namespace citepred
