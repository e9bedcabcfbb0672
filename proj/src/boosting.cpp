#include "citepred/boosting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "citepred/random.hpp"

namespace citepred {

double pointwise_loss(const LossSpec& loss, double y, double eta) {
  if (loss.kind == LossKind::squared_error) {
    const double r = y - eta;
    return 0.5 * r * r;
  }
  return -nb_log_pmf(y, std::exp(eta), loss.psi);
}

BaseLearnerFit fit_base_learner(const Eigen::Ref<const Eigen::VectorXd>& u,
                                const Eigen::Ref<const Eigen::VectorXd>& x_j) {
  if (u.size() != x_j.size()) throw ShapeError("fit_base_learner: length mismatch");
  const double xx = x_j.squaredNorm();
  if (!(xx > 0.0)) throw DomainError("fit_base_learner: column is identically zero");
  BaseLearnerFit fit;
  fit.coefficient = u.dot(x_j) / xx;
  fit.rss = (u - fit.coefficient * x_j).squaredNorm();
  return fit;
}

namespace {

Eigen::MatrixXd standardized(const Eigen::Ref<const Eigen::MatrixXd>& x, const BoostingModel& model) {
  return (x.rowwise() - model.center.transpose()).array().rowwise() / model.scale.transpose().array();
}

void check_loss(const DesignMatrix& dm, const LossSpec& loss) {
  if (loss.kind == LossKind::negbin_nll) {
    if (!(loss.psi > 0.0)) throw ConfigError("boost: psi must be positive");
    for (Eigen::Index i = 0; i < dm.y.size(); ++i) {
      if (!(dm.y(i) >= 0.0) || dm.y(i) != std::floor(dm.y(i))) {
        throw ValidationError("boost: NB loss needs non-negative integer responses");
      }
    }
  }
}

}  // namespace

BoostingModel boost(const DesignMatrix& dm, const LossSpec& loss, const BoostingOptions& options,
                    const DesignMatrix* holdout) {
  if (!(options.sl > 0.0 && options.sl <= 1.0)) throw ConfigError("boost: step length must lie in (0, 1]");
  if (options.m_stop < 1) throw ConfigError("boost: m_stop must be at least 1");
  check_design_matrix(dm);
  check_loss(dm, loss);
  if (holdout && holdout->cols() != dm.cols()) throw ShapeError("boost: holdout column count differs");

  const Eigen::Index n = dm.rows();
  const Eigen::Index p = dm.cols();
  BoostingModel model;
  model.component_names = dm.column_names;
  model.intercept_col = dm.intercept_col;
  model.loss = loss;
  model.sl = options.sl;
  model.m_stop = options.m_stop;
  model.center = Eigen::VectorXd::Zero(p);
  model.scale = Eigen::VectorXd::Ones(p);
  model.active.assign(static_cast<std::size_t>(p), true);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j == dm.intercept_col) continue;
    const auto col = dm.x.col(j);
    if (options.standardize) {
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      if (!(sd > 1e-12 * (1.0 + std::fabs(mean)))) {
        model.active[static_cast<std::size_t>(j)] = false;
      } else {
        model.center(j) = mean;
        model.scale(j) = sd;
      }
    } else if (!(col.squaredNorm() > 0.0)) {
      model.active[static_cast<std::size_t>(j)] = false;
    }
  }

  const Eigen::MatrixXd z = standardized(dm.x, model);
  const Eigen::VectorXd z_norm2 = z.colwise().squaredNorm().transpose();
  Eigen::MatrixXd z_oob;
  Eigen::VectorXd eta_oob;
  if (holdout) {
    z_oob = standardized(holdout->x, model);
    eta_oob = Eigen::VectorXd::Constant(holdout->rows(), model.offset);
  }

  LossSpec current = loss;
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, model.offset);
  const bool profile = loss.kind == LossKind::negbin_nll && loss.psi_policy == PsiPolicy::profile_each_iteration;
  if (profile) current.psi = profile_psi(dm.y, eta.array().exp().matrix(), current.psi);

  auto record_risk = [&](int m) {
    const double risk = empirical_risk(current, dm.y, eta);
    if (!std::isfinite(risk)) {
      throw NumericalError("boost: non-finite training risk at iteration " + std::to_string(m));
    }
    model.train_risk.push_back(risk);
    if (loss.kind == LossKind::negbin_nll) model.psi_path.push_back(current.psi);
    if (holdout) model.oob_risk.push_back(empirical_risk(current, holdout->y, eta_oob));
  };

  model.selections.reserve(static_cast<std::size_t>(options.m_stop));
  model.increments.reserve(static_cast<std::size_t>(options.m_stop));
  model.train_risk.reserve(static_cast<std::size_t>(options.m_stop) + 1);
  record_risk(0);

  for (int m = 1; m <= options.m_stop; ++m) {
    const Eigen::VectorXd u = negative_gradient(current, dm.y, eta);
    const Eigen::VectorXd cross = z.transpose() * u;
    const double uu = u.squaredNorm();
    Eigen::Index best = -1;
    double best_rss = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!model.active[static_cast<std::size_t>(j)]) continue;
      const double rss = uu - cross(j) * cross(j) / z_norm2(j);
      if (best < 0 || rss < best_rss) {
        best = j;
        best_rss = rss;
      }
    }
    if (best < 0) throw ConfigError("boost: no usable base-learner");
    const double increment = options.sl * cross(best) / z_norm2(best);
    eta += increment * z.col(best);
    if (holdout) eta_oob += increment * z_oob.col(best);
    model.selections.push_back(best);
    model.increments.push_back(increment);
    if (profile) current.psi = profile_psi(dm.y, eta.array().exp().matrix(), current.psi);
    record_risk(m);
  }
  model.loss = current;
  model.loss.psi_policy = loss.psi_policy;
  return model;
}

Eigen::VectorXd coefficients_at(const BoostingModel& model, int m) {
  if (m < 0 || m > model.m_stop) {
    throw std::out_of_range("coefficients_at: m = " + std::to_string(m) + " outside [0, " +
                            std::to_string(model.m_stop) + "]");
  }
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.component_names.size()));
  for (int k = 0; k < m; ++k) coef(model.selections[static_cast<std::size_t>(k)]) += model.increments[static_cast<std::size_t>(k)];
  return coef;
}

Eigen::VectorXd original_coefficients_at(const BoostingModel& model, int m) {
  const Eigen::VectorXd c = coefficients_at(model, m);
  Eigen::VectorXd beta = c.cwiseQuotient(model.scale);
  beta(model.intercept_col) = c(model.intercept_col) + model.offset - beta.dot(model.center);
  return beta;
}

Eigen::VectorXd boosted_linear_predictor(const BoostingModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.cols() != static_cast<Eigen::Index>(model.component_names.size())) {
    throw ShapeError("boosted_linear_predictor: column count mismatch");
  }
  return x * original_coefficients_at(model, model.m_stop);
}

Eigen::VectorXd predict_boost(const BoostingModel& model, const DesignMatrix& dm) {
  if (dm.column_names != model.component_names) throw ShapeError("predict_boost: column names or order differ");
  Eigen::VectorXd eta = boosted_linear_predictor(model, dm.x);
  if (model.loss.kind == LossKind::negbin_nll) eta = eta.array().exp().matrix();
  return eta;
}

std::vector<SelectionShare> selection_probabilities(const BoostingModel& model) {
  std::map<Eigen::Index, int> counts;
  for (auto j : model.selections) ++counts[j];
  std::vector<SelectionShare> out;
  for (const auto& [j, c] : counts) {
    out.push_back({j, model.component_names[static_cast<std::size_t>(j)], c,
                   static_cast<double>(c) / static_cast<double>(model.selections.size())});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

int distinct_selected(const BoostingModel& model, int m) {
  if (m < 0 || m > model.m_stop) throw std::out_of_range("distinct_selected: m out of range");
  std::vector<Eigen::Index> seen(model.selections.begin(), model.selections.begin() + m);
  std::sort(seen.begin(), seen.end());
  return static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

CvResult subsample_cv(const DesignMatrix& dm, const LossSpec& loss, const CvOptions& options) {
  if (options.folds < 2) throw ConfigError("subsample_cv: need at least 2 folds");
  if (options.m_max < 1) throw ConfigError("subsample_cv: m_max must be at least 1");
  if (!(options.subsample_fraction > 0.0 && options.subsample_fraction < 1.0)) {
    throw ConfigError("subsample_cv: subsample fraction must lie in (0, 1)");
  }
  check_design_matrix(dm);
  const Eigen::Index n = dm.rows();
  const auto fit_size = static_cast<Eigen::Index>(std::llround(options.subsample_fraction * static_cast<double>(n)));

  const auto folds = static_cast<std::size_t>(options.folds);
  CvResult result;
  result.fold_optima.assign(folds, 0);
  result.oob_curves.assign(folds, {});
  result.fit_sizes.assign(folds, fit_size);

  auto run_fold = [&](std::size_t fold) {
    if (fit_size < 2 || n - fit_size < 1) {
      throw ValidationError("subsample_cv: fold " + std::to_string(fold) + " too small (fit " +
                            std::to_string(fit_size) + ", out-of-bag " + std::to_string(n - fit_size) + " rows)");
    }
    CounterRng rng(options.seed, fold);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
    std::vector<Eigen::Index> fit_rows(perm.begin(), perm.begin() + fit_size);
    std::vector<Eigen::Index> oob_rows(perm.begin() + fit_size, perm.end());
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(oob_rows.begin(), oob_rows.end());
    const DesignMatrix fit_set = take_rows(dm, fit_rows);
    const DesignMatrix oob_set = take_rows(dm, oob_rows);
    BoostingModel model;
    try {
      model = boost(fit_set, loss, {options.sl, options.m_max, options.standardize}, &oob_set);
    } catch (const Error& e) {
      throw NumericalError("subsample_cv: fold " + std::to_string(fold) + ": " + e.what());
    }
    const auto& curve = model.oob_risk;
    const auto best = std::min_element(curve.begin() + 1, curve.end());
    result.fold_optima[fold] = static_cast<int>(best - curve.begin());
    result.oob_curves[fold] = curve;
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(folds));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t fold; (fold = next.fetch_add(1)) < folds;) {
      try {
        run_fold(fold);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  const double mean = std::accumulate(result.fold_optima.begin(), result.fold_optima.end(), 0.0) /
                      static_cast<double>(folds);
  result.m_opt = std::max(1, static_cast<int>(std::lround(mean)));
  return result;
}

}  // namespace citepred
