#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citepred/boosting.hpp"
#include "citepred/csv.hpp"
#include "citepred/features.hpp"
#include "citepred/linmod.hpp"
#include "citepred/metrics.hpp"
#include "citepred/model_io.hpp"
#include "citepred/negbin.hpp"
#include "citepred/report.hpp"
#include "citepred/simulate.hpp"

namespace fs = std::filesystem;
using namespace citepred;

namespace {

struct RunConfig {
  std::string input;
  std::string output_dir = ".";
  std::string tier = "numeric";
  std::string response = "auto";
  double split_fraction = 0.8;
  std::uint64_t seed = 0;
  std::string family = "lm";
  double sl = 0.1;
  int m_stop = 0;  // 0: choose by subsample CV
  int cv_folds = 10;
  int m_max = 5000;
  double subsample_fraction = 0.5;
  unsigned threads = 0;
  bool raw_predictors = false;
  std::vector<std::string> terms;
  std::string model;
  bool raw_scale = false;
  std::string preset;
  std::string spec;
  long long n = -1;
  std::size_t top = 5;
};

/// Non-converged fits exit with status 1 like other numerical failures.
struct FitFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write(const RunConfig& cfg, const std::string& name, const std::string& content) {
  write_file_atomic(fs::path(cfg.output_dir) / name, content);
}

void prepare_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (!fs::is_directory(cfg.output_dir)) throw ConfigError("cannot create output directory " + cfg.output_dir);
}

std::vector<PaperRecord> load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ConfigError("--input is required");
  if (!fs::is_regular_file(cfg.input)) throw ValidationError("input file not found: " + cfg.input);
  return read_records(fs::path(cfg.input));
}

ResponseKind resolve_response(const RunConfig& cfg, bool count_model) {
  const ResponseKind wanted = count_model ? ResponseKind::citation_count : ResponseKind::weighted_sjr;
  if (cfg.response != "auto" && parse_response_kind(cfg.response) != wanted) {
    throw ConfigError(std::string(count_model ? "NB" : "linear") + " models need --response " +
                      std::string(to_string(wanted)));
  }
  return wanted;
}

struct Matrices {
  EncodingLayout layout;
  DesignMatrix train;
  std::optional<DesignMatrix> test;
};

DesignMatrix restrict(const DesignMatrix& dm, const RunConfig& cfg) {
  std::vector<std::string> terms;
  for (const auto& t : cfg.terms) {
    if (!t.empty()) terms.push_back(t);
  }
  return terms.empty() ? dm : select_columns(dm, terms);
}

Matrices prepare(const RunConfig& cfg, bool count_model) {
  const auto records = load_input(cfg);
  const EncodingConfig config{resolve_response(cfg, count_model), parse_model_tier(cfg.tier), cfg.raw_predictors};
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction <= 1.0)) throw ConfigError("--split-fraction must lie in (0, 1]");
  Matrices m;
  if (cfg.split_fraction == 1.0) {
    m.layout = derive_layout(records, config);
    m.train = restrict(encode(records, m.layout), cfg);
    return m;
  }
  const auto split = split_train_test(records, cfg.split_fraction, cfg.seed);
  m.layout = derive_layout(split.train, config);
  m.train = restrict(encode(split.train, m.layout), cfg);
  if (!split.test.empty()) {
    // Test rows without a usable response drop out during encoding.
    DesignMatrix test = encode(split.test, m.layout);
    if (test.rows() > 0) m.test = restrict(test, cfg);
  }
  return m;
}

std::string fitted_csv(const DesignMatrix& dm, const Eigen::VectorXd& eta, bool count_model) {
  std::ostringstream out;
  out << "pmid,linear_predictor,fitted\n";
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    out << dm.row_ids[static_cast<std::size_t>(i)] << ',' << format_double(eta(i)) << ','
        << format_double(count_model ? std::exp(eta(i)) : eta(i)) << '\n';
  }
  return out.str();
}

SavedModel saved(const std::string& family, const EncodingLayout& layout, const DesignMatrix& dm,
                 const Eigen::VectorXd& coef, double dispersion) {
  SavedModel s;
  s.family = family;
  s.layout = layout;
  s.columns = dm.column_names;
  s.coefficients = coef;
  (s.count_model() ? s.psi : s.sigma) = dispersion;
  return s;
}

void run_fit_lm(const RunConfig& cfg) {
  const auto m = prepare(cfg, false);
  const auto fit = fit_ols(m.train);
  const auto ev = evaluate(fit, m.train, m.test ? &*m.test : nullptr);
  const auto rows = coefficient_rows(fit);
  write(cfg, "coefficients.csv", coefficient_csv(rows));
  char footer[160];
  std::snprintf(footer, sizeof footer, "Residual std. error: %.3f (df = %lld); F = %.3f (p = %.4g)", fit.sigma_hat,
                static_cast<long long>(fit.df_resid), fit.f_stat, fit.f_p_value);
  write(cfg, "coefficients.txt", coefficient_text(rows, "Linear model, response arsinh(SJR)", {footer}));
  write(cfg, "performance.csv", performance_csv(ev));
  write(cfg, "performance.txt", performance_text(ev, "Linear model performance"));
  write(cfg, "model.json", model_to_json(saved("lm", m.layout, m.train, fit.beta, fit.sigma_hat)));
  write(cfg, "train_fitted.csv", fitted_csv(m.train, m.train.x * fit.beta, false));
}

void run_fit_nb(const RunConfig& cfg) {
  const auto m = prepare(cfg, true);
  const auto fit = fit_negbin(m.train);
  if (!fit.converged) throw FitFailure("negative binomial fit did not converge: " + fit.diagnostics);
  const auto ev = evaluate(fit, m.train, m.test ? &*m.test : nullptr);
  const auto rows = coefficient_rows(fit);
  write(cfg, "coefficients.csv", coefficient_csv(rows));
  char footer[160];
  std::snprintf(footer, sizeof footer, "Log likelihood: %.3f; %d iterations", fit.log_lik, fit.iterations);
  write(cfg, "coefficients.txt", coefficient_text(rows, "Negative binomial model, response citations", {footer}));
  write(cfg, "performance.csv", performance_csv(ev));
  write(cfg, "performance.txt", performance_text(ev, "Negative binomial model performance"));
  write(cfg, "model.json", model_to_json(saved("nb", m.layout, m.train, fit.alpha, fit.psi)));
  write(cfg, "train_fitted.csv", fitted_csv(m.train, m.train.x * fit.alpha, true));
}

bool count_family(const RunConfig& cfg) {
  if (cfg.family == "lm") return false;
  if (cfg.family == "nb") return true;
  throw ConfigError("--family must be lm or nb");
}

LossSpec loss_for(bool count_model) { return count_model ? LossSpec::negbin() : LossSpec::squared_error(); }

CvOptions cv_options(const RunConfig& cfg) {
  CvOptions opt;
  opt.sl = cfg.sl;
  opt.m_max = cfg.m_max;
  opt.folds = cfg.cv_folds;
  opt.subsample_fraction = cfg.subsample_fraction;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  return opt;
}

void write_cv(const RunConfig& cfg, const CvResult& cv) {
  write(cfg, "cv_curves.csv", cv_curves_csv(cv));
  std::ostringstream out;
  out << "fold,optimum\n";
  for (std::size_t f = 0; f < cv.fold_optima.size(); ++f) out << f << ',' << cv.fold_optima[f] << '\n';
  write(cfg, "fold_optima.csv", out.str());
  write(cfg, "m_opt.txt", std::to_string(cv.m_opt) + "\n");
}

void run_cv(const RunConfig& cfg) {
  const bool count_model = count_family(cfg);
  const auto m = prepare(cfg, count_model);
  const auto cv = subsample_cv(m.train, loss_for(count_model), cv_options(cfg));
  write_cv(cfg, cv);
  std::cout << "m_opt = " << cv.m_opt << '\n';
}

void run_boost(const RunConfig& cfg) {
  const bool count_model = count_family(cfg);
  const auto m = prepare(cfg, count_model);
  const LossSpec loss = loss_for(count_model);
  int m_stop = cfg.m_stop;
  if (m_stop == 0) {
    const auto cv = subsample_cv(m.train, loss, cv_options(cfg));
    write_cv(cfg, cv);
    m_stop = cv.m_opt;
  }
  const auto model = boost(m.train, loss, {cfg.sl, m_stop, true}, m.test ? &*m.test : nullptr);
  const auto ev = evaluate(model, m.train, m.test ? &*m.test : nullptr);
  const auto rows = coefficient_rows(model);
  const std::string label = count_model ? "Boosted negative binomial model" : "Boosted linear model";
  write(cfg, "path.csv", path_csv(model));
  write(cfg, "selection.csv", selection_csv(model));
  write(cfg, "selection.txt", selection_text(model, cfg.top));
  write(cfg, "coefficients.csv", coefficient_csv(rows));
  write(cfg, "coefficients.txt", coefficient_text(rows, label + ", m_stop = " + std::to_string(m_stop)));
  write(cfg, "performance.csv", performance_csv(ev));
  write(cfg, "performance.txt", performance_text(ev, label + " performance"));
  const Eigen::VectorXd beta = original_coefficients_at(model, m_stop);
  double dispersion = model.psi();
  if (!count_model) {
    const double df = static_cast<double>(m.train.rows() - distinct_selected(model, m_stop));
    dispersion = std::sqrt((m.train.y - m.train.x * beta).squaredNorm() / std::max(1.0, df));
  }
  write(cfg, "model.json",
        model_to_json(saved(count_model ? "boost-nb" : "boost-lm", m.layout, m.train, beta, dispersion)));
  write(cfg, "train_fitted.csv", fitted_csv(m.train, m.train.x * beta, count_model));
}

void run_predict(const RunConfig& cfg) {
  if (cfg.model.empty()) throw ConfigError("--model is required");
  const auto model = load_model(cfg.model);
  const auto records = load_input(cfg);
  const auto pred = predict_saved(model, records, cfg.raw_scale);
  std::ostringstream out;
  out << "pmid,linear_predictor,prediction\n";
  for (std::size_t i = 0; i < pred.ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << pred.ids[i] << ',' << format_double(pred.linear_predictor(row)) << ','
        << format_double(pred.prediction(row)) << '\n';
  }
  write(cfg, "predictions.csv", out.str());
}

void run_simulate(const RunConfig& cfg) {
  if (cfg.preset.empty() == cfg.spec.empty()) throw ConfigError("give exactly one of --preset or --spec");
  GeneratorSpec spec = cfg.preset.empty() ? read_generator_spec(cfg.spec) : preset_spec(cfg.preset);
  if (cfg.n >= 0) spec.n = static_cast<std::size_t>(cfg.n);
  spec.seed = cfg.seed;
  const auto data = generate(spec);
  std::ostringstream out;
  write_records(out, data.records);
  write(cfg, "records.csv", out.str());
}

void run_split(const RunConfig& cfg) {
  const auto records = load_input(cfg);
  const auto split = split_train_test(records, cfg.split_fraction, cfg.seed);
  std::ostringstream train, test;
  write_records(train, split.train);
  write_records(test, split.test);
  write(cfg, "train.csv", train.str());
  write(cfg, "test.csv", test.str());
}

void add_io(CLI::App* sub, RunConfig& cfg, bool needs_input = true) {
  if (needs_input) sub->add_option("--input", cfg.input, "Record CSV")->required();
  sub->add_option("--output-dir", cfg.output_dir, "Directory for reports")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
}

void add_encoding(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--tier", cfg.tier, "Covariate set")
      ->check(CLI::IsMember({"complete", "icite", "numeric"}))
      ->capture_default_str();
  sub->add_option("--response", cfg.response, "sjr or citations; auto follows the model family")
      ->check(CLI::IsMember({"auto", "sjr", "citations"}))
      ->capture_default_str();
  sub->add_option("--split-fraction", cfg.split_fraction, "Per-year train share; 1 disables the test set")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_flag("--raw-predictors", cfg.raw_predictors, "Skip arsinh on count covariates");
  sub->add_option("--terms", cfg.terms, "Keep only these columns (the intercept is always kept)")->delimiter(',');
}

void add_boosting(CLI::App* sub, RunConfig& cfg, bool with_m_stop) {
  sub->add_option("--family", cfg.family, "lm or nb")->check(CLI::IsMember({"lm", "nb"}))->capture_default_str();
  sub->add_option("--sl", cfg.sl, "Step length")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  if (with_m_stop) {
    sub->add_option("--m-stop", cfg.m_stop, "Fixed number of iterations; 0 chooses by subsample CV")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--top", cfg.top, "Variables listed in selection.txt")->capture_default_str();
  }
  sub->add_option("--cv-folds", cfg.cv_folds, "Subsampling folds")->check(CLI::Range(2, 1000))->capture_default_str();
  sub->add_option("--m-max", cfg.m_max, "Largest m on the CV grid")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--subsample-fraction", cfg.subsample_fraction, "Fit share of each fold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--threads", cfg.threads, "Worker threads for CV (0 = all cores)")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Citation and weighted-citation regression toolkit"};
  app.set_config("--config", "", "Rerun from a manifest.txt written by an earlier run");
  app.require_subcommand(1);
  RunConfig cfg;

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic record CSV");
  simulate->add_option("--preset", cfg.preset, "lmc, lmi, lmr, glmc, glmi or glmr");
  simulate->add_option("--spec", cfg.spec, "Generator spec file");
  simulate->add_option("--n", cfg.n, "Rows (overrides the spec)");
  add_io(simulate, cfg, false);

  auto* split = app.add_subcommand("split", "Per-year train/test split of a record CSV");
  add_io(split, cfg);
  split->add_option("--split-fraction", cfg.split_fraction, "Per-year train share")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* fit_lm = app.add_subcommand("fit-lm", "Linear model for arsinh(SJR)");
  add_io(fit_lm, cfg);
  add_encoding(fit_lm, cfg);

  auto* fit_nb = app.add_subcommand("fit-nb", "Negative binomial model for citation counts");
  add_io(fit_nb, cfg);
  add_encoding(fit_nb, cfg);

  auto* boost_cmd = app.add_subcommand("boost", "Component-wise gradient boosting");
  add_io(boost_cmd, cfg);
  add_encoding(boost_cmd, cfg);
  add_boosting(boost_cmd, cfg, true);

  auto* cv = app.add_subcommand("cv", "Subsample cross-validation of the stopping iteration");
  add_io(cv, cfg);
  add_encoding(cv, cfg);
  add_boosting(cv, cfg, false);

  auto* predict = app.add_subcommand("predict", "Predict records with a saved model");
  add_io(predict, cfg);
  predict->add_option("--model", cfg.model, "model.json from a fit")->required();
  predict->add_flag("--raw-scale", cfg.raw_scale, "sinh-transform linear-model predictions");

  for (auto* sub : app.get_subcommands({})) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    prepare_output_dir(cfg);
    if (chosen == simulate) run_simulate(cfg);
    if (chosen == split) run_split(cfg);
    if (chosen == fit_lm) run_fit_lm(cfg);
    if (chosen == fit_nb) run_fit_nb(cfg);
    if (chosen == boost_cmd) run_boost(cfg);
    if (chosen == cv) run_cv(cfg);
    if (chosen == predict) run_predict(cfg);
    write(cfg, "manifest.txt", "[" + chosen->get_name() + "]\n" + chosen->config_to_str(true, false));
  } catch (const FitFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
