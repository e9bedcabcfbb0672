#include "citepred/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "citepred/random.hpp"

namespace citepred {

namespace {

PaperRecord draw_record(const GeneratorSpec& spec, std::size_t i) {
  CounterRng rng(spec.seed, i);
  PaperRecord r;
  r.pmid = "SIM" + std::to_string(i + 1);
  const auto years = static_cast<std::uint64_t>(spec.year_max - spec.year_min + 1);
  r.year = spec.year_min + static_cast<int>(rng.below(years));
  r.title_len = std::max<int>(1, static_cast<int>(rng.poisson(spec.title_mean)));
  r.n_references = static_cast<int>(rng.poisson(spec.references_mean));
  r.ref_mean_age = static_cast<double>(rng.poisson(spec.age_mean));
  r.mesh_count = static_cast<int>(rng.poisson(spec.mesh_mean));
  r.page_length = std::max<double>(1.0, static_cast<double>(rng.poisson(spec.length_mean)));

  // Uniform on the solid simplex: first three of Dirichlet(1, 1, 1, 1).
  const bool outside = rng.uniform() < spec.outside_prob;
  double e[4];
  double total = 0.0;
  for (double& v : e) {
    v = -std::log(1.0 - rng.uniform());
    total += v;
  }
  if (!outside && r.mesh_count > 0) {
    r.a_score = e[0] / total;
    r.c_score = e[1] / total;
    r.h_score = e[2] / total;
  }

  r.clinical = rng.uniform() < spec.flag_prob;
  r.research = rng.uniform() < spec.flag_prob;
  r.access = rng.uniform() < spec.flag_prob;
  const double lang = rng.uniform();
  if (lang < spec.language2_prob) {
    r.languages = {"eng", "fre"};
  } else if (lang < spec.language2_prob + spec.language3_prob) {
    r.languages = {"ger"};
  } else {
    r.languages = {"eng"};
  }
  for (const auto& t : spec.pub_types) {
    if (rng.uniform() < spec.pub_type_prob) r.pub_types.push_back(t);
  }
  return r;
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.family == Family::gaussian && !(spec.sigma >= 0.0)) throw ConfigError("generator: sigma must be >= 0");
  if (spec.family == Family::negbin && !(spec.psi > 0.0)) throw ConfigError("generator: psi must be positive");
  if (spec.year_max < spec.year_min) throw ConfigError("generator: year_max below year_min");
  for (double prob : {spec.outside_prob, spec.flag_prob, spec.language2_prob, spec.language3_prob, spec.pub_type_prob}) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("generator: probabilities must lie in [0, 1]");
  }
  if (spec.language2_prob + spec.language3_prob > 1.0) throw ConfigError("generator: language probabilities exceed 1");
}

}  // namespace

SimulatedData generate(const GeneratorSpec& spec) {
  validate_spec(spec);
  SimulatedData out;
  out.layout.config.response = spec.family == Family::gaussian ? ResponseKind::weighted_sjr : ResponseKind::citation_count;
  out.layout.config.tier = spec.pub_types.empty() ? ModelTier::icite : ModelTier::complete;
  out.layout.config.raw_predictors = spec.raw_predictors;

  out.records.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) out.records.push_back(draw_record(spec, i));

  if (spec.n == 0) {
    out.layout.reference_year = spec.year_min;
    out.design.column_names = out.layout.column_names();
    out.design.x.resize(0, static_cast<Eigen::Index>(out.design.column_names.size()));
    out.design.response_kind = out.layout.config.response;
    for (const auto& [term, value] : spec.coefficients) {
      if (std::find(out.design.column_names.begin(), out.design.column_names.end(), term) ==
          out.design.column_names.end()) {
        throw ConfigError("generator: term '" + term + "' has no generatable covariate");
      }
    }
    return out;
  }

  // Encode with a count response (placeholder zeros) to get the covariates.
  EncodingConfig config = out.layout.config;
  config.response = ResponseKind::citation_count;
  EncodingLayout layout = derive_layout(out.records, config);
  DesignMatrix x = encode(out.records, layout);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  for (const auto& [term, value] : spec.coefficients) {
    const auto j = x.find_column(term);
    if (!j) throw ConfigError("generator: term '" + term + "' has no generatable covariate");
    beta(*j) = value;
  }
  const Eigen::VectorXd eta = x.x * beta;

  for (std::size_t i = 0; i < spec.n; ++i) {
    // Response draws use a second stream family so covariates stay fixed
    // when only the response model changes.
    CounterRng rng(spec.seed ^ 0xA5A5A5A5A5A5A5A5ULL, i);
    const auto row = static_cast<Eigen::Index>(i);
    PaperRecord& r = out.records[i];
    if (spec.family == Family::gaussian) {
      const double y = eta(row) + spec.sigma * rng.normal();
      x.y(row) = y;
      r.sjr = std::max(std::sinh(y), 0.0);
    } else {
      const double mu = std::exp(eta(row));
      if (!std::isfinite(mu)) throw ConfigError("generator: linear predictor overflows exp");
      r.citations = static_cast<std::int64_t>(rng.negbin(mu, spec.psi));
      x.y(row) = static_cast<double>(r.citations);
    }
  }
  layout.config.response = out.layout.config.response;
  x.response_kind = layout.config.response;
  out.layout = layout;
  out.design = std::move(x);
  return out;
}

GeneratorSpec preset_spec(std::string_view name) {
  static const std::vector<std::string> full_terms{
      "Clinical",     "Research",   "H Score",   "A Score",    "C Score",         "Title",
      "Triangle ACH", "Triangle C", "Triangle H", "Triangle Outside", "References", "Age",
      "MeSH",         "Access",     "Language 2", "Language 3", "Length",         "Intercept"};
  static const std::vector<std::string> numeric_terms{"H Score", "A Score", "C Score", "Title", "References",
                                                      "Age",     "MeSH",    "Length",  "Intercept"};
  auto make = [](const std::vector<std::string>& terms, std::initializer_list<double> values, Family family,
                 double dispersion) {
    GeneratorSpec spec;
    auto it = values.begin();
    for (const auto& t : terms) spec.coefficients[t] = *it++;
    spec.family = family;
    (family == Family::gaussian ? spec.sigma : spec.psi) = dispersion;
    return spec;
  };
  if (name == "lmc") {
    return make(full_terms, {0.066, 0.296, -0.453, -0.305, 0.253, -0.040, 0.226, 0.018, 0.038, 0.126, 0.713, -0.511,
                             0.134, 0.082, -0.830, -1.370, 0.062, 1.935},
                Family::gaussian, 1.277);
  }
  if (name == "lmi") {
    return make(full_terms, {0.363, 0.178, -0.521, -0.332, 0.195, -0.009, 0.202, -0.005, 0.014, 0.098, 0.753, -0.548,
                             0.131, 0.127, -0.860, -1.395, 0.117, 2.038},
                Family::gaussian, 1.291);
  }
  if (name == "lmr") {
    return make(numeric_terms, {-0.781, -0.455, 0.105, -0.066, 0.722, -0.480, 0.227, 0.116, 1.760}, Family::gaussian,
                1.408);
  }
  if (name == "glmc") {
    return make(full_terms, {0.096, 0.451, -0.075, -0.217, 0.011, -0.069, 0.123, -0.078, -0.017, 0.029, 0.576, -0.262,
                             0.123, 0.294, -0.634, -1.966, 0.148, 1.263},
                Family::negbin, 0.803);
  }
  if (name == "glmi") {
    return make(full_terms, {0.466, 0.153, -0.137, -0.222, -0.072, -0.040, 0.085, -0.114, -0.086, -0.031, 0.625,
                             -0.288, 0.113, 0.391, -0.645, -1.731, 0.234, 1.441},
                Family::negbin, 0.768);
  }
  if (name == "glmr") {
    return make(numeric_terms, {-0.322, -0.333, -0.046, -0.029, 0.630, -0.197, 0.150, 0.215, 0.966}, Family::negbin,
                0.667);
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected lmc, lmi, lmr, glmc, glmi or glmr)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("generator spec line " + std::to_string(line_no) + ": '" + v + "' is not a number");
  }
}

}  // namespace

GeneratorSpec parse_generator_spec(std::istream& in) {
  GeneratorSpec spec;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("generator spec line " + std::to_string(line_no) + ": bad section");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (section != "family" && section != "generator" && section != "coefficients") {
        throw ConfigError("generator spec line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("generator spec line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (section.empty() || section == "coefficients") {
      spec.coefficients[key] = to_double(value, line_no);
    } else if (section == "family") {
      if (key == "kind") {
        if (value == "gaussian") {
          spec.family = Family::gaussian;
        } else if (value == "negbin") {
          spec.family = Family::negbin;
        } else {
          throw ConfigError("generator spec line " + std::to_string(line_no) + ": unknown family '" + value + "'");
        }
      } else if (key == "sigma") {
        spec.sigma = to_double(value, line_no);
      } else if (key == "psi") {
        spec.psi = to_double(value, line_no);
      } else {
        throw ConfigError("generator spec line " + std::to_string(line_no) + ": unknown family key '" + key + "'");
      }
    } else {
      const std::map<std::string, double*> reals{
          {"references_mean", &spec.references_mean}, {"mesh_mean", &spec.mesh_mean},
          {"title_mean", &spec.title_mean},           {"length_mean", &spec.length_mean},
          {"age_mean", &spec.age_mean},               {"outside_prob", &spec.outside_prob},
          {"flag_prob", &spec.flag_prob},             {"language2_prob", &spec.language2_prob},
          {"language3_prob", &spec.language3_prob},   {"pub_type_prob", &spec.pub_type_prob}};
      if (auto it = reals.find(key); it != reals.end()) {
        *it->second = to_double(value, line_no);
      } else if (key == "n") {
        spec.n = static_cast<std::size_t>(to_double(value, line_no));
      } else if (key == "seed") {
        try {
          std::size_t used = 0;
          spec.seed = std::stoull(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
          throw ConfigError("generator spec line " + std::to_string(line_no) + ": bad seed '" + value + "'");
        }
      } else if (key == "year_min") {
        spec.year_min = static_cast<int>(to_double(value, line_no));
      } else if (key == "year_max") {
        spec.year_max = static_cast<int>(to_double(value, line_no));
      } else if (key == "raw_predictors") {
        spec.raw_predictors = value == "1" || value == "true";
      } else if (key == "pub_types") {
        spec.pub_types.clear();
        std::stringstream ss(value);
        for (std::string t; std::getline(ss, t, ';');) {
          if (!trim(t).empty()) spec.pub_types.push_back(trim(t));
        }
      } else {
        throw ConfigError("generator spec line " + std::to_string(line_no) + ": unknown generator key '" + key + "'");
      }
    }
  }
  return spec;
}

GeneratorSpec read_generator_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open generator spec " + path.string());
  return parse_generator_spec(in);
}

}  // namespace citepred
