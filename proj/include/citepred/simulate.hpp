#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "citepred/features.hpp"

namespace citepred {

enum class Family { gaussian, negbin };

/// Synthetic corpus description. Coefficient terms use design-matrix column
/// names ("Intercept", "References", "Triangle C", "Year 2003", "Pub Review", ...).
///
/// Covariates: Title, References, MeSH, Length and Age are Poisson counts with
/// the given means (Title and Length at least 1); with probability
/// `outside_prob` a record has no A/C/H MeSH terms, otherwise its scores are
/// uniform on {a, c, h ≥ 0, a + c + h ≤ 1}; flags are Bernoulli(flag_prob);
/// language ranks 2 and 3 have probabilities language2_prob/language3_prob;
/// years are uniform on [year_min, year_max]; each publication type label is
/// present independently with probability pub_type_prob.
struct GeneratorSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::map<std::string, double> coefficients;
  Family family = Family::gaussian;
  double sigma = 1.0;
  double psi = 1.0;
  bool raw_predictors = false;

  double references_mean = 30.0;
  double mesh_mean = 12.0;
  double title_mean = 12.0;
  double length_mean = 8.0;
  double age_mean = 10.0;
  double outside_prob = 0.1;
  double flag_prob = 0.5;
  double language2_prob = 0.1;
  double language3_prob = 0.1;
  int year_min = 2000;
  int year_max = 2004;
  std::vector<std::string> pub_types{"Journal Article", "Review"};
  double pub_type_prob = 0.3;
};

/// Records plus the exact matrix that generated the responses. For the
/// Gaussian family the matrix response is the unclipped draw y while the
/// records store sjr = max(sinh(y), 0).
struct SimulatedData {
  std::vector<PaperRecord> records;
  DesignMatrix design;
  EncodingLayout layout;
};

/// Deterministic per seed; row i draws from CounterRng(seed, i) only.
/// Throws ConfigError for terms that match no generatable column.
SimulatedData generate(const GeneratorSpec& spec);

/// Reference coefficient sets: lmc, lmi, lmr (weighted SJR, Gaussian with a
/// fixed residual standard error) and glmc, glmi, glmr (citation counts, NB
/// with a fixed ψ). Suffixes c, i, r select the complete, icite and numeric
/// covariate sets.
GeneratorSpec preset_spec(std::string_view name);

/// Key-value grammar:
///
///   # comment
///   References = 0.630          <- coefficient terms before any section
///   [family]
///   kind = negbin               <- gaussian | negbin
///   psi = 0.667                 <- or sigma = ... for gaussian
///   [generator]
///   n = 50000                   <- also seed, year_min, year_max, *_mean,
///                                  *_prob, raw_predictors, pub_types (a;b)
///   [coefficients]              <- optional explicit section for terms
GeneratorSpec parse_generator_spec(std::istream& in);
GeneratorSpec read_generator_spec(const std::filesystem::path& path);

}  // namespace citepred
