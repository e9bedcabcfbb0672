#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "citepred/error.hpp"

namespace citepred {

/// One publication: raw covariates and both responses.
struct PaperRecord {
  std::string pmid;
  int year = 0;
  std::int64_t citations = 0;
  std::optional<double> sjr;  ///< weighted citations; absent when the journal has no rank
  int mesh_count = 0;
  double a_score = 0.0;  ///< animal MeSH proportion
  double c_score = 0.0;  ///< molecular MeSH proportion
  double h_score = 0.0;  ///< human MeSH proportion
  int title_len = 1;
  int n_references = 0;
  double ref_mean_age = 0.0;
  double page_length = 1.0;
  std::vector<std::string> languages;
  bool clinical = false;
  bool research = false;
  bool access = false;
  std::vector<std::string> pub_types;
};

/// Throws ValidationError (message carries the pmid) if `r` breaks a record invariant.
void validate_record(const PaperRecord& r);

/// Subtriangle of the A/C/H MeSH triangle. `A` is the dummy-coding reference.
enum class TriangleRegion { A, C, H, ACH, Outside };

std::string_view to_string(TriangleRegion region);

/// Scores summing below this are off the triangle.
inline constexpr double kOutsideThreshold = 1e-9;
/// Slack on a + c + h ≤ 1.
inline constexpr double kScoreSumSlack = 1e-9;

/// Inverse hyperbolic sine, ln(x + sqrt(x² + 1)).
template <std::floating_point Scalar>
Scalar arsinh(Scalar x) {
  if (!std::isfinite(x)) throw DomainError("arsinh: argument must be finite");
  return std::asinh(x);
}

/// Elementwise arsinh over an Eigen array expression.
template <typename Derived>
auto arsinh(const Eigen::ArrayBase<Derived>& x) {
  if (!x.allFinite()) throw DomainError("arsinh: argument must be finite");
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return std::asinh(v); });
}

/// 1 = English only, 2 = English plus at least one other, 3 = no English.
int language_rank(std::span<const std::string> languages);

/// Region of a point given its A/C/H proportions. Corner regions take
/// normalized coordinates strictly above 1/2; boundary points go to the first
/// candidate in the order ACH, A, C, H.
TriangleRegion classify_triangle(double a_score, double c_score, double h_score);

enum class ResponseKind { weighted_sjr, citation_count };
enum class ModelTier { complete, icite, numeric };

std::string_view to_string(ResponseKind kind);
std::string_view to_string(ModelTier tier);
ResponseKind parse_response_kind(std::string_view s);
ModelTier parse_model_tier(std::string_view s);

struct EncodingConfig {
  ResponseKind response = ResponseKind::weighted_sjr;
  ModelTier tier = ModelTier::numeric;
  /// Disable arsinh on Title, References, Age, MeSH and Length.
  bool raw_predictors = false;
};

/// Everything needed to encode new records into the same columns as a
/// training matrix: the config plus the categorical levels seen in training.
struct EncodingLayout {
  EncodingConfig config;
  int reference_year = 0;
  std::vector<int> year_levels;               ///< dummy years, reference excluded
  std::vector<std::string> pub_type_levels;   ///< sorted

  std::vector<std::string> column_names() const;
};

/// Encoded regressors and response shared by every estimator.
struct DesignMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  ResponseKind response_kind = ResponseKind::weighted_sjr;
  Eigen::Index intercept_col = 0;
  std::vector<std::string> row_ids;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index cols() const { return x.cols(); }
  /// Column position by name, or nullopt.
  std::optional<Eigen::Index> find_column(std::string_view name) const;
};

inline constexpr std::string_view kInterceptName = "Intercept";

/// Checks the DesignMatrix invariants; throws ValidationError on the first violation.
void check_design_matrix(const DesignMatrix& dm);

/// Categorical levels and config for `records`.
EncodingLayout derive_layout(std::span<const PaperRecord> records, const EncodingConfig& config);

/// Encodes with a fixed layout. Years or publication types unseen by the
/// layout map to the reference (all-zero) coding.
DesignMatrix encode(std::span<const PaperRecord> records, const EncodingLayout& layout);

/// derive_layout followed by encode.
DesignMatrix build_design_matrix(std::span<const PaperRecord> records, const EncodingConfig& config);

/// Keeps the named columns (intercept always retained, original order preserved).
DesignMatrix select_columns(const DesignMatrix& dm, std::span<const std::string> names);

/// Row subset in the given order.
DesignMatrix take_rows(const DesignMatrix& dm, std::span<const Eigen::Index> rows);

struct TrainTestSplit {
  std::vector<PaperRecord> train;
  std::vector<PaperRecord> test;
};

/// ceil(fraction · n) with a small guard against representation error in fraction · n.
std::size_t train_count(double fraction, std::size_t n);

/// Per-year random split: ceil(fraction · n_year) records of each year go to
/// train. Original record order is preserved within both halves.
TrainTestSplit split_train_test(std::span<const PaperRecord> records, double train_fraction,
                                std::uint64_t seed);

}  // namespace citepred
