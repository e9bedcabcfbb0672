#include "citepred/features.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "citepred/random.hpp"

namespace citepred {

namespace {

bool is_english(std::string_view code) {
  return code == "eng" || code == "en" || code == "English" || code == "english";
}

[[noreturn]] void record_error(const PaperRecord& r, const std::string& what) {
  throw ValidationError("record " + (r.pmid.empty() ? std::string("<no pmid>") : r.pmid) + ": " + what);
}

}  // namespace

void validate_record(const PaperRecord& r) {
  if (r.citations < 0) record_error(r, "citations must be non-negative");
  if (r.sjr && (!std::isfinite(*r.sjr) || *r.sjr < 0.0)) record_error(r, "sjr must be finite and non-negative");
  if (r.mesh_count < 0) record_error(r, "mesh_count must be non-negative");
  for (double s : {r.a_score, r.c_score, r.h_score}) {
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) record_error(r, "MeSH scores must lie in [0, 1]");
  }
  if (r.a_score + r.c_score + r.h_score > 1.0 + kScoreSumSlack) record_error(r, "MeSH scores sum above 1");
  if (r.mesh_count == 0 && (r.a_score != 0.0 || r.c_score != 0.0 || r.h_score != 0.0)) {
    record_error(r, "mesh_count = 0 requires zero MeSH scores");
  }
  if (r.title_len <= 0) record_error(r, "title_len must be positive");
  if (r.n_references < 0) record_error(r, "n_references must be non-negative");
  if (!std::isfinite(r.ref_mean_age) || r.ref_mean_age < 0.0) record_error(r, "ref_mean_age must be non-negative");
  if (!std::isfinite(r.page_length) || r.page_length <= 0.0) record_error(r, "page_length must be positive");
}

std::string_view to_string(TriangleRegion region) {
  switch (region) {
    case TriangleRegion::A: return "A";
    case TriangleRegion::C: return "C";
    case TriangleRegion::H: return "H";
    case TriangleRegion::ACH: return "ACH";
    case TriangleRegion::Outside: return "Outside";
  }
  return "?";
}

int language_rank(std::span<const std::string> languages) {
  if (languages.empty()) throw ValidationError("language_rank: empty language list");
  const bool english = std::any_of(languages.begin(), languages.end(), [](const auto& l) { return is_english(l); });
  if (!english) return 3;
  const bool other = std::any_of(languages.begin(), languages.end(), [](const auto& l) { return !is_english(l); });
  return other ? 2 : 1;
}

TriangleRegion classify_triangle(double a_score, double c_score, double h_score) {
  for (double s : {a_score, c_score, h_score}) {
    if (!std::isfinite(s) || s < 0.0) throw ValidationError("classify_triangle: scores must be non-negative");
  }
  const double sum = a_score + c_score + h_score;
  if (sum > 1.0 + kScoreSumSlack) throw ValidationError("classify_triangle: scores sum above 1");
  if (sum < kOutsideThreshold) return TriangleRegion::Outside;
  const double a = a_score / sum;
  const double c = c_score / sum;
  const double h = h_score / sum;
  if (a <= 0.5 && c <= 0.5 && h <= 0.5) return TriangleRegion::ACH;
  if (a > 0.5) return TriangleRegion::A;
  if (c > 0.5) return TriangleRegion::C;
  return TriangleRegion::H;
}

std::string_view to_string(ResponseKind kind) {
  return kind == ResponseKind::weighted_sjr ? "sjr" : "citations";
}

std::string_view to_string(ModelTier tier) {
  switch (tier) {
    case ModelTier::complete: return "complete";
    case ModelTier::icite: return "icite";
    case ModelTier::numeric: return "numeric";
  }
  return "?";
}

ResponseKind parse_response_kind(std::string_view s) {
  if (s == "sjr" || s == "weighted_sjr") return ResponseKind::weighted_sjr;
  if (s == "citations" || s == "citation_count") return ResponseKind::citation_count;
  throw ConfigError("unknown response kind '" + std::string(s) + "'");
}

ModelTier parse_model_tier(std::string_view s) {
  if (s == "complete") return ModelTier::complete;
  if (s == "icite") return ModelTier::icite;
  if (s == "numeric") return ModelTier::numeric;
  throw ConfigError("unknown model tier '" + std::string(s) + "'");
}

std::vector<std::string> EncodingLayout::column_names() const {
  const bool categorical = config.tier != ModelTier::numeric;
  std::vector<std::string> names{std::string(kInterceptName)};
  if (categorical) {
    names.insert(names.end(), {"Clinical", "Research"});
  }
  names.insert(names.end(), {"H Score", "A Score", "C Score", "Title"});
  if (categorical) {
    names.insert(names.end(), {"Triangle ACH", "Triangle C", "Triangle H", "Triangle Outside"});
  }
  names.insert(names.end(), {"References", "Age", "MeSH"});
  if (categorical) {
    names.insert(names.end(), {"Access", "Language 2", "Language 3"});
  }
  names.emplace_back("Length");
  if (categorical) {
    for (int y : year_levels) names.push_back("Year " + std::to_string(y));
  }
  if (config.tier == ModelTier::complete) {
    for (const auto& t : pub_type_levels) names.push_back("Pub " + t);
  }
  return names;
}

std::optional<Eigen::Index> DesignMatrix::find_column(std::string_view name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    if (column_names[j] == name) return static_cast<Eigen::Index>(j);
  }
  return std::nullopt;
}

void check_design_matrix(const DesignMatrix& dm) {
  if (dm.rows() == 0 || dm.cols() == 0) throw ValidationError("design matrix must have n > 0 and p >= 1");
  if (dm.y.size() != dm.rows()) throw ValidationError("response length differs from row count");
  if (static_cast<Eigen::Index>(dm.column_names.size()) != dm.cols()) {
    throw ValidationError("column_names length differs from column count");
  }
  if (!dm.x.allFinite() || !dm.y.allFinite()) throw ValidationError("design matrix has non-finite entries");
  if (dm.intercept_col < 0 || dm.intercept_col >= dm.cols() || !(dm.x.col(dm.intercept_col).array() == 1.0).all()) {
    throw ValidationError("intercept column must be all ones");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : dm.column_names) {
    if (!seen.insert(name).second) throw ValidationError("duplicate column name '" + name + "'");
  }
}

EncodingLayout derive_layout(std::span<const PaperRecord> records, const EncodingConfig& config) {
  if (records.empty()) throw ValidationError("cannot encode an empty record set");
  EncodingLayout layout;
  layout.config = config;
  std::set<int> years;
  std::set<std::string> types;
  bool any_sjr = false;
  for (const auto& r : records) {
    any_sjr = any_sjr || r.sjr.has_value();
    if (config.response == ResponseKind::weighted_sjr && !r.sjr) continue;
    years.insert(r.year);
    types.insert(r.pub_types.begin(), r.pub_types.end());
  }
  if (config.response == ResponseKind::weighted_sjr && !any_sjr) {
    throw ConfigError("weighted-SJR response requested but no record carries an sjr value");
  }
  if (config.tier == ModelTier::complete && types.empty()) {
    throw ConfigError("tier 'complete' requires publication types; none are present");
  }
  layout.reference_year = *years.begin();
  layout.year_levels.assign(std::next(years.begin()), years.end());
  layout.pub_type_levels.assign(types.begin(), types.end());
  return layout;
}

DesignMatrix encode(std::span<const PaperRecord> records, const EncodingLayout& layout) {
  const auto& config = layout.config;
  const bool sjr_response = config.response == ResponseKind::weighted_sjr;
  std::vector<const PaperRecord*> kept;
  kept.reserve(records.size());
  for (const auto& r : records) {
    validate_record(r);
    if (sjr_response && !r.sjr) continue;
    kept.push_back(&r);
  }
  if (kept.empty()) throw ValidationError("no records left to encode");

  DesignMatrix dm;
  dm.column_names = layout.column_names();
  dm.response_kind = config.response;
  dm.intercept_col = 0;
  const auto n = static_cast<Eigen::Index>(kept.size());
  const auto p = static_cast<Eigen::Index>(dm.column_names.size());
  dm.x = Eigen::MatrixXd::Zero(n, p);
  dm.y.resize(n);
  dm.row_ids.reserve(kept.size());

  const auto count_transform = [&](double v) { return config.raw_predictors ? v : arsinh(v); };
  const bool categorical = config.tier != ModelTier::numeric;
  std::map<int, Eigen::Index> year_col;
  std::map<std::string, Eigen::Index, std::less<>> type_col;

  for (Eigen::Index i = 0; i < n; ++i) {
    const PaperRecord& r = *kept[static_cast<std::size_t>(i)];
    auto row = dm.x.row(i);
    Eigen::Index j = 0;
    row(j++) = 1.0;
    if (categorical) {
      row(j++) = r.clinical ? 1.0 : 0.0;
      row(j++) = r.research ? 1.0 : 0.0;
    }
    row(j++) = r.h_score;
    row(j++) = r.a_score;
    row(j++) = r.c_score;
    row(j++) = count_transform(r.title_len);
    if (categorical) {
      const TriangleRegion region = classify_triangle(r.a_score, r.c_score, r.h_score);
      row(j + 0) = region == TriangleRegion::ACH;
      row(j + 1) = region == TriangleRegion::C;
      row(j + 2) = region == TriangleRegion::H;
      row(j + 3) = region == TriangleRegion::Outside;
      j += 4;
    }
    row(j++) = count_transform(r.n_references);
    row(j++) = count_transform(r.ref_mean_age);
    row(j++) = count_transform(r.mesh_count);
    if (categorical) {
      row(j++) = r.access ? 1.0 : 0.0;
      int rank = 1;
      try {
        rank = language_rank(r.languages);
      } catch (const ValidationError& e) {
        record_error(r, e.what());
      }
      row(j++) = rank == 2;
      row(j++) = rank == 3;
    }
    row(j++) = count_transform(r.page_length);
    if (categorical) {
      const auto base = j;
      if (year_col.empty()) {
        for (std::size_t k = 0; k < layout.year_levels.size(); ++k) {
          year_col.emplace(layout.year_levels[k], base + static_cast<Eigen::Index>(k));
        }
      }
      if (auto it = year_col.find(r.year); it != year_col.end()) row(it->second) = 1.0;
      j += static_cast<Eigen::Index>(layout.year_levels.size());
    }
    if (config.tier == ModelTier::complete) {
      if (type_col.empty()) {
        for (std::size_t k = 0; k < layout.pub_type_levels.size(); ++k) {
          type_col.emplace(layout.pub_type_levels[k], j + static_cast<Eigen::Index>(k));
        }
      }
      for (const auto& t : r.pub_types) {
        if (auto it = type_col.find(t); it != type_col.end()) row(it->second) = 1.0;
      }
    }
    dm.y(i) = sjr_response ? arsinh(*r.sjr) : static_cast<double>(r.citations);
    dm.row_ids.push_back(r.pmid);
  }
  return dm;
}

DesignMatrix build_design_matrix(std::span<const PaperRecord> records, const EncodingConfig& config) {
  return encode(records, derive_layout(records, config));
}

DesignMatrix select_columns(const DesignMatrix& dm, std::span<const std::string> names) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < dm.cols(); ++j) {
    const auto& name = dm.column_names[static_cast<std::size_t>(j)];
    if (j == dm.intercept_col || std::find(names.begin(), names.end(), name) != names.end()) keep.push_back(j);
  }
  for (const auto& name : names) {
    if (!dm.find_column(name)) throw ConfigError("unknown column '" + name + "'");
  }
  DesignMatrix out;
  out.x.resize(dm.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.x.col(static_cast<Eigen::Index>(k)) = dm.x.col(keep[k]);
    out.column_names.push_back(dm.column_names[static_cast<std::size_t>(keep[k])]);
    if (keep[k] == dm.intercept_col) out.intercept_col = static_cast<Eigen::Index>(k);
  }
  out.y = dm.y;
  out.response_kind = dm.response_kind;
  out.row_ids = dm.row_ids;
  return out;
}

DesignMatrix take_rows(const DesignMatrix& dm, std::span<const Eigen::Index> rows) {
  DesignMatrix out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n, dm.cols());
  out.y.resize(n);
  out.row_ids.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = rows[static_cast<std::size_t>(i)];
    if (src < 0 || src >= dm.rows()) throw ShapeError("take_rows: row index out of range");
    out.x.row(i) = dm.x.row(src);
    out.y(i) = dm.y(src);
    if (!dm.row_ids.empty()) out.row_ids.push_back(dm.row_ids[static_cast<std::size_t>(src)]);
  }
  out.column_names = dm.column_names;
  out.response_kind = dm.response_kind;
  out.intercept_col = dm.intercept_col;
  return out;
}

std::size_t train_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

TrainTestSplit split_train_test(std::span<const PaperRecord> records, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  if (records.empty()) throw ValidationError("cannot split an empty record set");
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t i = 0; i < records.size(); ++i) by_year[records[i].year].push_back(i);

  std::vector<char> in_train(records.size(), 0);
  for (auto& [year, idx] : by_year) {
    // One independent stream per year; Fisher–Yates on the year's indices.
    CounterRng rng(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(year)));
    for (std::size_t k = idx.size(); k > 1; --k) {
      std::swap(idx[k - 1], idx[rng.below(k)]);
    }
    const std::size_t take = train_count(train_fraction, idx.size());
    for (std::size_t k = 0; k < take; ++k) in_train[idx[k]] = 1;
  }
  TrainTestSplit split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(records[i]);
  }
  return split;
}

}  // namespace citepred
