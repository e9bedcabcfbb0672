#include "citepred/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace citepred {

using nlohmann::json;

std::string model_to_json(const SavedModel& model) {
  json j;
  j["family"] = model.family;
  j["tier"] = std::string(to_string(model.layout.config.tier));
  j["response"] = std::string(to_string(model.layout.config.response));
  j["raw_predictors"] = model.layout.config.raw_predictors;
  j["reference_year"] = model.layout.reference_year;
  j["year_levels"] = model.layout.year_levels;
  j["pub_type_levels"] = model.layout.pub_type_levels;
  j["columns"] = model.columns;
  j["coefficients"] = std::vector<double>(model.coefficients.data(), model.coefficients.data() + model.coefficients.size());
  if (model.count_model()) {
    j["psi"] = model.psi;
  } else {
    j["sigma"] = model.sigma;
  }
  return j.dump(2) + "\n";
}

SavedModel model_from_json(const std::string& text) {
  SavedModel m;
  try {
    const json j = json::parse(text);
    m.family = j.at("family").get<std::string>();
    if (m.family != "lm" && m.family != "nb" && m.family != "boost-lm" && m.family != "boost-nb") {
      throw ValidationError("model file: unknown family '" + m.family + "'");
    }
    m.layout.config.tier = parse_model_tier(j.at("tier").get<std::string>());
    m.layout.config.response = parse_response_kind(j.at("response").get<std::string>());
    m.layout.config.raw_predictors = j.at("raw_predictors").get<bool>();
    m.layout.reference_year = j.at("reference_year").get<int>();
    m.layout.year_levels = j.at("year_levels").get<std::vector<int>>();
    m.layout.pub_type_levels = j.at("pub_type_levels").get<std::vector<std::string>>();
    m.columns = j.at("columns").get<std::vector<std::string>>();
    const auto coef = j.at("coefficients").get<std::vector<double>>();
    if (coef.size() != m.columns.size()) throw ValidationError("model file: coefficient count differs from columns");
    m.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    if (m.count_model()) {
      m.psi = j.at("psi").get<double>();
    } else {
      m.sigma = j.at("sigma").get<double>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
  return m;
}

SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

Predictions predict_saved(const SavedModel& model, std::span<const PaperRecord> records, bool raw_scale) {
  EncodingLayout layout = model.layout;
  layout.config.response = ResponseKind::citation_count;
  const DesignMatrix full = encode(records, layout);
  const DesignMatrix dm = select_columns(full, model.columns);
  if (dm.column_names != model.columns) throw ShapeError("predict: encoded columns differ from the model's columns");
  Predictions out;
  out.ids = dm.row_ids;
  out.linear_predictor = dm.x * model.coefficients;
  if (model.count_model()) {
    out.prediction = out.linear_predictor.array().exp().matrix();
  } else {
    out.prediction = raw_scale ? Eigen::VectorXd(out.linear_predictor.array().sinh().matrix()) : out.linear_predictor;
  }
  return out;
}

}  // namespace citepred
