#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "citepred/features.hpp"

namespace citepred {

/// A fitted model reduced to what prediction needs: the encoding layout, the
/// retained columns and the original-scale coefficients.
struct SavedModel {
  std::string family;  ///< "lm", "nb", "boost-lm" or "boost-nb"
  EncodingLayout layout;
  std::vector<std::string> columns;
  Eigen::VectorXd coefficients;
  double psi = 0.0;    ///< NB families
  double sigma = 0.0;  ///< LM families, residual standard error

  bool count_model() const { return family == "nb" || family == "boost-nb"; }
};

/// JSON with shortest round-trip doubles.
std::string model_to_json(const SavedModel& model);
SavedModel model_from_json(const std::string& text);
SavedModel load_model(const std::filesystem::path& path);

struct Predictions {
  std::vector<std::string> ids;
  Eigen::VectorXd linear_predictor;
  Eigen::VectorXd prediction;  ///< η for LM (sinh(η) when raw_scale), exp(η) for NB
};

/// Encodes `records` with the model's layout (responses are not needed) and
/// predicts every record.
Predictions predict_saved(const SavedModel& model, std::span<const PaperRecord> records, bool raw_scale = false);

}  // namespace citepred
