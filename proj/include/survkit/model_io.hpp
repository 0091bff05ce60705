#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "survkit/cox.hpp"
#include "survkit/data.hpp"
#include "survkit/deepsurv.hpp"
#include "survkit/forest.hpp"
#include "survkit/ksvm.hpp"
#include "survkit/mtlr.hpp"

namespace survkit {

inline constexpr int kArtifactVersion = 1;

using AnyModel = std::variant<CoxModel, MtlrModel, RsfModel, DeepSurvModel, KsvmModel>;

// "cox", "mtlr", "rsf", "deepsurv" or "ksvm".
std::string model_kind(const AnyModel& model);

double risk_score(const AnyModel& model, std::span<const double> x);

// A trained model plus the covariate scaling learned alongside it, so raw
// rows in the original schema can be scored directly.
struct ModelArtifact {
  AnyModel model;
  std::vector<std::string> input_features;  // schema of raw input rows
  std::optional<ScalingParams> scaling;

  double score_raw(std::span<const double> raw_x) const;
};

nlohmann::json to_json(const CoxModel& m);
nlohmann::json to_json(const MtlrModel& m);
nlohmann::json to_json(const RsfModel& m);
nlohmann::json to_json(const DeepSurvModel& m);
nlohmann::json to_json(const KsvmModel& m);
nlohmann::json to_json(const AnyModel& m);
nlohmann::json to_json(const ModelArtifact& a);

AnyModel model_from_json(const nlohmann::json& j);
ModelArtifact artifact_from_json(const nlohmann::json& j);

void save_artifact(const ModelArtifact& a, const std::filesystem::path& path);
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace survkit
