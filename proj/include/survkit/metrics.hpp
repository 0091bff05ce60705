#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "survkit/data.hpp"

namespace survkit {

enum class TieCredit {
  kHalf,  // tied risk scores earn 0.5 (Harrell)
  kZero,  // formula-literal: ties earn nothing
};

struct ConcordanceResult {
  double c_index = 0.0;
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t tied_risk = 0;
  std::uint64_t comparable = 0;
};

// Comparable pairs are (j, i) with T_j < T_i and subject j observed; the pair
// is concordant when j carries the strictly higher risk score.
ConcordanceResult c_index(std::span<const double> times, std::span<const int> status,
                          std::span<const double> risk_scores, TieCredit ties = TieCredit::kHalf);

using RiskFunction = std::function<double(std::span<const double>)>;

struct NamedScorer {
  std::string name;
  RiskFunction score;
};

struct SplitInfo {
  std::uint64_t seed = 0;
  double fraction = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

struct ComparisonEntry {
  std::string model;
  ConcordanceResult result;
};

struct ModelComparisonReport {
  SplitInfo split;
  std::vector<ComparisonEntry> entries;  // descending c_index, stable
};

ModelComparisonReport compare_models(const std::vector<NamedScorer>& models, const SurvivalDataset& test,
                                     const SplitInfo& split = {}, TieCredit ties = TieCredit::kHalf);

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const ModelComparisonReport& report);
ModelComparisonReport report_from_json(const nlohmann::json& j);

std::string format_report_text(const ModelComparisonReport& report);

}  // namespace survkit
