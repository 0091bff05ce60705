#include "survkit/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "survkit/error.hpp"

namespace survkit {

ConcordanceResult c_index(std::span<const double> times, std::span<const int> status,
                          std::span<const double> risk_scores, TieCredit ties) {
  const std::size_t n = times.size();
  if (status.size() != n || risk_scores.size() != n) throw ArgumentError("c_index: length mismatch");
  if (n < 2) throw ArgumentError("c_index: at least two subjects are required");

  ConcordanceResult r;
  for (std::size_t j = 0; j < n; ++j) {
    if (status[j] != 1) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(times[j] < times[i])) continue;
      ++r.comparable;
      if (risk_scores[j] > risk_scores[i]) ++r.concordant;
      else if (risk_scores[j] < risk_scores[i]) ++r.discordant;
      else ++r.tied_risk;
    }
  }
  if (r.comparable == 0) throw EvaluationError("no comparable pairs");
  const double credit = ties == TieCredit::kHalf ? 0.5 : 0.0;
  r.c_index = (static_cast<double>(r.concordant) + credit * static_cast<double>(r.tied_risk)) /
              static_cast<double>(r.comparable);
  return r;
}

ModelComparisonReport compare_models(const std::vector<NamedScorer>& models, const SurvivalDataset& test,
                                     const SplitInfo& split, TieCredit ties) {
  if (models.empty()) throw ArgumentError("compare_models: no models given");
  const auto times = test.times();
  const auto status = test.statuses();
  ModelComparisonReport report;
  report.split = split;
  for (const auto& m : models) {
    std::vector<double> scores;
    scores.reserve(test.size());
    for (const auto& row : test.rows()) scores.push_back(m.score(row.x));
    try {
      report.entries.push_back({m.name, c_index(times, status, scores, ties)});
    } catch (const ArgumentError& e) {
      throw ArgumentError(m.name + ": " + e.what());
    } catch (const EvaluationError& e) {
      throw EvaluationError(m.name + ": " + e.what());
    }
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const auto& a, const auto& b) { return a.result.c_index > b.result.c_index; });
  return report;
}

nlohmann::json to_json(const ModelComparisonReport& report) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& e : report.entries) {
    results.push_back({{"model", e.model},
                       {"c_index", e.result.c_index},
                       {"comparable", e.result.comparable},
                       {"concordant", e.result.concordant},
                       {"discordant", e.result.discordant},
                       {"tied_risk", e.result.tied_risk}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"split",
           {{"seed", report.split.seed},
            {"fraction", report.split.fraction},
            {"n_train", report.split.n_train},
            {"n_test", report.split.n_test}}},
          {"results", results}};
}

ModelComparisonReport report_from_json(const nlohmann::json& j) {
  ModelComparisonReport report;
  const auto& s = j.at("split");
  report.split.seed = s.at("seed").get<std::uint64_t>();
  report.split.fraction = s.at("fraction").get<double>();
  report.split.n_train = s.at("n_train").get<std::size_t>();
  report.split.n_test = s.at("n_test").get<std::size_t>();
  for (const auto& r : j.at("results")) {
    ComparisonEntry e;
    e.model = r.at("model").get<std::string>();
    e.result.c_index = r.at("c_index").get<double>();
    e.result.comparable = r.at("comparable").get<std::uint64_t>();
    e.result.concordant = r.value("concordant", std::uint64_t{0});
    e.result.discordant = r.value("discordant", std::uint64_t{0});
    e.result.tied_risk = r.value("tied_risk", std::uint64_t{0});
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::string format_report_text(const ModelComparisonReport& report) {
  std::ostringstream out;
  out << "split: seed=" << report.split.seed << " fraction=" << report.split.fraction
      << " n_train=" << report.split.n_train << " n_test=" << report.split.n_test << '\n';
  out << std::left << std::setw(12) << "model" << std::right << std::setw(10) << "c_index" << std::setw(12)
      << "comparable" << '\n';
  for (const auto& e : report.entries) {
    out << std::left << std::setw(12) << e.model << std::right << std::fixed << std::setprecision(6)
        << std::setw(10) << e.result.c_index << std::setw(12) << e.result.comparable << '\n';
  }
  return out.str();
}

}  // namespace survkit
