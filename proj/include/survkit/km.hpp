#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "survkit/data.hpp"

namespace survkit {

struct KMStep {
  double time = 0.0;
  std::size_t n_risk = 0;
  std::size_t n_event = 0;
  double survival = 1.0;
  double std_error = 0.0;  // Greenwood, survival scale
};

// Product-limit estimate. Only event times create steps; censored-only
// times just deplete the risk set.
struct KMCurve {
  std::vector<KMStep> steps;
  std::size_t n_total = 0;
  // Observed times of every subject, sorted; used for at-risk counts at
  // arbitrary query times.
  std::vector<double> observed_times;

  double survival_at(double t) const;
  std::size_t n_risk_at(double t) const;
};

struct KMSummaryRow {
  double query_time = 0.0;
  std::size_t n_risk = 0;
  std::size_t n_event = 0;
  double survival = 1.0;
  double std_error = 0.0;
  double ci_lower = 1.0;
  double ci_upper = 1.0;
};

KMCurve fit_km(std::span<const double> times, std::span<const int> status);
KMCurve fit_km(const SurvivalDataset& ds);

// Log-type pointwise interval S*exp(-/+ z*se/S), clipped to [0, 1].
std::pair<double, double> confidence_interval(double survival, double std_error, double level);

std::vector<KMSummaryRow> summarize_at(const KMCurve& curve, std::span<const double> query_times,
                                       double level = 0.95);

// Table with survival to 3 decimals and std.error to 4.
std::string format_km_table(const std::vector<KMSummaryRow>& rows, double level = 0.95);

// `time,n_risk,n_event,survival,std_error,ci_lower,ci_upper`
void write_km_summary_csv(const std::vector<KMSummaryRow>& rows, std::ostream& out);

// Step-function plot points `time,survival,ci_lower,ci_upper`, starting at
// (0, 1, 1, 1).
void write_km_curve_csv(const KMCurve& curve, std::ostream& out, double level = 0.95);

}  // namespace survkit
