#include "survkit/km.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "survkit/error.hpp"
#include "survkit/stats.hpp"

namespace survkit {

KMCurve fit_km(std::span<const double> times, std::span<const int> status) {
  if (times.size() != status.size()) throw ArgumentError("fit_km: times and status differ in length");
  if (times.empty()) throw ArgumentError("fit_km: empty dataset");

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });

  KMCurve curve;
  curve.n_total = times.size();
  curve.observed_times.reserve(times.size());
  for (auto i : order) curve.observed_times.push_back(times[i]);

  double survival = 1.0;
  double greenwood = 0.0;
  std::size_t at_risk = times.size();
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = times[order[i]];
    std::size_t events = 0;
    std::size_t leaving = 0;
    // Censorings tied with events stay in the risk set for those events.
    while (i < order.size() && times[order[i]] == t) {
      events += static_cast<std::size_t>(status[order[i]] == 1);
      ++leaving;
      ++i;
    }
    if (events > 0) {
      const auto n = static_cast<double>(at_risk);
      const auto d = static_cast<double>(events);
      survival *= 1.0 - d / n;
      if (events < at_risk) greenwood += d / (n * (n - d));
      const double se = survival > 0.0 ? survival * std::sqrt(greenwood) : 0.0;
      curve.steps.push_back({t, at_risk, events, survival, se});
    }
    at_risk -= leaving;
  }
  return curve;
}

KMCurve fit_km(const SurvivalDataset& ds) {
  const auto t = ds.times();
  const auto s = ds.statuses();
  return fit_km(t, s);
}

double KMCurve::survival_at(double t) const {
  double s = 1.0;
  for (const auto& step : steps) {
    if (step.time > t) break;
    s = step.survival;
  }
  return s;
}

std::size_t KMCurve::n_risk_at(double t) const {
  auto it = std::lower_bound(observed_times.begin(), observed_times.end(), t);
  return static_cast<std::size_t>(observed_times.end() - it);
}

std::pair<double, double> confidence_interval(double survival, double std_error, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");
  if (survival < 0.0 || survival > 1.0 || std_error < 0.0) {
    throw ArgumentError("confidence_interval: survival must be in [0,1] and std_error >= 0");
  }
  if (survival == 0.0) return {0.0, 0.0};
  const double z = stats::normal_quantile((1.0 + level) / 2.0);
  const double half_width = z * std_error / survival;
  const double lower = survival * std::exp(-half_width);
  const double upper = survival * std::exp(half_width);
  return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0)};
}

std::vector<KMSummaryRow> summarize_at(const KMCurve& curve, std::span<const double> query_times, double level) {
  for (std::size_t k = 1; k < query_times.size(); ++k) {
    if (!(query_times[k] > query_times[k - 1])) throw ArgumentError("query times must be strictly increasing");
  }
  std::vector<KMSummaryRow> rows;
  rows.reserve(query_times.size());
  std::size_t step = 0;
  const KMStep* last = nullptr;
  for (double t : query_times) {
    KMSummaryRow row;
    row.query_time = t;
    row.n_risk = curve.n_risk_at(t);
    while (step < curve.steps.size() && curve.steps[step].time <= t) {
      row.n_event += curve.steps[step].n_event;
      last = &curve.steps[step];
      ++step;
    }
    if (last != nullptr) {
      row.survival = last->survival;
      row.std_error = last->std_error;
    }
    std::tie(row.ci_lower, row.ci_upper) = confidence_interval(row.survival, row.std_error, level);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", t);
  return buf;
}

}  // namespace

std::string format_km_table(const std::vector<KMSummaryRow>& rows, double level) {
  const auto pct = format_time(level * 100.0) + "%";
  std::ostringstream out;
  out << std::right << std::setw(6) << "time" << std::setw(8) << "n.risk" << std::setw(9) << "n.event"
      << std::setw(10) << "survival" << std::setw(11) << "std.error" << std::setw(14) << ("lower " + pct + " CI")
      << std::setw(14) << ("upper " + pct + " CI") << '\n';
  for (const auto& r : rows) {
    out << std::setw(6) << format_time(r.query_time) << std::setw(8) << r.n_risk << std::setw(9) << r.n_event
        << std::setw(10) << fixed(r.survival, 3) << std::setw(11) << fixed(r.std_error, 4) << std::setw(14)
        << fixed(r.ci_lower, 3) << std::setw(14) << fixed(r.ci_upper, 3) << '\n';
  }
  return out.str();
}

void write_km_summary_csv(const std::vector<KMSummaryRow>& rows, std::ostream& out) {
  out << "time,n_risk,n_event,survival,std_error,ci_lower,ci_upper\n";
  for (const auto& r : rows) {
    out << format_time(r.query_time) << ',' << r.n_risk << ',' << r.n_event << ',' << fixed(r.survival, 6) << ','
        << fixed(r.std_error, 6) << ',' << fixed(r.ci_lower, 6) << ',' << fixed(r.ci_upper, 6) << '\n';
  }
}

void write_km_curve_csv(const KMCurve& curve, std::ostream& out, double level) {
  out << "time,survival,ci_lower,ci_upper\n";
  out << "0,1.000000,1.000000,1.000000\n";
  for (const auto& s : curve.steps) {
    const auto [lo, hi] = confidence_interval(s.survival, s.std_error, level);
    out << format_time(s.time) << ',' << fixed(s.survival, 6) << ',' << fixed(lo, 6) << ',' << fixed(hi, 6) << '\n';
  }
}

}  // namespace survkit
