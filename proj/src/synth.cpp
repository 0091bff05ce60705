#include "survkit/synth.hpp"

#include <cmath>
#include <string>

#include "survkit/error.hpp"
#include "survkit/random.hpp"

namespace survkit {

SurvivalDataset table1_replica() {
  // 12 distinct events in (10, 50], nothing in (50, 101), events at
  // 101/102/103 (risk sets 10, 9, 8), one at 108, six censored at 120.
  std::vector<std::pair<int, int>> subjects;
  for (int t = 13; t <= 46; t += 3) subjects.emplace_back(t, 1);
  for (int t : {101, 102, 103, 108}) subjects.emplace_back(t, 1);
  for (int k = 0; k < 6; ++k) subjects.emplace_back(120, 0);

  std::vector<SurvivalRow> rows;
  rows.reserve(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    SurvivalRow r;
    r.id = "C" + std::to_string(i + 1);
    r.time = subjects[i].first;
    r.status = subjects[i].second;
    r.x = {static_cast<double>(i % 5) - 2.0, static_cast<double>((i * 7) % 11) / 10.0};
    rows.push_back(std::move(r));
  }
  return SurvivalDataset(std::move(rows), {"x1", "x2"});
}

SurvivalDataset generate_weibull(const WeibullConfig& cfg) {
  if (cfg.n < 2) throw ArgumentError("weibull generator: n must be >= 2");
  if (!(cfg.shape > 0.0) || !(cfg.scale > 0.0)) throw ArgumentError("weibull generator: shape and scale must be > 0");
  if (cfg.censor_time <= 0) throw ArgumentError("weibull generator: censor_time must be > 0");
  if (cfg.beta.empty()) throw ArgumentError("weibull generator: beta must have at least one entry");

  Rng rng(cfg.seed);
  const std::size_t p = cfg.beta.size();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));

  std::vector<SurvivalRow> rows;
  rows.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    SurvivalRow r;
    r.id = "S" + std::to_string(i + 1);
    r.x.resize(p);
    double eta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      r.x[j] = cfg.covariate_law == CovariateLaw::kStandardNormal ? rng.normal() : rng.uniform(-1.0, 1.0);
      eta += cfg.beta[j] * r.x[j];
    }
    const double u = rng.uniform();
    const double latent = cfg.scale * std::pow(-std::log(u) / std::exp(eta), 1.0 / cfg.shape);
    if (latent <= cfg.censor_time) {
      r.time = std::max(1, static_cast<int>(std::ceil(latent)));
      r.status = 1;
    } else {
      r.time = cfg.censor_time;
      r.status = 0;
    }
    rows.push_back(std::move(r));
  }
  return SurvivalDataset(std::move(rows), std::move(names));
}

}  // namespace survkit
