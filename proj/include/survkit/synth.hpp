#pragma once

#include <cstdint>
#include <vector>

#include "survkit/data.hpp"

namespace survkit {

// 22-subject cohort whose product-limit summary at months
// 10, 50, 80, 105, 108, 111 reproduces the Kaplan-Meier table in docs/reference_values.md.
SurvivalDataset table1_replica();

enum class CovariateLaw { kStandardNormal, kUniform };

struct WeibullConfig {
  std::size_t n = 100;
  std::vector<double> beta;  // one entry per covariate
  double shape = 1.0;        // k
  double scale = 100.0;      // lambda
  int censor_time = 120;     // administrative cutoff, months
  CovariateLaw covariate_law = CovariateLaw::kStandardNormal;
  std::uint64_t seed = 0;
};

// Proportional-hazards Weibull draws by inverse transform; observed time is
// min(ceil(T), censor_time), status 1 iff T <= censor_time.
SurvivalDataset generate_weibull(const WeibullConfig& cfg);

}  // namespace survkit
