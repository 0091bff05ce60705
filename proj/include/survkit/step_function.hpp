#pragma once

#include <algorithm>
#include <vector>

namespace survkit {

// Right-continuous step function: value `initial` before times.front(),
// values[i] on [times[i], times[i+1]).
struct StepFunction {
  std::vector<double> times;
  std::vector<double> values;
  double initial = 0.0;

  double at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return initial;
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  }
};

}  // namespace survkit
