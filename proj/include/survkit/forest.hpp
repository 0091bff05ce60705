#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survkit/data.hpp"
#include "survkit/random.hpp"
#include "survkit/step_function.hpp"

namespace survkit {

// Absolute standardized two-sample log-rank statistic between the rows with
// in_left = true and the rest. nullopt when either side is empty.
std::optional<double> logrank_statistic(std::span<const double> times, std::span<const int> status,
                                        std::span<const bool> in_left);

// Split `rows` of `ds` at x[feature] <= threshold.
std::optional<double> logrank_split(const SurvivalDataset& ds, std::span<const std::size_t> rows, std::size_t feature,
                                    double threshold);

// Nelson-Aalen cumulative hazard sum d_j / n_j over the given rows (repeats
// count with multiplicity). Starts at 0.
StepFunction nelson_aalen(std::span<const double> times, std::span<const int> status);

struct TreeNode {
  // Internal nodes: feature/threshold and both children set; leaves: chf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  StepFunction chf;

  bool is_leaf() const noexcept { return left < 0; }
};

struct SurvivalTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  std::size_t depth() const;
};

struct RsfConfig {
  std::size_t n_trees = 200;
  std::size_t mtry = 0;  // 0 = ceil(sqrt(p))
  std::size_t min_node_events = 3;
  int max_depth = -1;    // -1 = unlimited
  std::uint64_t seed = 0;
};

struct RsfModel {
  std::vector<SurvivalTree> trees;
  std::vector<double> event_grid;  // sorted distinct training event times
  std::vector<std::string> feature_names;
  RsfConfig config;  // with mtry resolved
};

// Per-tree seed derived from the master seed by counter.
inline std::uint64_t tree_seed(std::uint64_t master, std::size_t tree) { return derive_seed(master, tree); }

// n row indices drawn with replacement.
std::vector<std::size_t> draw_bootstrap(std::size_t n, Rng& rng);

RsfModel fit_rsf(const SurvivalDataset& train, const RsfConfig& config = {});

// Ensemble-average cumulative hazard evaluated on the model's event grid.
StepFunction predict_chf(const RsfModel& model, std::span<const double> x);

// Mortality: the predicted cumulative hazard summed over the event grid.
double risk_score(const RsfModel& model, std::span<const double> x);

}  // namespace survkit
