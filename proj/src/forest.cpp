#include "survkit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "survkit/error.hpp"

namespace survkit {

namespace {

// Rows of one node grouped by distinct observed time (ascending).
struct TimeGroups {
  std::vector<double> times;
  std::vector<int> group_of;  // per node row
  std::vector<int> count;     // rows per group
  std::vector<int> events;    // events per group
};

TimeGroups group_by_time(std::span<const double> times, std::span<const int> status) {
  TimeGroups g;
  g.times.assign(times.begin(), times.end());
  std::sort(g.times.begin(), g.times.end());
  g.times.erase(std::unique(g.times.begin(), g.times.end()), g.times.end());
  g.count.assign(g.times.size(), 0);
  g.events.assign(g.times.size(), 0);
  g.group_of.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto k = static_cast<int>(std::lower_bound(g.times.begin(), g.times.end(), times[i]) - g.times.begin());
    g.group_of[i] = k;
    ++g.count[static_cast<std::size_t>(k)];
    g.events[static_cast<std::size_t>(k)] += status[i];
  }
  return g;
}

// Log-rank statistic from per-group left-side counts.
double logrank_from_counts(const TimeGroups& g, std::span<const int> left_count, std::span<const int> left_events) {
  double u = 0.0;
  double v = 0.0;
  int at_risk = 0;
  int left_at_risk = 0;
  for (std::size_t k = g.times.size(); k-- > 0;) {
    at_risk += g.count[k];
    left_at_risk += left_count[k];
    const int d = g.events[k];
    if (d == 0) continue;
    const double n = at_risk;
    const double n1 = left_at_risk;
    u += left_events[k] - n1 * d / n;
    if (at_risk > 1) v += (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0) * d;
  }
  if (v <= 0.0) return 0.0;
  return std::abs(u) / std::sqrt(v);
}

}  // namespace

std::optional<double> logrank_statistic(std::span<const double> times, std::span<const int> status,
                                        std::span<const bool> in_left) {
  if (times.size() != status.size() || times.size() != in_left.size()) {
    throw ArgumentError("logrank_statistic: length mismatch");
  }
  const auto n_left = std::count(in_left.begin(), in_left.end(), true);
  if (n_left == 0 || n_left == static_cast<std::ptrdiff_t>(in_left.size())) return std::nullopt;
  const auto g = group_by_time(times, status);
  std::vector<int> lc(g.times.size(), 0), le(g.times.size(), 0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!in_left[i]) continue;
    ++lc[static_cast<std::size_t>(g.group_of[i])];
    le[static_cast<std::size_t>(g.group_of[i])] += status[i];
  }
  return logrank_from_counts(g, lc, le);
}

std::optional<double> logrank_split(const SurvivalDataset& ds, std::span<const std::size_t> rows, std::size_t feature,
                                    double threshold) {
  if (feature >= ds.n_features()) throw ArgumentError("logrank_split: feature index out of range");
  std::vector<double> t;
  std::vector<int> s;
  // std::vector<bool> has no contiguous storage to view as a span.
  const auto left = std::make_unique<bool[]>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = ds[rows[i]];
    t.push_back(row.time);
    s.push_back(row.status);
    left[i] = row.x[feature] <= threshold;
  }
  return logrank_statistic(t, s, std::span<const bool>(left.get(), rows.size()));
}

StepFunction nelson_aalen(std::span<const double> times, std::span<const int> status) {
  StepFunction chf;
  chf.initial = 0.0;
  if (times.empty()) return chf;
  const auto g = group_by_time(times, status);
  int at_risk = static_cast<int>(times.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < g.times.size(); ++k) {
    if (g.events[k] > 0) {
      cum += static_cast<double>(g.events[k]) / at_risk;
      chf.times.push_back(g.times[k]);
      chf.values.push_back(cum);
    }
    at_risk -= g.count[k];
  }
  return chf;
}

const TreeNode& SurvivalTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                                         : node->right)];
  }
  return *node;
}

std::size_t SurvivalTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
    d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

std::vector<std::size_t> draw_bootstrap(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
  return idx;
}

namespace {

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double statistic = 0.0;
};

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, std::span<const double> times, std::span<const int> status,
             const RsfConfig& cfg, Rng& rng)
      : x_(x), times_(times), status_(status), cfg_(cfg), rng_(rng) {}

  SurvivalTree grow(std::vector<std::size_t> rows) {
    SurvivalTree tree;
    tree.nodes.emplace_back();
    // Depth-first with an explicit stack; children are appended in order.
    struct Pending {
      std::size_t node;
      std::vector<std::size_t> rows;
      int depth;
    };
    std::vector<Pending> stack;
    stack.push_back({0, std::move(rows), 0});
    while (!stack.empty()) {
      Pending cur = std::move(stack.back());
      stack.pop_back();
      const auto split = choose_split(cur.rows, cur.depth);
      if (!split) {
        tree.nodes[cur.node].chf = leaf_chf(cur.rows);
        continue;
      }
      std::vector<std::size_t> left, right;
      for (auto r : cur.rows) {
        (x_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(split->feature)) <= split->threshold ? left
                                                                                                          : right)
            .push_back(r);
      }
      const auto l = tree.nodes.size();
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[cur.node];
      node.feature = static_cast<int>(split->feature);
      node.threshold = split->threshold;
      node.left = static_cast<int>(l);
      node.right = static_cast<int>(l + 1);
      stack.push_back({l + 1, std::move(right), cur.depth + 1});
      stack.push_back({l, std::move(left), cur.depth + 1});
    }
    return tree;
  }

 private:
  StepFunction leaf_chf(const std::vector<std::size_t>& rows) const {
    std::vector<double> t;
    std::vector<int> s;
    for (auto r : rows) {
      t.push_back(times_[r]);
      s.push_back(status_[r]);
    }
    return nelson_aalen(t, s);
  }

  std::optional<SplitChoice> choose_split(const std::vector<std::size_t>& rows, int depth) {
    if (cfg_.max_depth >= 0 && depth >= cfg_.max_depth) return std::nullopt;
    std::size_t events = 0;
    for (auto r : rows) events += static_cast<std::size_t>(status_[r]);
    if (events < cfg_.min_node_events || rows.size() < 2) return std::nullopt;

    const auto p = static_cast<std::size_t>(x_.cols());
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    // Partial Fisher-Yates: the first mtry entries form the sample.
    for (std::size_t i = 0; i < cfg_.mtry; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(p - i));
      std::swap(features[i], features[j]);
    }
    features.resize(cfg_.mtry);
    std::sort(features.begin(), features.end());

    std::vector<double> t;
    std::vector<int> s;
    for (auto r : rows) {
      t.push_back(times_[r]);
      s.push_back(status_[r]);
    }
    const auto groups = group_by_time(t, s);
    std::vector<int> lc(groups.times.size()), le(groups.times.size());
    std::vector<std::size_t> by_value(rows.size());

    std::optional<SplitChoice> best;
    for (auto f : features) {
      const auto col = static_cast<Eigen::Index>(f);
      std::iota(by_value.begin(), by_value.end(), std::size_t{0});
      std::stable_sort(by_value.begin(), by_value.end(), [&](auto a, auto b) {
        return x_(static_cast<Eigen::Index>(rows[a]), col) < x_(static_cast<Eigen::Index>(rows[b]), col);
      });
      std::fill(lc.begin(), lc.end(), 0);
      std::fill(le.begin(), le.end(), 0);
      // Sweep thresholds upward, moving rows into the left child.
      std::size_t k = 0;
      while (k < by_value.size()) {
        const double v = x_(static_cast<Eigen::Index>(rows[by_value[k]]), col);
        for (; k < by_value.size() && x_(static_cast<Eigen::Index>(rows[by_value[k]]), col) == v; ++k) {
          const auto g = static_cast<std::size_t>(groups.group_of[by_value[k]]);
          ++lc[g];
          le[g] += s[by_value[k]];
        }
        if (k == by_value.size()) break;
        const double next = x_(static_cast<Eigen::Index>(rows[by_value[k]]), col);
        const double stat = logrank_from_counts(groups, lc, le);
        if (!best || stat > best->statistic) best = SplitChoice{f, 0.5 * (v + next), stat};
      }
    }
    if (!best || !(best->statistic > 0.0)) return std::nullopt;
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const double> times_;
  std::span<const int> status_;
  const RsfConfig& cfg_;
  Rng& rng_;
};

}  // namespace

RsfModel fit_rsf(const SurvivalDataset& train, const RsfConfig& config) {
  if (config.n_trees == 0) throw ArgumentError("fit_rsf: n_trees must be >= 1");
  if (train.n_events() == 0) throw ArgumentError("fit_rsf: no events");
  const Eigen::MatrixXd x = train.design();
  const auto times = train.times();
  const auto status = train.statuses();
  const std::size_t p = train.n_features();
  if (p == 0) throw ArgumentError("fit_rsf: no covariates");

  RsfModel model;
  model.config = config;
  if (model.config.mtry == 0) model.config.mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  model.config.mtry = std::min(model.config.mtry, p);
  model.feature_names = train.feature_names();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (status[i] == 1) model.event_grid.push_back(times[i]);
  }
  std::sort(model.event_grid.begin(), model.event_grid.end());
  model.event_grid.erase(std::unique(model.event_grid.begin(), model.event_grid.end()), model.event_grid.end());

  model.trees.reserve(config.n_trees);
  for (std::size_t b = 0; b < config.n_trees; ++b) {
    Rng rng(tree_seed(config.seed, b));
    auto rows = draw_bootstrap(train.size(), rng);
    TreeGrower grower(x, times, status, model.config, rng);
    model.trees.push_back(grower.grow(std::move(rows)));
  }
  return model;
}

StepFunction predict_chf(const RsfModel& model, std::span<const double> x) {
  if (x.size() != model.feature_names.size()) throw ArgumentError("predict_chf: covariate dimension mismatch");
  StepFunction out;
  out.initial = 0.0;
  out.times = model.event_grid;
  out.values.assign(model.event_grid.size(), 0.0);
  for (const auto& tree : model.trees) {
    const auto& chf = tree.leaf_for(x).chf;
    for (std::size_t k = 0; k < out.times.size(); ++k) out.values[k] += chf.at(out.times[k]);
  }
  const double b = static_cast<double>(model.trees.size());
  for (auto& v : out.values) v /= b;
  return out;
}

double risk_score(const RsfModel& model, std::span<const double> x) {
  const auto chf = predict_chf(model, x);
  return std::accumulate(chf.values.begin(), chf.values.end(), 0.0);
}

}  // namespace survkit
