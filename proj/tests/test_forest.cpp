#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "survkit/forest.hpp"

using namespace survkit;

namespace {

std::unique_ptr<bool[]> mask(std::initializer_list<bool> v) {
  auto m = std::make_unique<bool[]>(v.size());
  std::copy(v.begin(), v.end(), m.get());
  return m;
}

SurvivalTree leaf_tree(std::vector<double> times, std::vector<double> values) {
  SurvivalTree t;
  t.nodes.emplace_back();
  t.nodes[0].chf.times = std::move(times);
  t.nodes[0].chf.values = std::move(values);
  return t;
}

RsfModel manual_forest(std::vector<SurvivalTree> trees, std::vector<double> grid, std::size_t p) {
  RsfModel m;
  m.trees = std::move(trees);
  m.event_grid = std::move(grid);
  for (std::size_t j = 0; j < p; ++j) m.feature_names.push_back("x" + std::to_string(j + 1));
  return m;
}

}  // namespace

TEST_CASE("log-rank hand oracle on four events") {
  const std::vector<double> t{1, 2, 3, 4};
  const std::vector<int> d{1, 1, 1, 1};
  const auto m = mask({true, true, false, false});
  const auto stat = logrank_statistic(t, d, std::span<const bool>(m.get(), 4));
  REQUIRE(stat.has_value());
  CHECK(*stat == doctest::Approx(7.0 / std::sqrt(17.0)).epsilon(1e-12));

  const auto flipped = mask({false, false, true, true});
  CHECK(*logrank_statistic(t, d, std::span<const bool>(flipped.get(), 4)) == doctest::Approx(*stat).epsilon(1e-14));
}

TEST_CASE("mirrored children give a zero statistic") {
  const std::vector<double> t{2, 5, 9, 2, 5, 9};
  const std::vector<int> d{1, 0, 1, 1, 0, 1};
  const auto m = mask({true, true, true, false, false, false});
  CHECK(*logrank_statistic(t, d, std::span<const bool>(m.get(), 6)) == 0.0);
}

TEST_CASE("empty child is not a split") {
  const std::vector<double> t{1, 2};
  const std::vector<int> d{1, 1};
  const auto m = mask({true, true});
  CHECK_FALSE(logrank_statistic(t, d, std::span<const bool>(m.get(), 2)).has_value());
}

TEST_CASE("split on a dataset column matches the mask form") {
  const auto ds = oracle::make_dataset({1, 2, 3, 4}, {1, 1, 1, 1}, {{0.1}, {0.2}, {0.9}, {1.3}});
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  CHECK(*logrank_split(ds, rows, 0, 0.5) == doctest::Approx(7.0 / std::sqrt(17.0)));
}

TEST_CASE("Nelson-Aalen matches the hand formula") {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto ds = oracle::random_dataset(rng, 15, 1, 8);
    const auto na = nelson_aalen(ds.times(), ds.statuses());
    const auto ref = oracle::brute_nelson_aalen(ds.times(), ds.statuses());
    REQUIRE(na.times.size() == ref.size());
    CHECK(na.initial == 0.0);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(na.times[k] == ref[k].first);
      CHECK(na.values[k] == doctest::Approx(ref[k].second).epsilon(1e-14));
    }
  }
}

TEST_CASE("stump forest reproduces the bootstrap Nelson-Aalen") {
  Rng data_rng(2);
  const auto ds = oracle::random_dataset(data_rng, 30, 2, 20);
  RsfConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 0;
  cfg.seed = 5;
  const auto model = fit_rsf(ds, cfg);
  REQUIRE(model.trees[0].nodes.size() == 1);

  Rng rng(tree_seed(5, 0));
  const auto boot = draw_bootstrap(ds.size(), rng);
  std::vector<double> t;
  std::vector<int> d;
  for (auto i : boot) {
    t.push_back(ds[i].time);
    d.push_back(ds[i].status);
  }
  const auto ref = oracle::brute_nelson_aalen(t, d);
  const auto chf = predict_chf(model, ds[0].x);
  for (std::size_t k = 0; k < chf.times.size(); ++k) {
    double expected = 0.0;
    for (const auto& [time, h] : ref) {
      if (time <= chf.times[k]) expected = h;
    }
    CHECK(chf.values[k] == doctest::Approx(expected).epsilon(1e-14));
  }
  // A constant model scores every input the same.
  CHECK(risk_score(model, ds[0].x) == risk_score(model, ds[1].x));
}

TEST_CASE("same seed gives bit-identical predictions") {
  Rng rng(3);
  const auto ds = oracle::random_dataset(rng, 60, 3, 50);
  RsfConfig cfg;
  cfg.n_trees = 20;
  cfg.seed = 11;
  const auto a = fit_rsf(ds, cfg);
  const auto b = fit_rsf(ds, cfg);
  for (const auto& r : ds.rows()) CHECK(risk_score(a, r.x) == risk_score(b, r.x));
}

TEST_CASE("strong step effect is found at the root") {
  Rng rng(4);
  std::vector<int> t, d;
  std::vector<std::vector<double>> x;
  for (int i = 0; i < 120; ++i) {
    const double f1 = rng.uniform();
    const double f2 = rng.uniform();
    const double f3 = rng.uniform();
    const int base = f1 > 0.5 ? 10 : 60;
    t.push_back(base + static_cast<int>(rng.below(15)));
    d.push_back(1);
    x.push_back({f1, f2, f3});
  }
  const auto ds = oracle::make_dataset(t, d, x);
  RsfConfig cfg;
  cfg.n_trees = 50;
  cfg.mtry = 3;
  cfg.seed = 8;
  const auto model = fit_rsf(ds, cfg);
  int on_first = 0;
  for (const auto& tree : model.trees) on_first += tree.nodes[0].feature == 0;
  CHECK(on_first >= 40);
}

TEST_CASE("identical trees average to either tree") {
  auto t = leaf_tree({2, 5}, {0.1, 0.4});
  const auto model = manual_forest({t, t}, {1, 2, 5, 7}, 1);
  const std::vector<double> x{0.0};
  const auto chf = predict_chf(model, x);
  CHECK(chf.values == std::vector<double>{0.0, 0.1, 0.4, 0.4});
}

TEST_CASE("all-censored leaf contributes nothing") {
  const std::vector<double> t{3, 4};
  const std::vector<int> d{0, 0};
  const auto empty = nelson_aalen(t, d);
  CHECK(empty.times.empty());
  SurvivalTree tree;
  tree.nodes.emplace_back();
  tree.nodes[0].chf = empty;
  const auto other = leaf_tree({2}, {0.5});
  const auto model = manual_forest({tree, other}, {2}, 1);
  const std::vector<double> x{1.0};
  CHECK(predict_chf(model, x).values[0] == doctest::Approx(0.25));
}

TEST_CASE("larger cumulative hazard means a larger score") {
  const auto low = manual_forest({leaf_tree({2, 4}, {0.1, 0.2})}, {2, 4}, 1);
  const auto high = manual_forest({leaf_tree({2, 4}, {0.1, 0.3})}, {2, 4}, 1);
  const std::vector<double> x{0.0};
  CHECK(risk_score(high, x) > risk_score(low, x));
}

TEST_CASE("ensemble CHF is monotone and leaves are valid") {
  Rng rng(5);
  const auto ds = oracle::random_dataset(rng, 80, 3, 60);
  RsfConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 3;
  const auto model = fit_rsf(ds, cfg);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<double> x{2 * rng.normal(), 2 * rng.normal(), 2 * rng.normal()};
    const auto chf = predict_chf(model, x);
    for (std::size_t k = 1; k < chf.values.size(); ++k) CHECK(chf.values[k] >= chf.values[k - 1]);
  }
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        for (std::size_t k = 0; k < node.chf.values.size(); ++k) {
          CHECK(node.chf.values[k] >= (k == 0 ? 0.0 : node.chf.values[k - 1]));
        }
      } else {
        CHECK(node.left > 0);
        CHECK(node.right > 0);
      }
    }
  }
}

TEST_CASE("leaf hazards equal Nelson-Aalen on the rows routed to them") {
  Rng data_rng(6);
  const auto ds = oracle::random_dataset(data_rng, 50, 2, 30);
  RsfConfig cfg;
  cfg.n_trees = 5;
  cfg.seed = 21;
  const auto model = fit_rsf(ds, cfg);
  for (std::size_t b = 0; b < model.trees.size(); ++b) {
    Rng rng(tree_seed(21, b));
    const auto boot = draw_bootstrap(ds.size(), rng);
    const auto& tree = model.trees[b];
    std::map<const TreeNode*, std::pair<std::vector<double>, std::vector<int>>> by_leaf;
    std::map<int, std::size_t> visits;
    for (auto i : boot) {
      auto& slot = by_leaf[&tree.leaf_for(ds[i].x)];
      slot.first.push_back(ds[i].time);
      slot.second.push_back(ds[i].status);
      // Count rows reaching each node to check that no child is empty.
      int node = 0;
      while (true) {
        ++visits[node];
        const auto& n = tree.nodes[static_cast<std::size_t>(node)];
        if (n.is_leaf()) break;
        node = ds[i].x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
      }
    }
    for (const auto& [leaf, rows] : by_leaf) {
      const auto ref = oracle::brute_nelson_aalen(rows.first, rows.second);
      REQUIRE(leaf->chf.times.size() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(leaf->chf.values[k] == doctest::Approx(ref[k].second));
    }
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) CHECK(visits[static_cast<int>(n)] > 0);
  }
}

TEST_CASE("bootstrap inclusion frequency") {
  const std::size_t n = 20;
  Rng rng(7);
  std::vector<int> included(n, 0);
  const int draws = 1000;
  for (int k = 0; k < draws; ++k) {
    const auto idx = draw_bootstrap(n, rng);
    REQUIRE(idx.size() == n);
    std::vector<bool> seen(n, false);
    for (auto i : idx) seen[i] = true;
    for (std::size_t i = 0; i < n; ++i) included[i] += seen[i];
  }
  const double p = 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(n));
  const double se = std::sqrt(p * (1.0 - p) / draws);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(included[i] / static_cast<double>(draws) - p) <= 3.0 * se);
}

TEST_CASE("mtry default and validation") {
  Rng rng(8);
  const auto ds = oracle::random_dataset(rng, 30, 5, 30);
  RsfConfig cfg;
  cfg.n_trees = 2;
  CHECK(fit_rsf(ds, cfg).config.mtry == 3);
  cfg.n_trees = 0;
  CHECK_THROWS(fit_rsf(ds, cfg));
}
