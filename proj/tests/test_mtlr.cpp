#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "survkit/mtlr.hpp"
#include "survkit/synth.hpp"

using namespace survkit;

namespace {

MtlrParams random_params(Rng& rng, std::size_t m, std::size_t p, double scale = 1.0) {
  auto params = MtlrParams::zeros(m, p);
  for (Eigen::Index i = 0; i < params.theta.size(); ++i) params.theta.data()[i] = scale * rng.normal();
  for (Eigen::Index i = 0; i < params.bias.size(); ++i) params.bias[i] = scale * rng.normal();
  return params;
}

MtlrModel model_from(const MtlrParams& params, std::vector<double> boundaries) {
  MtlrModel m;
  m.params = params;
  m.grid.boundaries = std::move(boundaries);
  for (Eigen::Index j = 0; j < params.theta.cols(); ++j) m.feature_names.push_back("x" + std::to_string(j + 1));
  return m;
}

// Probability of each interval outcome written out sequence by sequence:
// the score of "event in interval k" is sum over boundaries j >= k of
// theta_j . x + b_j.
std::vector<double> brute_sequence_probs(const MtlrParams& p, const std::vector<double>& x) {
  const auto m = static_cast<std::size_t>(p.theta.rows());
  std::vector<double> w(m + 1);
  double z = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    double score = 0.0;
    for (std::size_t j = k; j < m; ++j) {
      double a = p.bias[static_cast<Eigen::Index>(j)];
      for (std::size_t c = 0; c < x.size(); ++c) a += p.theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) * x[c];
      score += a;
    }
    w[k] = std::exp(score);
    z += w[k];
  }
  for (auto& v : w) v /= z;
  return w;
}

}  // namespace

TEST_CASE("time grid") {
  const auto three = oracle::make_dataset({10, 20, 30, 40}, {1, 1, 1, 0});
  CHECK(make_time_grid(three, 3).boundaries == std::vector<double>{10, 20, 30});
  CHECK(make_time_grid(three, 8).boundaries == std::vector<double>{10, 20, 30});

  const auto replica = table1_replica();
  const auto g = make_time_grid(replica, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.boundaries == std::vector<double>{19, 28, 34, 43, 102});
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(g.boundaries[j] > 10);
    CHECK(g.boundaries[j] <= 108);
    if (j > 0) CHECK(g.boundaries[j] > g.boundaries[j - 1]);
  }
  CHECK(g.interval_of(19) == 0);
  CHECK(g.interval_of(20) == 1);
  CHECK(g.interval_of(200) == 5);
}

TEST_CASE("zero parameters give a uniform distribution over sequences") {
  Rng rng(1);
  const auto ds = oracle::random_dataset(rng, 12, 2, 40);
  const auto grid = make_time_grid(ds, 4);
  const auto m = grid.size();
  const auto zero = MtlrParams::zeros(m, 2);
  std::size_t expected_events = 0;
  double expected = 0.0;
  for (const auto& r : ds.rows()) {
    const auto k = grid.interval_of(r.time);
    if (r.status == 1) {
      expected -= std::log(static_cast<double>(m + 1));
      ++expected_events;
    } else {
      expected += std::log(static_cast<double>(m + 1 - k)) - std::log(static_cast<double>(m + 1));
    }
  }
  CHECK(expected_events == ds.n_events());
  CHECK(mtlr_loglik(zero, grid, ds, 1.0).value == doctest::Approx(expected).epsilon(1e-12));

  // Censored beyond the last boundary: only the "survives everything" sequence.
  const auto late = oracle::make_dataset({5, 9, 50}, {1, 1, 0});
  const auto g2 = make_time_grid(late, 2);
  const auto single = oracle::make_dataset({50}, {0});
  CHECK(mtlr_loglik(MtlrParams::zeros(2, 1), g2, single, 1.0).value == doctest::Approx(-std::log(3.0)));
}

TEST_CASE("zero-parameter survival is exact") {
  for (std::size_t m = 1; m <= 12; ++m) {
    std::vector<double> b;
    for (std::size_t j = 1; j <= m; ++j) b.push_back(static_cast<double>(10 * j));
    const auto model = model_from(MtlrParams::zeros(m, 2), b);
    const std::vector<double> x{0.3, -2.0};
    const auto s = survival_curve(model, x);
    for (std::size_t j = 1; j <= m; ++j) {
      CHECK(s[j - 1] == static_cast<double>(m + 1 - j) / static_cast<double>(m + 1));
    }
  }
  auto one = MtlrParams::zeros(1, 1);
  one.theta(0, 0) = 2.0;
  one.bias[0] = -1.0;
  const std::vector<double> half{0.5};
  CHECK(survival_curve(model_from(one, {5}), half)[0] == 0.5);
}

TEST_CASE("sequence probabilities match enumeration and sum to one") {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 1 + rng.below(6);
    const auto params = random_params(rng, m, 3);
    const std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
    const auto probs = interval_probabilities(params, x);
    const auto ref = brute_sequence_probs(params, x);
    double total = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      CHECK(probs[k] == doctest::Approx(ref[k]).epsilon(1e-12));
      total += probs[k];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("likelihood gradient matches finite differences") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t m = 2 + rng.below(3);
    const std::size_t p = 1 + rng.below(2);
    const auto ds = oracle::random_dataset(rng, 10, p, 30, 0.6);
    if (ds.n_events() == 0) continue;
    auto grid = make_time_grid(ds, m);
    const auto params = random_params(rng, grid.size(), p, 0.7);
    const auto obj = mtlr_loglik(params, grid, ds, 0.8);

    const auto mm = params.theta.rows();
    const auto pp = params.theta.cols();
    Eigen::VectorXd flat(mm * pp + mm), grad(mm * pp + mm);
    for (Eigen::Index i = 0; i < mm * pp; ++i) {
      flat[i] = params.theta.data()[i];
      grad[i] = obj.gradient.theta.data()[i];
    }
    flat.tail(mm) = params.bias;
    grad.tail(mm) = obj.gradient.bias;
    auto f = [&](const Eigen::VectorXd& v) {
      MtlrParams q = params;
      for (Eigen::Index i = 0; i < mm * pp; ++i) q.theta.data()[i] = v[i];
      q.bias = v.tail(mm);
      return mtlr_loglik(q, grid, ds, 0.8).value;
    };
    CHECK(oracle::rel_error(grad, oracle::fd_gradient(f, flat)) < 1e-5);
  }
}

TEST_CASE("fitting ascends and is deterministic") {
  Rng rng(4);
  const auto ds = oracle::random_dataset(rng, 60, 2, 80);
  const auto grid = make_time_grid(ds, 6);
  const auto a = fit_mtlr(ds, grid, 1.0);
  const auto b = fit_mtlr(ds, grid, 1.0);
  CHECK(a.params.theta == b.params.theta);
  CHECK(a.params.bias == b.params.bias);
  for (std::size_t k = 1; k < a.objective_trace.size(); ++k) CHECK(a.objective_trace[k] >= a.objective_trace[k - 1]);
  CHECK(a.objective_trace.back() == doctest::Approx(mtlr_loglik(a.params, grid, ds, 1.0).value));
}

TEST_CASE("early-event feature gets positive early weights") {
  WeibullConfig cfg;
  cfg.n = 300;
  cfg.beta = {1.5, 0.0};
  cfg.shape = 1.5;
  cfg.scale = 80.0;
  cfg.seed = 9;
  const auto ds = generate_weibull(cfg);
  const auto model = fit_mtlr(ds, make_time_grid(ds, 5), 1.0);
  const auto wm = weight_matrix(model);
  CHECK(wm.values(0, 0) > 0.0);
  CHECK(wm.values(0, 1) > 0.0);
}

TEST_CASE("fitted survival curves are monotone") {
  Rng rng(5);
  const auto ds = oracle::random_dataset(rng, 80, 3, 100);
  const auto model = fit_mtlr(ds, make_time_grid(ds, 8), 0.5);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<double> x{3 * rng.normal(), 3 * rng.normal(), 3 * rng.normal()};
    const auto s = survival_curve(model, x);
    for (std::size_t j = 0; j < s.size(); ++j) {
      CHECK(s[j] >= 0.0);
      CHECK(s[j] <= 1.0);
      if (j > 0) CHECK(s[j] <= s[j - 1]);
    }
  }
}

TEST_CASE("large smoothing ties adjacent rows together") {
  Rng rng(6);
  const auto ds = oracle::random_dataset(rng, 60, 2, 60);
  const auto model = fit_mtlr(ds, make_time_grid(ds, 5), 1e6);
  const auto& th = model.params.theta;
  for (Eigen::Index j = 0; j + 1 < th.rows(); ++j) CHECK((th.row(j + 1) - th.row(j)).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("risk score") {
  Rng rng(7);
  const auto zero = model_from(MtlrParams::zeros(3, 2), {1, 2, 3});
  const std::vector<double> a{1.0, 2.0}, b{-4.0, 0.5};
  CHECK(risk_score(zero, a) == risk_score(zero, b));

  // Raising the first-interval bias lowers every S(tau_j).
  auto params = random_params(rng, 3, 2);
  const auto base = model_from(params, {1, 2, 3});
  params.bias[0] += 1.0;
  const auto lower = model_from(params, {1, 2, 3});
  const auto s0 = survival_curve(base, a);
  const auto s1 = survival_curve(lower, a);
  for (std::size_t j = 0; j < 3; ++j) CHECK(s1[j] <= s0[j]);
  CHECK(risk_score(lower, a) > risk_score(base, a));
}

TEST_CASE("weight matrix shape and CSV round trip") {
  Rng rng(8);
  auto model = model_from(random_params(rng, 3, 2), {12, 30, 77});
  const auto wm = weight_matrix(model);
  CHECK(wm.values.rows() == 3);
  CHECK(wm.values.cols() == 3);
  CHECK(wm.row_labels == std::vector<std::string>{"x1", "x2", "bias"});
  CHECK(wm.boundary_times == std::vector<double>{12, 30, 77});
  CHECK(wm.values(1, 2) == model.params.theta(2, 1));
  CHECK(wm.values(2, 0) == model.params.bias[0]);

  std::ostringstream out;
  write_weight_csv(wm, out);
  std::istringstream in(out.str());
  const auto back = read_weight_csv(in);
  CHECK(back.row_labels == wm.row_labels);
  CHECK(back.boundary_times == wm.boundary_times);
  CHECK(back.values == wm.values);
}

TEST_CASE("input validation") {
  const auto ds = oracle::make_dataset({3, 4}, {0, 0});
  CHECK_THROWS(make_time_grid(ds, 3));
  const auto ok = oracle::make_dataset({3, 4}, {1, 0});
  CHECK_THROWS(make_time_grid(ok, 0));
  CHECK_THROWS(fit_mtlr(ok, make_time_grid(ok, 1), 0.0));
}
