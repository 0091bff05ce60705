#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "survkit/cox.hpp"
#include "survkit/error.hpp"
#include "survkit/forest.hpp"
#include "survkit/metrics.hpp"
#include "survkit/synth.hpp"

using namespace survkit;

namespace {

struct Instance {
  Eigen::MatrixXd x;
  std::vector<double> t;
  std::vector<int> d;
};

Instance random_instance(Rng& rng, std::size_t n, std::size_t p, int max_time) {
  Instance in;
  in.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    in.t.push_back(static_cast<double>(1 + rng.below(static_cast<std::uint64_t>(max_time))));
    in.d.push_back(rng.uniform() < 0.7);
    for (std::size_t j = 0; j < p; ++j) in.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
  }
  in.d[0] = 1;
  return in;
}

}  // namespace

TEST_CASE("log partial likelihood at zero with three events") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
  const std::vector<double> t{1, 2, 3};
  const std::vector<int> d{1, 1, 1};
  const auto pl = partial_loglik(Eigen::VectorXd::Zero(2), x, t, d);
  CHECK(pl.value == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("single subject gives zero") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const std::vector<double> t{5};
  const std::vector<int> d{1};
  const auto pl = partial_loglik(Eigen::VectorXd::Constant(1, 0.7), x, t, d);
  CHECK(pl.value == doctest::Approx(0.0));
}

TEST_CASE("Breslow value matches a direct sum") {
  Rng rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    const auto in = random_instance(rng, 9, 2, 5);
    Eigen::VectorXd beta(2);
    beta << rng.normal(), rng.normal();
    const Eigen::VectorXd eta = in.x * beta;
    const std::vector<double> e(eta.data(), eta.data() + eta.size());
    const auto pl = partial_loglik(beta, in.x, in.t, in.d, TieMethod::kBreslow);
    CHECK(pl.value == doctest::Approx(oracle::breslow_loglik(e, in.t, in.d)).epsilon(1e-12));
  }
}

TEST_CASE("gradient and Hessian match finite differences") {
  Rng rng(77);
  for (auto ties : {TieMethod::kEfron, TieMethod::kBreslow}) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto in = random_instance(rng, 4 + rng.below(8), 1 + rng.below(3), 6);
      Eigen::VectorXd beta(in.x.cols());
      for (auto& b : beta) b = rng.uniform(-1.0, 1.0);
      const auto pl = partial_loglik(beta, in.x, in.t, in.d, ties);
      auto f = [&](const Eigen::VectorXd& b) { return partial_loglik(b, in.x, in.t, in.d, ties).value; };
      CHECK(oracle::rel_error(pl.gradient, oracle::fd_gradient(f, beta)) < 1e-6);
      Eigen::MatrixXd fd_h(beta.size(), beta.size());
      for (Eigen::Index k = 0; k < beta.size(); ++k) {
        auto g = [&, k](const Eigen::VectorXd& b) { return partial_loglik(b, in.x, in.t, in.d, ties).gradient[k]; };
        fd_h.row(k) = oracle::fd_gradient(g, beta).transpose();
      }
      CHECK(oracle::rel_error(pl.hessian, fd_h) < 1e-4);
    }
  }
}

TEST_CASE("Hessian is negative semidefinite") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto in = random_instance(rng, 10, 3, 1000);
    Eigen::VectorXd beta = Eigen::VectorXd::Random(3);
    const auto pl = partial_loglik(beta, in.x, in.t, in.d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pl.hessian);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("Efron equals Breslow without tied event times") {
  Rng rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    auto in = random_instance(rng, 8, 2, 1000);
    for (std::size_t i = 0; i < in.t.size(); ++i) in.t[i] = static_cast<double>(i + 1);
    Eigen::VectorXd beta = Eigen::VectorXd::Random(2);
    const double a = partial_loglik(beta, in.x, in.t, in.d, TieMethod::kEfron).value;
    const double b = partial_loglik(beta, in.x, in.t, in.d, TieMethod::kBreslow).value;
    CHECK(std::abs(a - b) < 1e-12);
  }
}

TEST_CASE("recovers Weibull proportional-hazards coefficients") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    WeibullConfig cfg;
    cfg.n = 500;
    cfg.beta = {0.8, -0.5, 0.0};
    cfg.shape = 1.5;
    cfg.scale = 100.0;
    cfg.seed = seed;
    const auto model = fit_cox(generate_weibull(cfg));
    CHECK(model.converged);
    CHECK(std::abs(model.beta[0] - 0.8) < 0.15);
    CHECK(std::abs(model.beta[1] + 0.5) < 0.15);
    CHECK(std::abs(model.beta[2]) < 0.15);
  }
}

TEST_CASE("identical covariates force a zero coefficient") {
  const auto ds = oracle::make_dataset({3, 7}, {1, 1}, {{2.0}, {2.0}});
  const auto m = fit_cox(ds);
  CHECK(m.converged);
  CHECK(m.beta[0] == 0.0);
  const auto mixed = oracle::make_dataset({3, 7, 9, 4}, {1, 1, 0, 1}, {{1.0, 0.3}, {1.0, -1.0}, {1.0, 1.0}, {1.0, 0.1}});
  CHECK(fit_cox(mixed).beta[0] == 0.0);
}

TEST_CASE("two exchangeable subjects") {
  // Mirror-image groups: symmetry puts the optimum at zero.
  const auto sym = oracle::make_dataset({3, 7, 3, 7}, {1, 1, 1, 1}, {{1.0}, {1.0}, {-1.0}, {-1.0}});
  CHECK(std::abs(fit_cox(sym).beta[0]) < 1e-9);
}

TEST_CASE("matches a brute-force grid maximizer") {
  Rng rng(101);
  int checked = 0;
  for (int rep = 0; rep < 200 && checked < 40; ++rep) {
    const std::size_t n = 3 + rng.below(6);
    auto in = random_instance(rng, n, 1, 6);
    double best = -1e300, arg = 0.0;
    for (int k = -30000; k <= 30000; ++k) {
      Eigen::VectorXd b = Eigen::VectorXd::Constant(1, k * 1e-4);
      const double v = partial_loglik(b, in.x, in.t, in.d).value;
      if (v > best) {
        best = v;
        arg = b[0];
      }
    }
    if (std::abs(arg) > 2.9) continue;  // optimum not interior
    std::vector<int> ti(in.t.begin(), in.t.end());
    const auto ds = oracle::make_dataset(ti, in.d, {});
    std::vector<SurvivalRow> rows = ds.rows();
    for (std::size_t i = 0; i < n; ++i) rows[i].x = {in.x(static_cast<Eigen::Index>(i), 0)};
    try {
      const auto m = fit_cox(SurvivalDataset(rows, {"x1"}));
      CHECK(std::abs(m.beta[0] - arg) < 1e-3);
      ++checked;
    } catch (const InputError&) {
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("final log-likelihood matches the fitted beta") {
  Rng rng(8);
  const auto ds = oracle::random_dataset(rng, 60, 2, 50);
  const auto m = fit_cox(ds);
  CHECK(std::abs(m.final_loglik - partial_loglik(m.beta, ds).value) < 1e-9);
}

TEST_CASE("monotone likelihood is reported as divergence") {
  // Covariate perfectly orders the event times.
  const auto ds = oracle::make_dataset({1, 2, 3, 4, 5, 6}, {1, 1, 1, 1, 1, 1}, {{6}, {5}, {4}, {3}, {2}, {1}});
  try {
    fit_cox(ds);
    FAIL("expected divergence");
  } catch (const FitError& e) {
    CHECK(std::string(e.what()).find("unbounded") != std::string::npos);
  }
  CoxConfig ridge;
  ridge.ridge = 1.0;
  CHECK(fit_cox(ds, ridge).beta[0] > 0.0);
}

TEST_CASE("risk score") {
  CoxModel m;
  m.beta = Eigen::Vector2d(1.0, 2.0);
  const std::vector<double> x{3.0, -1.0};
  CHECK(risk_score(m, x) == doctest::Approx(1.0));
  const std::vector<double> zero{0.0, 0.0};
  CHECK(risk_score(m, zero) == 0.0);
}

TEST_CASE("translation leaves score differences unchanged") {
  Rng rng(13);
  const auto ds = oracle::random_dataset(rng, 40, 2, 60);
  std::vector<SurvivalRow> shifted = ds.rows();
  for (auto& r : shifted) {
    for (auto& v : r.x) v += 7.5;
  }
  const auto a = fit_cox(ds);
  const auto b = fit_cox(SurvivalDataset(shifted, ds.feature_names()));
  const double da = risk_score(a, ds[0].x) - risk_score(a, ds[1].x);
  const double db = risk_score(b, shifted[0].x) - risk_score(b, shifted[1].x);
  CHECK(da == doctest::Approx(db).epsilon(1e-8));
}

TEST_CASE("baseline hazard") {
  Rng rng(14);
  const auto ds = oracle::random_dataset(rng, 30, 1, 1000);
  CoxModel zero;
  zero.beta = Eigen::VectorXd::Zero(1);
  const auto h = baseline_cumhaz(zero, ds);
  const auto times = ds.times();
  const auto status = ds.statuses();
  const auto na = oracle::brute_nelson_aalen(times, status);
  REQUIRE(h.times.size() == na.size());
  for (std::size_t k = 0; k < na.size(); ++k) {
    CHECK(h.times[k] == na[k].first);
    CHECK(h.cum_hazard[k] == doctest::Approx(na[k].second).epsilon(1e-12));
  }

  const auto one = oracle::make_dataset({2, 5, 6, 9}, {0, 1, 0, 0});
  const auto h1 = baseline_cumhaz(zero, one);
  CHECK(h1.cum_hazard[0] == doctest::Approx(1.0 / 3.0));

  for (int rep = 0; rep < 100; ++rep) {
    const auto r = oracle::random_dataset(rng, 20, 2, 30);
    if (r.n_events() < 2) continue;
    CoxModel m;
    m.beta = Eigen::Vector2d(rng.normal(), rng.normal());
    const auto bh = baseline_cumhaz(m, r);
    for (std::size_t k = 0; k < bh.cum_hazard.size(); ++k) {
      const double prev = k == 0 ? 0.0 : bh.cum_hazard[k - 1];
      CHECK(bh.cum_hazard[k] > prev);
    }
  }
}

TEST_CASE("survival curve") {
  Rng rng(15);
  const auto ds = oracle::random_dataset(rng, 50, 1, 40);
  const auto m = fit_cox(ds);
  REQUIRE(m.baseline.has_value());
  const std::vector<double> x0{0.0};
  const auto s0 = survival_curve(m, x0);
  for (std::size_t k = 0; k < s0.times.size(); ++k) {
    CHECK(s0.values[k] == doctest::Approx(std::exp(-m.baseline->cum_hazard[k])));
  }
  CHECK(s0.at(0.5) == 1.0);
  const double sign = m.beta[0] >= 0 ? 1.0 : -1.0;
  const std::vector<double> hi{sign * 2.0};
  const auto s_hi = survival_curve(m, hi);
  for (std::size_t k = 0; k < s0.times.size(); ++k) CHECK(s_hi.values[k] <= s0.values[k]);

  CoxModel bare = m;
  bare.baseline.reset();
  CHECK_THROWS_AS(survival_curve(bare, x0), StateError);
}

TEST_CASE("covariate scale does not change the test C-index after standardization") {
  WeibullConfig cfg;
  cfg.n = 200;
  cfg.beta = {0.7, -0.4};
  cfg.shape = 1.5;
  cfg.scale = 100.0;
  cfg.seed = 3;
  const auto ds = generate_weibull(cfg);
  std::vector<SurvivalRow> scaled = ds.rows();
  for (auto& r : scaled) {
    for (auto& v : r.x) v *= 37.0;
  }
  auto c_of = [](const SurvivalDataset& data) {
    const auto split = train_test_split(data, 0.7, 5);
    const auto s = standardize(split.train, split.test);
    const auto m = fit_cox(s.train);
    std::vector<double> scores;
    for (const auto& r : s.test.rows()) scores.push_back(risk_score(m, r.x));
    return c_index(s.test.times(), s.test.statuses(), scores).c_index;
  };
  CHECK(std::abs(c_of(ds) - c_of(SurvivalDataset(scaled, ds.feature_names()))) < 1e-12);
}

TEST_CASE("too few events") {
  CHECK_THROWS_AS(fit_cox(oracle::make_dataset({3, 4, 5}, {1, 0, 0})), ValidationError);
}
