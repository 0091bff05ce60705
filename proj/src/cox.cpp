#include "survkit/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "survkit/error.hpp"

namespace survkit {

namespace {

std::vector<std::size_t> order_by_time_desc(std::span<const double> times) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] > times[b]; });
  return order;
}

// Columns that take more than one value; constant columns carry no
// information in the partial likelihood and keep a zero coefficient.
std::vector<Eigen::Index> varying_columns(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (x.col(j).maxCoeff() > x.col(j).minCoeff()) cols.push_back(j);
  }
  return cols;
}

}  // namespace

PartialLikelihood partial_loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                 std::span<const double> times, std::span<const int> status, TieMethod ties) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index p = x.cols();
  if (beta.size() != p) throw ArgumentError("partial_loglik: beta has wrong dimension");
  if (times.size() != n || status.size() != n) throw ArgumentError("partial_loglik: length mismatch");
  if (std::none_of(status.begin(), status.end(), [](int s) { return s == 1; })) {
    throw ArgumentError("partial_loglik: no events");
  }

  const Eigen::VectorXd eta = x * beta;
  const double shift = eta.maxCoeff();
  const Eigen::VectorXd w = (eta.array() - shift).exp();

  PartialLikelihood out;
  out.gradient = Eigen::VectorXd::Zero(p);
  out.hessian = Eigen::MatrixXd::Zero(p, p);

  // Risk-set sums accumulated from the latest time backwards.
  double r0 = 0.0;
  Eigen::VectorXd r1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(p, p);

  const auto order = order_by_time_desc(times);
  std::size_t k = 0;
  while (k < n) {
    const double t = times[order[k]];
    double t0 = 0.0;
    Eigen::VectorXd t1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd x_events = Eigen::VectorXd::Zero(p);
    double eta_events = 0.0;
    int d = 0;
    for (; k < n && times[order[k]] == t; ++k) {
      const auto i = order[k];
      const auto xi = x.row(static_cast<Eigen::Index>(i)).transpose();
      r0 += w[i];
      r1 += w[i] * xi;
      r2.noalias() += w[i] * xi * xi.transpose();
      if (status[i] == 1) {
        ++d;
        t0 += w[i];
        t1 += w[i] * xi;
        t2.noalias() += w[i] * xi * xi.transpose();
        x_events += xi;
        eta_events += eta[i];
      }
    }
    if (d == 0) continue;

    out.value += eta_events;
    out.gradient += x_events;
    for (int l = 0; l < d; ++l) {
      const double frac = ties == TieMethod::kEfron ? static_cast<double>(l) / d : 0.0;
      const double den = r0 - frac * t0;
      const Eigen::VectorXd num1 = r1 - frac * t1;
      const Eigen::MatrixXd num2 = r2 - frac * t2;
      out.value -= std::log(den) + shift;
      out.gradient -= num1 / den;
      out.hessian -= num2 / den - num1 * num1.transpose() / (den * den);
    }
  }
  return out;
}

PartialLikelihood partial_loglik(const Eigen::VectorXd& beta, const SurvivalDataset& ds, TieMethod ties) {
  const auto t = ds.times();
  const auto s = ds.statuses();
  return partial_loglik(beta, ds.design(), t, s, ties);
}

CoxModel fit_cox(const SurvivalDataset& train, const CoxConfig& config) {
  if (config.max_iter < 1) throw ArgumentError("fit_cox: max_iter must be >= 1");
  if (config.ridge < 0.0) throw ArgumentError("fit_cox: ridge must be >= 0");
  if (train.n_events() < 2) throw ValidationError("fit_cox: at least 2 events are required");
  const Eigen::MatrixXd full_x = train.design();
  const auto active = varying_columns(full_x);
  const Eigen::MatrixXd x = full_x(Eigen::all, active);
  const auto times = train.times();
  const auto status = train.statuses();
  const Eigen::Index p = x.cols();

  auto penalized = [&](const Eigen::VectorXd& b) {
    auto pl = partial_loglik(b, x, times, status, config.ties);
    if (config.ridge > 0.0) {
      pl.value -= 0.5 * config.ridge * b.squaredNorm();
      pl.gradient -= config.ridge * b;
      pl.hessian.diagonal().array() -= config.ridge;
    }
    return pl;
  };

  CoxModel model;
  model.feature_names = train.feature_names();
  model.beta = Eigen::VectorXd::Zero(p);
  auto current = penalized(model.beta);

  constexpr double kGradTol = 1e-8;
  constexpr double kDivergence = 20.0;
  constexpr int kMaxHalvings = 10;

  if (p == 0) model.converged = true;
  for (int iter = 1; iter <= config.max_iter && !model.converged; ++iter) {
    if (current.gradient.cwiseAbs().maxCoeff() < kGradTol) {
      model.converged = true;
      break;
    }
    model.iterations = iter;
    const Eigen::MatrixXd information = -current.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      step = ldlt.solve(current.gradient);
    }
    if (step.size() != p || !step.allFinite()) step = current.gradient;

    Eigen::VectorXd candidate = model.beta + step;
    auto next = penalized(candidate);
    int halvings = 0;
    while ((!std::isfinite(next.value) || next.value < current.value) && halvings < kMaxHalvings) {
      step *= 0.5;
      candidate = model.beta + step;
      next = penalized(candidate);
      ++halvings;
    }
    if (!std::isfinite(next.value) || next.value < current.value) {
      // No ascent direction left at working precision.
      model.converged = true;
      break;
    }
    const double delta = next.value - current.value;
    model.beta = candidate;
    current = std::move(next);
    if (model.beta.cwiseAbs().maxCoeff() > kDivergence) {
      throw FitError("monotone partial likelihood; coefficient unbounded");
    }
    if (std::abs(delta) < config.tol) {
      model.converged = true;
      break;
    }
  }
  if (!model.converged && current.gradient.cwiseAbs().maxCoeff() < kGradTol) model.converged = true;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(full_x.cols());
  for (std::size_t k = 0; k < active.size(); ++k) beta[active[k]] = model.beta[static_cast<Eigen::Index>(k)];
  model.beta = std::move(beta);
  model.final_loglik = partial_loglik(model.beta, full_x, times, status, config.ties).value;
  model.baseline = baseline_cumhaz(model, train);
  return model;
}

double risk_score(const CoxModel& model, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(model.beta.size())) {
    throw ArgumentError("risk_score: expected " + std::to_string(model.beta.size()) + " covariates, got " +
                        std::to_string(x.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())).dot(model.beta);
}

BaselineHazard baseline_cumhaz(const CoxModel& model, const SurvivalDataset& train) {
  if (train.n_features() != static_cast<std::size_t>(model.beta.size())) {
    throw ArgumentError("baseline_cumhaz: dataset and model disagree on the number of covariates");
  }
  const Eigen::MatrixXd x = train.design();
  const Eigen::VectorXd w = (x * model.beta).array().exp();
  const auto times = train.times();
  const auto status = train.statuses();
  const auto order = order_by_time_desc(times);

  // Walk backwards collecting (time, events, risk sum), then accumulate forwards.
  struct Group {
    double time;
    int events;
    double risk;
  };
  std::vector<Group> groups;
  double risk = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double t = times[order[k]];
    int d = 0;
    for (; k < order.size() && times[order[k]] == t; ++k) {
      risk += w[static_cast<Eigen::Index>(order[k])];
      d += status[order[k]];
    }
    if (d > 0) groups.push_back({t, d, risk});
  }
  std::reverse(groups.begin(), groups.end());

  BaselineHazard out;
  double cum = 0.0;
  for (const auto& g : groups) {
    cum += g.events / g.risk;
    out.times.push_back(g.time);
    out.cum_hazard.push_back(cum);
  }
  return out;
}

StepFunction survival_curve(const CoxModel& model, std::span<const double> x) {
  if (!model.baseline) throw StateError("survival_curve: model has no baseline hazard");
  const double hr = std::exp(risk_score(model, x));
  StepFunction s;
  s.initial = 1.0;
  s.times = model.baseline->times;
  s.values.reserve(s.times.size());
  for (double h : model.baseline->cum_hazard) s.values.push_back(std::exp(-h * hr));
  return s;
}

}  // namespace survkit
