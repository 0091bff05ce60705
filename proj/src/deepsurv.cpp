#include "survkit/deepsurv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survkit/error.hpp"
#include "survkit/random.hpp"

namespace survkit {

void NetworkSpec::validate() const {
  for (auto w : hidden_sizes) {
    if (w == 0) throw ArgumentError("hidden layer widths must be >= 1");
  }
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ArgumentError("weight_decay must be >= 0");
}

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::kRelu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative expressed through pre-activation z and activation output h.
Eigen::MatrixXd activation_slope(const Eigen::MatrixXd& z, const Eigen::MatrixXd& h, Activation a) {
  if (a == Activation::kRelu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - h.array().square()).matrix();
}

}  // namespace

double forward(const DeepSurvModel& model, std::span<const double> x) {
  if (x.size() != model.n_inputs()) {
    throw ArgumentError("forward: expected " + std::to_string(model.n_inputs()) + " covariates, got " +
                        std::to_string(x.size()));
  }
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::VectorXd z = layer.weights * h + layer.bias;
    if (l + 1 < model.layers.size()) h = activate(z, model.spec.activation);
    else h = std::move(z);
  }
  return h[0];
}

CoxLoss cox_loss(std::span<const double> etas, std::span<const double> times, std::span<const int> status) {
  const std::size_t n = etas.size();
  if (times.size() != n || status.size() != n) throw ArgumentError("cox_loss: length mismatch");
  if (std::none_of(status.begin(), status.end(), [](int s) { return s == 1; })) {
    throw ArgumentError("cox_loss: no events");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });

  const double shift = *std::max_element(etas.begin(), etas.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(etas[i] - shift);

  // Risk sum per time group, from the latest time backwards.
  std::vector<double> risk_at(n);
  double risk = 0.0;
  for (std::size_t k = n; k > 0;) {
    std::size_t start = k - 1;
    while (start > 0 && times[order[start - 1]] == times[order[k - 1]]) --start;
    for (std::size_t q = start; q < k; ++q) risk += w[order[q]];
    for (std::size_t q = start; q < k; ++q) risk_at[q] = risk;
    k = start;
  }

  CoxLoss out;
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double inv_risk_cum = 0.0;  // sum over events with time <= current of 1/R
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    while (end < n && times[order[end]] == times[order[k]]) ++end;
    for (std::size_t q = k; q < end; ++q) {
      const auto i = order[q];
      if (status[i] == 1) {
        out.value -= etas[i] - (std::log(risk_at[q]) + shift);
        inv_risk_cum += 1.0 / risk_at[q];
      }
    }
    for (std::size_t q = k; q < end; ++q) {
      const auto i = order[q];
      out.gradient[static_cast<Eigen::Index>(i)] = w[i] * inv_risk_cum - status[i];
    }
    k = end;
  }
  return out;
}

DeepSurvModel init_network(const NetworkSpec& spec, std::size_t n_inputs) {
  spec.validate();
  if (n_inputs == 0) throw ArgumentError("network needs at least one input");
  DeepSurvModel model;
  model.spec = spec;
  Rng rng(spec.seed);
  std::size_t fan_in = n_inputs;
  auto add_layer = [&](std::size_t out) {
    DenseLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    layer.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
    model.layers.push_back(std::move(layer));
    fan_in = out;
  };
  for (auto w : spec.hidden_sizes) add_layer(w);
  add_layer(1);
  return model;
}

TrainingObjective training_objective(const std::vector<DenseLayer>& layers, Activation activation, double weight_decay,
                                     const Eigen::MatrixXd& x, std::span<const double> times,
                                     std::span<const int> status) {
  const std::size_t depth = layers.size();
  // pre[l] and post[l] hold layer l's pre-activation and output, row per subject.
  std::vector<Eigen::MatrixXd> pre(depth), post(depth);
  const Eigen::MatrixXd* input = &x;
  for (std::size_t l = 0; l < depth; ++l) {
    pre[l] = (*input) * layers[l].weights.transpose();
    pre[l].rowwise() += layers[l].bias.transpose();
    post[l] = l + 1 < depth ? activate(pre[l], activation) : pre[l];
    input = &post[l];
  }
  const Eigen::VectorXd eta = post.back().col(0);
  const auto loss = cox_loss(std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())), times, status);

  TrainingObjective out;
  out.value = loss.value;
  out.gradient.resize(depth);
  Eigen::MatrixXd delta = loss.gradient;  // n x 1
  for (std::size_t l = depth; l-- > 0;) {
    const Eigen::MatrixXd& below = l == 0 ? x : post[l - 1];
    out.gradient[l].weights = delta.transpose() * below;
    out.gradient[l].bias = delta.colwise().sum().transpose();
    if (weight_decay > 0.0) {
      out.value += weight_decay * layers[l].weights.squaredNorm();
      out.gradient[l].weights += 2.0 * weight_decay * layers[l].weights;
    }
    if (l > 0) {
      delta = (delta * layers[l].weights).cwiseProduct(activation_slope(pre[l - 1], post[l - 1], activation));
    }
  }
  return out;
}

namespace {

struct AdamState {
  std::vector<DenseLayer> m, v;
};

bool all_finite(const std::vector<DenseLayer>& g) {
  return std::all_of(g.begin(), g.end(),
                     [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

}  // namespace

DeepSurvModel fit_deepsurv(const SurvivalDataset& train, const NetworkSpec& spec) {
  spec.validate();
  if (train.n_events() < 2) throw ValidationError("fit_deepsurv: at least 2 events are required");
  const Eigen::MatrixXd x = train.design();
  const auto times = train.times();
  const auto status = train.statuses();

  DeepSurvModel model = init_network(spec, train.n_features());
  model.feature_names = train.feature_names();

  auto current = training_objective(model.layers, spec.activation, spec.weight_decay, x, times, status);
  if (!std::isfinite(current.value) || !all_finite(current.gradient)) {
    throw FitError("training diverged; reduce learning_rate");
  }
  model.training_loss_trace.push_back(current.value);

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  constexpr int kMaxRejections = 30;

  AdamState adam;
  for (const auto& l : model.layers) {
    adam.m.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    adam.v.push_back(adam.m.back());
  }
  double scale = 1.0;

  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    const double c1 = 1.0 - std::pow(kBeta1, epoch);
    const double c2 = 1.0 - std::pow(kBeta2, epoch);
    std::vector<DenseLayer> direction(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& g = current.gradient[l];
      adam.m[l].weights = kBeta1 * adam.m[l].weights + (1.0 - kBeta1) * g.weights;
      adam.m[l].bias = kBeta1 * adam.m[l].bias + (1.0 - kBeta1) * g.bias;
      adam.v[l].weights = kBeta2 * adam.v[l].weights + (1.0 - kBeta2) * g.weights.cwiseAbs2();
      adam.v[l].bias = kBeta2 * adam.v[l].bias + (1.0 - kBeta2) * g.bias.cwiseAbs2();
      direction[l].weights =
          (adam.m[l].weights / c1).array() / ((adam.v[l].weights / c2).array().sqrt() + kEps);
      direction[l].bias = (adam.m[l].bias / c1).array() / ((adam.v[l].bias / c2).array().sqrt() + kEps);
    }

    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      std::vector<DenseLayer> candidate = model.layers;
      const double rate = spec.learning_rate * scale;
      for (std::size_t l = 0; l < candidate.size(); ++l) {
        candidate[l].weights -= rate * direction[l].weights;
        candidate[l].bias -= rate * direction[l].bias;
      }
      auto next = training_objective(candidate, spec.activation, spec.weight_decay, x, times, status);
      if (std::isfinite(next.value) && all_finite(next.gradient) && next.value <= current.value) {
        model.layers = std::move(candidate);
        current = std::move(next);
        accepted = true;
        scale = std::min(1.0, scale * 2.0);
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // no descent at any tried rate: stationary
    model.training_loss_trace.push_back(current.value);
  }
  return model;
}

}  // namespace survkit
