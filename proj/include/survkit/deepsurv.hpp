#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "survkit/data.hpp"

namespace survkit {

enum class Activation { kRelu, kTanh };

struct NetworkSpec {
  std::vector<std::size_t> hidden_sizes{16, 16};
  Activation activation = Activation::kRelu;
  double weight_decay = 1e-4;
  double learning_rate = 1e-2;
  int epochs = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct DeepSurvModel {
  NetworkSpec spec;
  std::vector<DenseLayer> layers;  // hidden layers then the 1-unit output layer
  std::vector<std::string> feature_names;
  std::vector<double> training_loss_trace;

  std::size_t n_inputs() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols()); }
};

// Scalar log-risk; a network without hidden layers is the affine map w.x + b.
double forward(const DeepSurvModel& model, std::span<const double> x);

struct CoxLoss {
  double value = 0.0;
  Eigen::VectorXd gradient;  // d value / d eta
};

// Negative Breslow log partial likelihood of the given scores.
CoxLoss cox_loss(std::span<const double> etas, std::span<const double> times, std::span<const int> status);

// Fan-in scaled uniform initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in))
// for weights, zero biases.
DeepSurvModel init_network(const NetworkSpec& spec, std::size_t n_inputs);

struct TrainingObjective {
  double value = 0.0;
  std::vector<DenseLayer> gradient;  // same shapes as the layers
};

// cox_loss(forward(x_i)) + weight_decay * ||weights||^2 with backpropagated
// parameter gradients. Biases are not decayed.
TrainingObjective training_objective(const std::vector<DenseLayer>& layers, Activation activation, double weight_decay,
                                     const Eigen::MatrixXd& x, std::span<const double> times,
                                     std::span<const int> status);

// Full-batch Adam with step rejection: a step that raises the objective is
// retried at half the rate, so the recorded loss trace never increases.
DeepSurvModel fit_deepsurv(const SurvivalDataset& train, const NetworkSpec& spec = {});

inline double risk_score(const DeepSurvModel& model, std::span<const double> x) { return forward(model, x); }

}  // namespace survkit
