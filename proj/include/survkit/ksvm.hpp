#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "survkit/data.hpp"

namespace survkit {

enum class KernelKind { kLinear, kRbf, kPolynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  double gamma = 1.0;  // rbf width
  int degree = 3;      // polynomial
  double coef0 = 1.0;  // polynomial

  void validate() const;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Ordered pairs (i, j), 0-based, with T_i < T_j and subject i observed: i
// must be ranked as the riskier of the two.
std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs(std::span<const double> times,
                                                                  std::span<const int> status);
std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs(const SurvivalDataset& ds);

struct KsvmConfig {
  int epochs = 500;
  std::uint64_t seed = 0;
};

struct KsvmModel {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  Eigen::MatrixXd support_rows;  // n x p training covariates
  KernelSpec kernel;
  double reg_c = 1.0;
  std::vector<std::string> feature_names;
  std::vector<double> objective_trace;  // per epoch, starting with the initial value
};

// Minimizes 1/2 a'Ka + C sum_{(i,j)} max(0, 1 - (f(x_i) - f(x_j))) over
// representer weights by per-pair stochastic subgradient steps in shuffled
// order. Each pair step is capped at the length that just restores its
// margin, and the epoch step size decays as 1/(1 + epoch).
KsvmModel fit_ksvm(const SurvivalDataset& train, const KernelSpec& kernel, double reg_c, const KsvmConfig& config = {});

double score_ksvm(const KsvmModel& model, std::span<const double> x);

// Objective value of a model on its own training data.
double ksvm_objective(const KsvmModel& model, const SurvivalDataset& train);

inline double risk_score(const KsvmModel& model, std::span<const double> x) { return score_ksvm(model, x); }

}  // namespace survkit
