#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "survkit/data.hpp"
#include "survkit/step_function.hpp"

namespace survkit {

enum class TieMethod { kEfron, kBreslow };

struct PartialLikelihood {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Log partial likelihood with analytic gradient and Hessian.
PartialLikelihood partial_loglik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                 std::span<const double> times, std::span<const int> status,
                                 TieMethod ties = TieMethod::kEfron);
PartialLikelihood partial_loglik(const Eigen::VectorXd& beta, const SurvivalDataset& ds,
                                 TieMethod ties = TieMethod::kEfron);

struct BaselineHazard {
  std::vector<double> times;       // distinct training event times
  std::vector<double> cum_hazard;  // Breslow H0 at each time
};

struct CoxConfig {
  int max_iter = 25;
  double tol = 1e-9;
  TieMethod ties = TieMethod::kEfron;
  double ridge = 0.0;  // optional L2 penalty (ridge/2)*||beta||^2
};

struct CoxModel {
  Eigen::VectorXd beta;
  std::vector<std::string> feature_names;
  bool converged = false;
  int iterations = 0;
  double final_loglik = 0.0;
  std::optional<BaselineHazard> baseline;
};

// Damped Newton-Raphson from beta = 0 with step halving. The returned model
// carries its Breslow baseline.
CoxModel fit_cox(const SurvivalDataset& train, const CoxConfig& config = {});

double risk_score(const CoxModel& model, std::span<const double> x);

BaselineHazard baseline_cumhaz(const CoxModel& model, const SurvivalDataset& train);

// S(t|x) = exp(-H0(t) exp(eta)) on the baseline time grid.
StepFunction survival_curve(const CoxModel& model, std::span<const double> x);

}  // namespace survkit
