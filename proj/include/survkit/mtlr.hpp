#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "survkit/data.hpp"

namespace survkit {

// Boundaries tau_1 < ... < tau_m split time into m+1 intervals:
// interval 0 is (0, tau_1], interval k is (tau_k, tau_{k+1}], interval m is
// (tau_m, inf).
struct TimeGrid {
  std::vector<double> boundaries;

  std::size_t size() const noexcept { return boundaries.size(); }
  // Interval index containing t: the number of boundaries strictly below t.
  std::size_t interval_of(double t) const;
};

// Type-1 empirical quantiles j/(m+1) of the observed event times, duplicates
// collapsed; if m reaches the number of distinct event times the grid is
// exactly those times.
TimeGrid make_time_grid(const SurvivalDataset& train, std::size_t m);

struct MtlrParams {
  Eigen::MatrixXd theta;  // m x p, row j = coefficients of boundary j
  Eigen::VectorXd bias;   // m

  static MtlrParams zeros(std::size_t m, std::size_t p);
};

struct MtlrObjective {
  double value = 0.0;
  MtlrParams gradient;
};

// Penalized log-likelihood over legal sequences y = (0,...,0,1,...,1):
// sequence k (event in interval k) scores sum_{j>k} (theta_j . x + b_j).
MtlrObjective mtlr_loglik(const MtlrParams& params, const TimeGrid& grid, const SurvivalDataset& ds,
                          double reg_c);

struct MtlrConfig {
  int max_iter = 5000;
  double tol = 1e-7;  // |delta objective| convergence threshold
};

struct MtlrModel {
  TimeGrid grid;
  MtlrParams params;
  double reg_c = 1.0;
  std::vector<std::string> feature_names;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

// Gradient ascent from zero with backtracking and step growth; the
// objective never decreases between accepted iterates.
MtlrModel fit_mtlr(const SurvivalDataset& train, const TimeGrid& grid, double reg_c, const MtlrConfig& config = {});

// Probability of each of the m+1 interval outcomes.
std::vector<double> interval_probabilities(const MtlrParams& params, std::span<const double> x);

// S(tau_j | x), j = 1..m.
std::vector<double> survival_curve(const MtlrModel& model, std::span<const double> x);

// Negative summed survival over the grid; higher means riskier.
double risk_score(const MtlrModel& model, std::span<const double> x);

struct WeightMatrix {
  std::vector<std::string> row_labels;  // features, then "bias"
  std::vector<double> boundary_times;
  Eigen::MatrixXd values;               // (p + 1) x m
};

WeightMatrix weight_matrix(const MtlrModel& model);

// Long format `feature,boundary_time,weight`, values written to round-trip.
void write_weight_csv(const WeightMatrix& wm, std::ostream& out);
WeightMatrix read_weight_csv(std::istream& in);

}  // namespace survkit
