#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "survkit/data.hpp"

namespace survkit {

struct OLSFit {
  std::string response;
  std::vector<std::string> terms;  // "(Intercept)" then the regressors
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_values;
  Eigen::VectorXd p_values;
  Eigen::VectorXd residuals;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  double residual_scale = 0.0;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  std::size_t df_resid = 0;

  std::size_t n_regressors() const { return terms.empty() ? 0 : terms.size() - 1; }
};

// The regressors used by the reference vulnerability regression.
std::vector<std::string> default_mvi_regressors();

// Fits response ~ 1 + regressors by column-pivoted QR after listwise
// deletion. `response` may be "mvi" or a covariate column.
OLSFit fit_ols(const SurvivalDataset& ds, const std::string& response, const std::vector<std::string>& regressors);

// Lower-level entry on an explicit design (no intercept column in x).
OLSFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& regressor_names,
               const std::string& response = "y");

double predict_ols(const OLSFit& fit, std::span<const double> x);

// "***" < 0.001 <= "**" < 0.01 <= "*" < 0.05 <= "." < 0.1 <= " "
std::string significance_stars(double p_value);

// Regression summary laid out like the usual R `summary(lm)` block.
std::string format_ols_text(const OLSFit& fit);
nlohmann::json to_json(const OLSFit& fit);

}  // namespace survkit
