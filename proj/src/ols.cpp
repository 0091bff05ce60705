#include "survkit/ols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include <Eigen/QR>

#include "survkit/error.hpp"
#include "survkit/stats.hpp"

namespace survkit {

std::vector<std::string> default_mvi_regressors() {
  return {"Natural_risk", "Commercial_risk", "Financial_risk",     "Endogenous_risk",
          "Vul_Inherent", "Vul_Companies",   "Vul_Homes",          "Capabilities_State",
          "Social_Cohesion_Capabilities"};
}

namespace {

// Index of the first column that is a linear combination of the ones before it.
Eigen::Index first_dependent_column(const Eigen::MatrixXd& design) {
  for (Eigen::Index c = 1; c <= design.cols(); ++c) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.leftCols(c));
    if (qr.rank() < c) return c - 1;
  }
  return -1;
}

}  // namespace

OLSFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& regressor_names,
               const std::string& response) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (static_cast<std::size_t>(k) != regressor_names.size()) throw ArgumentError("fit_ols: names/columns mismatch");
  if (y.size() != n) throw ArgumentError("fit_ols: response length mismatch");
  if (n <= k + 1) {
    throw ValidationError("fit_ols: " + std::to_string(n) + " usable rows is not enough for " + std::to_string(k) +
                          " regressors plus intercept");
  }

  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = x;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k + 1) {
    const auto c = first_dependent_column(design);
    const std::string name = c <= 0 ? "(Intercept)" : regressor_names[static_cast<std::size_t>(c - 1)];
    throw ValidationError("rank-deficient design: column '" + name + "' is linearly dependent on earlier columns");
  }

  OLSFit fit;
  fit.response = response;
  fit.terms.emplace_back("(Intercept)");
  fit.terms.insert(fit.terms.end(), regressor_names.begin(), regressor_names.end());
  fit.coefficients = qr.solve(y);
  fit.residuals = y - design * fit.coefficients;
  fit.n_used = static_cast<std::size_t>(n);
  fit.df_resid = static_cast<std::size_t>(n - k - 1);

  const double df = static_cast<double>(fit.df_resid);
  const double rss = fit.residuals.squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  const double sigma2 = rss / df;
  fit.residual_scale = std::sqrt(sigma2);

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted QR.
  const Eigen::MatrixXd r =
      qr.matrixQR().topLeftCorner(k + 1, k + 1).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k + 1, k + 1));
  const Eigen::MatrixXd xtx_inv_pivoted = r_inv * r_inv.transpose();
  const Eigen::MatrixXd xtx_inv = qr.colsPermutation() * xtx_inv_pivoted * qr.colsPermutation().transpose();

  fit.std_errors = (sigma2 * xtx_inv.diagonal().array()).sqrt().matrix();
  fit.t_values = fit.coefficients.cwiseQuotient(fit.std_errors);
  fit.p_values.resize(k + 1);
  for (Eigen::Index j = 0; j <= k; ++j) fit.p_values[j] = stats::student_t_two_sided_p(fit.t_values[j], df);

  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / df;
  if (k > 0) {
    fit.f_statistic = rss > 0.0 ? ((tss - rss) / static_cast<double>(k)) / sigma2
                                : std::numeric_limits<double>::infinity();
    fit.f_p_value = stats::f_upper_p(fit.f_statistic, static_cast<double>(k), df);
  }
  return fit;
}

OLSFit fit_ols(const SurvivalDataset& ds, const std::string& response, const std::vector<std::string>& regressors) {
  if (regressors.empty()) throw ArgumentError("fit_ols: no regressors given");
  std::vector<std::size_t> cols;
  for (const auto& name : regressors) {
    const auto idx = ds.feature_index(name);
    if (!idx) throw SchemaError("regressor column not found: " + name);
    cols.push_back(*idx);
  }
  std::optional<std::size_t> response_col;
  if (response != kMviColumn) {
    response_col = ds.feature_index(response);
    if (!response_col) throw SchemaError("response column not found: " + response);
  }

  std::vector<std::size_t> used;
  std::vector<double> y_values;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& row = ds[i];
    double y = kMissing;
    if (response_col) y = row.x[*response_col];
    else if (row.mvi) y = *row.mvi;
    if (is_missing(y)) continue;
    if (std::any_of(cols.begin(), cols.end(), [&](auto c) { return is_missing(row.x[c]); })) continue;
    used.push_back(i);
    y_values.push_back(y);
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < used.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ds[used[r]].x[cols[c]];
    }
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y_values.data(), static_cast<Eigen::Index>(y_values.size()));
  auto fit = fit_ols(x, y, regressors, response);
  fit.n_dropped = ds.size() - used.size();
  return fit;
}

double predict_ols(const OLSFit& fit, std::span<const double> x) {
  if (x.size() != fit.n_regressors()) throw ArgumentError("predict_ols: regressor dimension mismatch");
  double y = fit.coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j) y += fit.coefficients[static_cast<Eigen::Index>(j + 1)] * x[j];
  return y;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return " ";
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Type-7 sample quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string format_p(double p) {
  if (p < 1e-4) return fmt("%.3g", p);
  return fmt("%.6f", p);
}

}  // namespace

std::string format_ols_text(const OLSFit& fit) {
  std::ostringstream out;
  out << "lm(" << fit.response << " ~";
  for (std::size_t j = 1; j < fit.terms.size(); ++j) out << (j == 1 ? " " : " + ") << fit.terms[j];
  out << ")\n\nResiduals:\n";
  std::vector<double> res(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  std::sort(res.begin(), res.end());
  out << std::right << std::setw(12) << "Min" << std::setw(12) << "1Q" << std::setw(12) << "Median" << std::setw(12)
      << "3Q" << std::setw(12) << "Max" << '\n';
  for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) out << std::setw(12) << fmt("%.7f", quantile(res, q));
  out << "\n\nCoefficients:\n";

  std::size_t width = 12;
  for (const auto& t : fit.terms) width = std::max(width, t.size() + 1);
  out << std::left << std::setw(static_cast<int>(width)) << "" << std::right << std::setw(11) << "Estimate"
      << std::setw(12) << "Std. Error" << std::setw(9) << "t value" << std::setw(11) << "Pr(>|t|)" << '\n';
  for (std::size_t j = 0; j < fit.terms.size(); ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    out << std::left << std::setw(static_cast<int>(width)) << fit.terms[j] << std::right << std::setw(11)
        << fmt("%.6f", fit.coefficients[e]) << std::setw(12) << fmt("%.6f", fit.std_errors[e]) << std::setw(9)
        << fmt("%.3f", fit.t_values[e]) << std::setw(11) << format_p(fit.p_values[e]) << ' '
        << significance_stars(fit.p_values[e]) << '\n';
  }
  out << "---\nSignif. codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n\n";
  out << "s: " << fmt("%.4g", fit.residual_scale) << " on " << fit.df_resid << " degrees of freedom\n";
  if (fit.n_dropped > 0) out << "(" << fit.n_dropped << " observations deleted due to missingness)\n";
  out << "Multiple R-squared: " << fmt("%.4f", fit.r_squared) << ",\tAdjusted R-squared: "
      << fmt("%.4f", fit.adj_r_squared) << '\n';
  out << "F-statistic: " << fmt("%.4g", fit.f_statistic) << " on " << fit.n_regressors() << " and " << fit.df_resid
      << " DF, p-value: " << fmt("%.4g", fit.f_p_value) << '\n';
  return out.str();
}

nlohmann::json to_json(const OLSFit& fit) {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t j = 0; j < fit.terms.size(); ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    coefs.push_back({{"term", fit.terms[j]},
                     {"estimate", fit.coefficients[e]},
                     {"std_error", fit.std_errors[e]},
                     {"t_value", fit.t_values[e]},
                     {"p_value", fit.p_values[e]},
                     {"stars", significance_stars(fit.p_values[e])}});
  }
  return {{"schema_version", 1},
          {"response", fit.response},
          {"coefficients", coefs},
          {"residual_scale", fit.residual_scale},
          {"df_resid", fit.df_resid},
          {"n_used", fit.n_used},
          {"n_dropped", fit.n_dropped},
          {"r_squared", fit.r_squared},
          {"adj_r_squared", fit.adj_r_squared},
          {"f_statistic", fit.f_statistic},
          {"f_df", {fit.n_regressors(), fit.df_resid}},
          {"f_p_value", fit.f_p_value}};
}

}  // namespace survkit
