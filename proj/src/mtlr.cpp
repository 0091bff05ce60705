#include "survkit/mtlr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "survkit/error.hpp"

namespace survkit {

std::size_t TimeGrid::interval_of(double t) const {
  return static_cast<std::size_t>(std::lower_bound(boundaries.begin(), boundaries.end(), t) - boundaries.begin());
}

TimeGrid make_time_grid(const SurvivalDataset& train, std::size_t m) {
  if (m == 0) throw ArgumentError("make_time_grid: m must be >= 1");
  std::vector<double> events;
  for (const auto& r : train.rows()) {
    if (r.status == 1) events.push_back(r.time);
  }
  if (events.empty()) throw ArgumentError("make_time_grid: no events");
  std::sort(events.begin(), events.end());
  std::vector<double> distinct = events;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  TimeGrid grid;
  if (m >= distinct.size()) {
    grid.boundaries = distinct;
    return grid;
  }
  // Type-1 quantile position ceil(N j/(m+1)), in integer arithmetic.
  for (std::size_t j = 1; j <= m; ++j) {
    std::size_t pos = (j * events.size() + m) / (m + 1);
    pos = std::clamp<std::size_t>(pos, 1, events.size());
    const double b = events[pos - 1];
    if (grid.boundaries.empty() || b > grid.boundaries.back()) grid.boundaries.push_back(b);
  }
  return grid;
}

MtlrParams MtlrParams::zeros(std::size_t m, std::size_t p) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p)),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m))};
}

namespace {

// Sequence scores s_k = sum_{j >= k} a_j for k = 0..m, with s_m = 0.
Eigen::VectorXd sequence_scores(const MtlrParams& params, std::span<const double> x) {
  const Eigen::Index m = params.theta.rows();
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd a = params.theta * xv + params.bias;
  Eigen::VectorXd s(m + 1);
  s[m] = 0.0;
  for (Eigen::Index k = m - 1; k >= 0; --k) s[k] = s[k + 1] + a[k];
  return s;
}

double log_sum_exp(const Eigen::VectorXd& v, Eigen::Index begin, Eigen::Index end) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = begin; k < end; ++k) mx = std::max(mx, v[k]);
  double sum = 0.0;
  for (Eigen::Index k = begin; k < end; ++k) sum += std::exp(v[k] - mx);
  return mx + std::log(sum);
}

void check_dims(const MtlrParams& params, std::size_t p) {
  if (params.bias.size() != params.theta.rows() || params.theta.cols() != static_cast<Eigen::Index>(p)) {
    throw ArgumentError("MTLR parameters do not match the covariate dimension");
  }
}

Eigen::VectorXd flatten(const MtlrParams& p) {
  Eigen::VectorXd v(p.theta.size() + p.bias.size());
  v << Eigen::Map<const Eigen::VectorXd>(p.theta.data(), p.theta.size()), p.bias;
  return v;
}

MtlrParams unflatten(const Eigen::VectorXd& v, Eigen::Index m, Eigen::Index p) {
  MtlrParams out;
  out.theta = Eigen::Map<const Eigen::MatrixXd>(v.data(), m, p);
  out.bias = v.tail(m);
  return out;
}

}  // namespace

MtlrObjective mtlr_loglik(const MtlrParams& params, const TimeGrid& grid, const SurvivalDataset& ds, double reg_c) {
  const Eigen::Index m = params.theta.rows();
  const Eigen::Index p = params.theta.cols();
  if (static_cast<std::size_t>(m) != grid.size() || m == 0) throw ArgumentError("MTLR parameters do not match the grid");
  check_dims(params, ds.n_features());

  MtlrObjective out;
  out.gradient = MtlrParams::zeros(static_cast<std::size_t>(m), static_cast<std::size_t>(p));
  Eigen::VectorXd d_a(m);

  for (const auto& row : ds.rows()) {
    if (!row.complete()) throw ValidationError("row '" + row.id + "' has a missing covariate");
    const Eigen::VectorXd s = sequence_scores(params, row.x);
    const auto k = static_cast<Eigen::Index>(grid.interval_of(row.time));
    const double log_z = log_sum_exp(s, 0, m + 1);
    const Eigen::Index adm_begin = k;
    const Eigen::Index adm_end = row.status == 1 ? k + 1 : m + 1;
    const double log_a = log_sum_exp(s, adm_begin, adm_end);
    out.value += log_a - log_z;

    // d(log-sum)/d a_j = P(sequence index <= j) under each distribution.
    double cum_all = 0.0;
    double cum_adm = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      cum_all += std::exp(s[j] - log_z);
      if (j >= adm_begin && j < adm_end) cum_adm += std::exp(s[j] - log_a);
      d_a[j] = cum_adm - cum_all;
    }
    const Eigen::Map<const Eigen::VectorXd> xv(row.x.data(), p);
    out.gradient.theta.noalias() += d_a * xv.transpose();
    out.gradient.bias += d_a;
  }

  // Smoothness between adjacent boundaries plus ridge on the first row.
  const auto& th = params.theta;
  double penalty = th.row(0).squaredNorm();
  out.gradient.theta.row(0) -= reg_c * th.row(0);
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    const Eigen::RowVectorXd diff = th.row(j + 1) - th.row(j);
    penalty += diff.squaredNorm();
    out.gradient.theta.row(j + 1) -= reg_c * diff;
    out.gradient.theta.row(j) += reg_c * diff;
  }
  out.value -= 0.5 * reg_c * penalty;
  return out;
}

MtlrModel fit_mtlr(const SurvivalDataset& train, const TimeGrid& grid, double reg_c, const MtlrConfig& config) {
  if (!(reg_c > 0.0)) throw ArgumentError("fit_mtlr: reg_c must be positive");
  if (grid.size() == 0) throw ArgumentError("fit_mtlr: empty time grid");
  if (train.empty()) throw ArgumentError("fit_mtlr: empty training set");
  const auto m = static_cast<Eigen::Index>(grid.size());
  const auto p = static_cast<Eigen::Index>(train.n_features());

  MtlrModel model;
  model.grid = grid;
  model.reg_c = reg_c;
  model.feature_names = train.feature_names();
  model.params = MtlrParams::zeros(grid.size(), train.n_features());

  auto current = mtlr_loglik(model.params, grid, train, reg_c);
  model.objective_trace.push_back(current.value);
  Eigen::VectorXd x = flatten(model.params);
  Eigen::VectorXd g = flatten(current.gradient);
  double step = 1.0 / static_cast<double>(std::max<std::size_t>(train.size(), 1));

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktrack = 60;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    model.iterations = iter;
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) {
      model.converged = true;
      break;
    }
    bool accepted = false;
    MtlrObjective next;
    Eigen::VectorXd candidate;
    for (int bt = 0; bt < kMaxBacktrack; ++bt) {
      candidate = x + step * g;
      next = mtlr_loglik(unflatten(candidate, m, p), grid, train, reg_c);
      if (std::isfinite(next.value) && next.value >= current.value + kArmijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      model.converged = true;
      break;
    }
    const double delta = next.value - current.value;
    x = candidate;
    g = flatten(next.gradient);
    current = std::move(next);
    model.objective_trace.push_back(current.value);
    step *= 1.5;
    if (std::abs(delta) < config.tol) {
      model.converged = true;
      break;
    }
  }
  model.params = unflatten(x, m, p);
  return model;
}

std::vector<double> interval_probabilities(const MtlrParams& params, std::span<const double> x) {
  check_dims(params, x.size());
  const Eigen::VectorXd s = sequence_scores(params, x);
  const double log_z = log_sum_exp(s, 0, s.size());
  std::vector<double> probs(static_cast<std::size_t>(s.size()));
  for (Eigen::Index k = 0; k < s.size(); ++k) probs[static_cast<std::size_t>(k)] = std::exp(s[k] - log_z);
  return probs;
}

std::vector<double> survival_curve(const MtlrModel& model, std::span<const double> x) {
  if (x.size() != model.feature_names.size()) throw ArgumentError("survival_curve: covariate dimension mismatch");
  check_dims(model.params, x.size());
  const Eigen::VectorXd s = sequence_scores(model.params, x);
  const std::size_t m = static_cast<std::size_t>(s.size()) - 1;
  // S(tau_j) = sum_{k >= j} w_k / sum_k w_k on unnormalized weights. Tail
  // sums only grow, so the curve is monotone after the shared division.
  const double mx = s.maxCoeff();
  std::vector<double> tail(m + 1);
  double acc = 0.0;
  for (std::size_t k = m + 1; k-- > 0;) {
    acc += std::exp(s[static_cast<Eigen::Index>(k)] - mx);
    tail[k] = acc;
  }
  std::vector<double> surv(m);
  for (std::size_t j = 0; j < m; ++j) surv[j] = std::min(1.0, tail[j + 1] / acc);
  return surv;
}

double risk_score(const MtlrModel& model, std::span<const double> x) {
  const auto s = survival_curve(model, x);
  double total = 0.0;
  for (double v : s) total += v;
  return -total;
}

WeightMatrix weight_matrix(const MtlrModel& model) {
  WeightMatrix wm;
  wm.row_labels = model.feature_names;
  wm.row_labels.emplace_back("bias");
  wm.boundary_times = model.grid.boundaries;
  const auto& th = model.params.theta;
  wm.values.resize(th.cols() + 1, th.rows());
  wm.values.topRows(th.cols()) = th.transpose();
  wm.values.row(th.cols()) = model.params.bias.transpose();
  return wm;
}

namespace {

std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_exact(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

}  // namespace

void write_weight_csv(const WeightMatrix& wm, std::ostream& out) {
  out << "feature,boundary_time,weight\n";
  for (Eigen::Index r = 0; r < wm.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < wm.values.cols(); ++c) {
      out << wm.row_labels[static_cast<std::size_t>(r)] << ',' << exact(wm.boundary_times[static_cast<std::size_t>(c)])
          << ',' << exact(wm.values(r, c)) << '\n';
    }
  }
}

WeightMatrix read_weight_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line.rfind("feature,boundary_time,weight", 0) != 0) {
    throw SchemaError("weight matrix CSV must start with 'feature,boundary_time,weight'");
  }
  WeightMatrix wm;
  std::vector<std::tuple<std::string, double, double>> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw ParseError("expected 3 fields", line_no);
    cells.emplace_back(line.substr(0, c1), parse_exact(line.substr(c1 + 1, c2 - c1 - 1), line_no),
                       parse_exact(line.substr(c2 + 1), line_no));
  }
  for (const auto& [label, time, w] : cells) {
    if (std::find(wm.row_labels.begin(), wm.row_labels.end(), label) == wm.row_labels.end()) {
      wm.row_labels.push_back(label);
    }
    if (std::find(wm.boundary_times.begin(), wm.boundary_times.end(), time) == wm.boundary_times.end()) {
      wm.boundary_times.push_back(time);
    }
  }
  wm.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(wm.row_labels.size()),
                                    static_cast<Eigen::Index>(wm.boundary_times.size()));
  for (const auto& [label, time, w] : cells) {
    const auto r = std::find(wm.row_labels.begin(), wm.row_labels.end(), label) - wm.row_labels.begin();
    const auto c = std::find(wm.boundary_times.begin(), wm.boundary_times.end(), time) - wm.boundary_times.begin();
    wm.values(r, c) = w;
  }
  return wm;
}

}  // namespace survkit
