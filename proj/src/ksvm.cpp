#include "survkit/ksvm.hpp"

#include <algorithm>
#include <cmath>

#include "survkit/error.hpp"
#include "survkit/random.hpp"

namespace survkit {

void KernelSpec::validate() const {
  if (kind == KernelKind::kRbf && !(gamma > 0.0)) throw ArgumentError("rbf kernel requires gamma > 0");
  if (kind == KernelKind::kPolynomial && degree < 1) throw ArgumentError("polynomial kernel requires degree >= 1");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelKind::kLinear: {
      double dot = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) dot += x[k] * y[k];
      return dot;
    }
    case KernelKind::kRbf: {
      double d2 = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
      return std::exp(-spec.gamma * d2);
    }
    case KernelKind::kPolynomial: {
      double dot = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) dot += x[k] * y[k];
      return std::pow(dot + spec.coef0, spec.degree);
    }
  }
  throw ArgumentError("unknown kernel kind");
}

std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs(std::span<const double> times,
                                                                  std::span<const int> status) {
  if (times.size() != status.size()) throw ArgumentError("comparable_pairs: length mismatch");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (status[i] != 1) continue;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[i] < times[j]) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs(const SurvivalDataset& ds) {
  const auto t = ds.times();
  const auto s = ds.statuses();
  return comparable_pairs(t, s);
}

namespace {

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  std::vector<double> a(static_cast<std::size_t>(x.cols())), b(a.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) a[static_cast<std::size_t>(c)] = x(i, c);
    for (Eigen::Index j = 0; j <= i; ++j) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) b[static_cast<std::size_t>(c)] = x(j, c);
      k(i, j) = k(j, i) = kernel_eval(spec, a, b);
    }
  }
  return k;
}

double objective(const Eigen::VectorXd& alphas, const Eigen::VectorXd& f, double reg_c,
                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  double hinge = 0.0;
  for (const auto& [i, j] : pairs) {
    hinge += std::max(0.0, 1.0 - (f[static_cast<Eigen::Index>(i)] - f[static_cast<Eigen::Index>(j)]));
  }
  return 0.5 * alphas.dot(f) + reg_c * hinge;
}

}  // namespace

KsvmModel fit_ksvm(const SurvivalDataset& train, const KernelSpec& kernel, double reg_c, const KsvmConfig& config) {
  kernel.validate();
  if (!(reg_c > 0.0)) throw ArgumentError("fit_ksvm: reg_c must be positive");
  if (config.epochs < 1) throw ArgumentError("fit_ksvm: epochs must be >= 1");
  auto pairs = comparable_pairs(train);
  if (pairs.empty()) throw FitError("no comparable pairs; all censored or degenerate");

  KsvmModel model;
  model.kernel = kernel;
  model.reg_c = reg_c;
  model.feature_names = train.feature_names();
  model.support_rows = train.design();
  const Eigen::MatrixXd k = gram(kernel, model.support_rows);
  const Eigen::Index n = k.rows();
  model.alphas = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // cached K * alphas
  model.objective_trace.push_back(objective(model.alphas, f, reg_c, pairs));

  constexpr double kInitialRate = 0.5;
  Rng rng(config.seed);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double rate = kInitialRate / (1.0 + epoch);
    // Regularizer step in function space: f <- (1 - rate) f.
    model.alphas *= 1.0 - rate;
    f *= 1.0 - rate;
    rng.shuffle(pairs);
    for (const auto& [ip, jp] : pairs) {
      const auto i = static_cast<Eigen::Index>(ip);
      const auto j = static_cast<Eigen::Index>(jp);
      const double margin = f[i] - f[j];
      if (margin >= 1.0) continue;
      const double curvature = k(i, i) + k(j, j) - 2.0 * k(i, j);
      double step = rate * reg_c;
      if (curvature > 0.0) step = std::min(step, (1.0 - margin) / curvature);
      model.alphas[i] += step;
      model.alphas[j] -= step;
      f += step * (k.col(i) - k.col(j));
    }
    model.objective_trace.push_back(objective(model.alphas, f, reg_c, pairs));
  }
  // Scores are only defined up to a shift; centre them on the training rows.
  model.bias = -f.mean();
  return model;
}

double score_ksvm(const KsvmModel& model, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(model.support_rows.cols())) {
    throw ArgumentError("score_ksvm: covariate dimension mismatch");
  }
  double s = model.bias;
  std::vector<double> row(x.size());
  for (Eigen::Index i = 0; i < model.support_rows.rows(); ++i) {
    const double a = model.alphas[i];
    if (a == 0.0) continue;
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = model.support_rows(i, static_cast<Eigen::Index>(c));
    s += a * kernel_eval(model.kernel, row, x);
  }
  return s;
}

double ksvm_objective(const KsvmModel& model, const SurvivalDataset& train) {
  const Eigen::MatrixXd k = gram(model.kernel, train.design());
  if (k.rows() != model.alphas.size()) throw ArgumentError("ksvm_objective: training set size mismatch");
  const Eigen::VectorXd f = k * model.alphas;
  return objective(model.alphas, f, model.reg_c, comparable_pairs(train));
}

}  // namespace survkit
