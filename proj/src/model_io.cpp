#include "survkit/model_io.hpp"

#include <fstream>

#include "survkit/error.hpp"

namespace survkit {

using nlohmann::json;

std::string model_kind(const AnyModel& model) {
  struct Visitor {
    std::string operator()(const CoxModel&) const { return "cox"; }
    std::string operator()(const MtlrModel&) const { return "mtlr"; }
    std::string operator()(const RsfModel&) const { return "rsf"; }
    std::string operator()(const DeepSurvModel&) const { return "deepsurv"; }
    std::string operator()(const KsvmModel&) const { return "ksvm"; }
  };
  return std::visit(Visitor{}, model);
}

double risk_score(const AnyModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return survkit::risk_score(m, x); }, model);
}

double ModelArtifact::score_raw(std::span<const double> raw_x) const {
  if (raw_x.size() != input_features.size()) {
    throw ArgumentError("expected " + std::to_string(input_features.size()) + " covariates, got " +
                        std::to_string(raw_x.size()));
  }
  if (!scaling) return risk_score(model, raw_x);
  const auto x = scaling->apply(raw_x);
  return risk_score(model, x);
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd from_row_major(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) throw SchemaError("matrix payload has the wrong size");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

json header(const char* kind, const std::vector<std::string>& features) {
  return {{"model", kind}, {"version", kArtifactVersion}, {"features", features}};
}

std::string kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kPolynomial: return "polynomial";
  }
  return "rbf";
}

KernelKind kernel_from_name(const std::string& s) {
  if (s == "linear") return KernelKind::kLinear;
  if (s == "rbf") return KernelKind::kRbf;
  if (s == "polynomial") return KernelKind::kPolynomial;
  throw SchemaError("unknown kernel '" + s + "'");
}

}  // namespace

json to_json(const CoxModel& m) {
  json j = header("cox", m.feature_names);
  j["beta"] = to_vec(m.beta);
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["loglik"] = m.final_loglik;
  if (m.baseline) j["baseline"] = {{"times", m.baseline->times}, {"cum_hazard", m.baseline->cum_hazard}};
  return j;
}

json to_json(const MtlrModel& m) {
  json j = header("mtlr", m.feature_names);
  j["grid"] = m.grid.boundaries;
  j["theta"] = row_major(m.params.theta);
  j["bias"] = to_vec(m.params.bias);
  j["reg_c"] = m.reg_c;
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  return j;
}

json to_json(const RsfModel& m) {
  json j = header("rsf", m.feature_names);
  j["config"] = {{"n_trees", m.config.n_trees},
                 {"mtry", m.config.mtry},
                 {"min_node_events", m.config.min_node_events},
                 {"max_depth", m.config.max_depth},
                 {"seed", m.config.seed}};
  j["event_grid"] = m.event_grid;
  json trees = json::array();
  for (const auto& t : m.trees) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold;
    json leaf_times = json::array(), leaf_chf = json::array();
    for (const auto& node : t.nodes) {
      feature.push_back(node.feature);
      threshold.push_back(node.threshold);
      left.push_back(node.left);
      right.push_back(node.right);
      leaf_times.push_back(node.chf.times);
      leaf_chf.push_back(node.chf.values);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"leaf_times", leaf_times},
                     {"leaf_chf", leaf_chf}});
  }
  j["trees"] = std::move(trees);
  return j;
}

json to_json(const DeepSurvModel& m) {
  json j = header("deepsurv", m.feature_names);
  j["spec"] = {{"hidden", m.spec.hidden_sizes},
               {"activation", m.spec.activation == Activation::kRelu ? "relu" : "tanh"},
               {"weight_decay", m.spec.weight_decay},
               {"learning_rate", m.spec.learning_rate},
               {"epochs", m.spec.epochs},
               {"seed", m.spec.seed}};
  json layers = json::array();
  for (const auto& l : m.layers) {
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", row_major(l.weights)},
                      {"bias", to_vec(l.bias)}});
  }
  j["layers"] = std::move(layers);
  if (!m.training_loss_trace.empty()) j["final_loss"] = m.training_loss_trace.back();
  return j;
}

json to_json(const KsvmModel& m) {
  json j = header("ksvm", m.feature_names);
  j["kernel"] = {{"kind", kernel_name(m.kernel.kind)},
                 {"gamma", m.kernel.gamma},
                 {"degree", m.kernel.degree},
                 {"coef0", m.kernel.coef0}};
  j["reg_c"] = m.reg_c;
  j["rows"] = m.support_rows.rows();
  j["cols"] = m.support_rows.cols();
  j["support_rows"] = row_major(m.support_rows);
  j["alphas"] = to_vec(m.alphas);
  j["bias"] = m.bias;
  return j;
}

json to_json(const AnyModel& m) {
  return std::visit([](const auto& model) { return to_json(model); }, m);
}

json to_json(const ModelArtifact& a) {
  json j = to_json(a.model);
  j["input_features"] = a.input_features;
  if (a.scaling) {
    j["scaling"] = {{"means", a.scaling->means},
                    {"sds", a.scaling->sds},
                    {"retained", a.scaling->retained_columns}};
  }
  return j;
}

AnyModel model_from_json(const json& j) {
  try {
    const auto kind = j.at("model").get<std::string>();
    const int version = j.at("version").get<int>();
    if (version != kArtifactVersion) throw SchemaError("unsupported artifact version " + std::to_string(version));
    const auto features = j.at("features").get<std::vector<std::string>>();
    const auto p = static_cast<Eigen::Index>(features.size());

    if (kind == "cox") {
      CoxModel m;
      m.feature_names = features;
      m.beta = to_eigen(j.at("beta").get<std::vector<double>>());
      if (m.beta.size() != p) throw SchemaError("cox: beta length does not match features");
      m.converged = j.value("converged", true);
      m.iterations = j.value("iterations", 0);
      m.final_loglik = j.value("loglik", 0.0);
      if (j.contains("baseline")) {
        m.baseline = BaselineHazard{j["baseline"].at("times").get<std::vector<double>>(),
                                    j["baseline"].at("cum_hazard").get<std::vector<double>>()};
      }
      return m;
    }
    if (kind == "mtlr") {
      MtlrModel m;
      m.feature_names = features;
      m.grid.boundaries = j.at("grid").get<std::vector<double>>();
      const auto mm = static_cast<Eigen::Index>(m.grid.size());
      m.params.theta = from_row_major(j.at("theta").get<std::vector<double>>(), mm, p);
      m.params.bias = to_eigen(j.at("bias").get<std::vector<double>>());
      if (m.params.bias.size() != mm) throw SchemaError("mtlr: bias length does not match grid");
      m.reg_c = j.at("reg_c").get<double>();
      m.iterations = j.value("iterations", 0);
      m.converged = j.value("converged", true);
      return m;
    }
    if (kind == "rsf") {
      RsfModel m;
      m.feature_names = features;
      const auto& c = j.at("config");
      m.config.n_trees = c.at("n_trees").get<std::size_t>();
      m.config.mtry = c.at("mtry").get<std::size_t>();
      m.config.min_node_events = c.at("min_node_events").get<std::size_t>();
      m.config.max_depth = c.at("max_depth").get<int>();
      m.config.seed = c.at("seed").get<std::uint64_t>();
      m.event_grid = j.at("event_grid").get<std::vector<double>>();
      for (const auto& t : j.at("trees")) {
        SurvivalTree tree;
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto& lt = t.at("leaf_times");
        const auto& lc = t.at("leaf_chf");
        const auto n = feature.size();
        if (threshold.size() != n || left.size() != n || right.size() != n || lt.size() != n || lc.size() != n) {
          throw SchemaError("rsf: inconsistent node arrays");
        }
        for (std::size_t k = 0; k < n; ++k) {
          TreeNode node;
          node.feature = feature[k];
          node.threshold = threshold[k];
          node.left = left[k];
          node.right = right[k];
          node.chf.times = lt[k].get<std::vector<double>>();
          node.chf.values = lc[k].get<std::vector<double>>();
          const bool leaf = node.left < 0;
          if (!leaf && (node.right < 0 || node.left >= static_cast<int>(n) || node.right >= static_cast<int>(n) ||
                        node.feature < 0 || node.feature >= static_cast<int>(p))) {
            throw SchemaError("rsf: malformed internal node");
          }
          tree.nodes.push_back(std::move(node));
        }
        if (tree.nodes.empty()) throw SchemaError("rsf: empty tree");
        m.trees.push_back(std::move(tree));
      }
      if (m.trees.empty()) throw SchemaError("rsf: no trees");
      return m;
    }
    if (kind == "deepsurv") {
      DeepSurvModel m;
      m.feature_names = features;
      const auto& s = j.at("spec");
      m.spec.hidden_sizes = s.at("hidden").get<std::vector<std::size_t>>();
      m.spec.activation = s.at("activation").get<std::string>() == "tanh" ? Activation::kTanh : Activation::kRelu;
      m.spec.weight_decay = s.at("weight_decay").get<double>();
      m.spec.learning_rate = s.at("learning_rate").get<double>();
      m.spec.epochs = s.at("epochs").get<int>();
      m.spec.seed = s.at("seed").get<std::uint64_t>();
      for (const auto& l : j.at("layers")) {
        DenseLayer layer;
        const auto rows = l.at("rows").get<Eigen::Index>();
        const auto cols = l.at("cols").get<Eigen::Index>();
        layer.weights = from_row_major(l.at("weights").get<std::vector<double>>(), rows, cols);
        layer.bias = to_eigen(l.at("bias").get<std::vector<double>>());
        m.layers.push_back(std::move(layer));
      }
      if (m.layers.empty() || m.layers.front().weights.cols() != p) throw SchemaError("deepsurv: layer shapes");
      if (j.contains("final_loss")) m.training_loss_trace.push_back(j["final_loss"].get<double>());
      return m;
    }
    if (kind == "ksvm") {
      KsvmModel m;
      m.feature_names = features;
      const auto& k = j.at("kernel");
      m.kernel.kind = kernel_from_name(k.at("kind").get<std::string>());
      m.kernel.gamma = k.at("gamma").get<double>();
      m.kernel.degree = k.at("degree").get<int>();
      m.kernel.coef0 = k.at("coef0").get<double>();
      m.reg_c = j.at("reg_c").get<double>();
      const auto rows = j.at("rows").get<Eigen::Index>();
      const auto cols = j.at("cols").get<Eigen::Index>();
      if (cols != p) throw SchemaError("ksvm: support rows do not match features");
      m.support_rows = from_row_major(j.at("support_rows").get<std::vector<double>>(), rows, cols);
      m.alphas = to_eigen(j.at("alphas").get<std::vector<double>>());
      if (m.alphas.size() != rows) throw SchemaError("ksvm: alphas length does not match support rows");
      m.bias = j.at("bias").get<double>();
      return m;
    }
    throw SchemaError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model artifact: ") + e.what());
  }
}

ModelArtifact artifact_from_json(const json& j) {
  ModelArtifact a;
  a.model = model_from_json(j);
  try {
    a.input_features = j.contains("input_features") ? j["input_features"].get<std::vector<std::string>>()
                                                    : j.at("features").get<std::vector<std::string>>();
    if (j.contains("scaling")) {
      ScalingParams s;
      s.means = j["scaling"].at("means").get<std::vector<double>>();
      s.sds = j["scaling"].at("sds").get<std::vector<double>>();
      s.retained_columns = j["scaling"].at("retained").get<std::vector<std::size_t>>();
      if (s.means.size() != a.input_features.size() || s.sds.size() != a.input_features.size()) {
        throw SchemaError("scaling block does not match input_features");
      }
      for (auto c : s.retained_columns) {
        if (c >= a.input_features.size()) throw SchemaError("scaling block references an unknown column");
      }
      a.scaling = std::move(s);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model artifact: ") + e.what());
  }
  return a;
}

void save_artifact(const ModelArtifact& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json(a).dump(1) << '\n';
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("model artifact is not valid JSON: " + std::string(e.what()));
  }
  return artifact_from_json(j);
}

}  // namespace survkit
