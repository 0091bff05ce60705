#include "survkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "survkit/error.hpp"
#include "survkit/km.hpp"
#include "survkit/ols.hpp"
#include "survkit/synth.hpp"

namespace survkit {

namespace fs = std::filesystem;

AnyModel fit_named_model(const std::string& name, const SurvivalDataset& train, const ModelOptions& o) {
  if (name == "cox") return fit_cox(train, o.cox);
  if (name == "mtlr") {
    const auto grid = make_time_grid(train, o.mtlr_bins);
    return fit_mtlr(train, grid, o.mtlr_c, o.mtlr);
  }
  if (name == "rsf") {
    auto cfg = o.rsf;
    cfg.seed = o.seed;
    return fit_rsf(train, cfg);
  }
  if (name == "deepsurv") {
    auto spec = o.deepsurv;
    spec.seed = o.seed;
    return fit_deepsurv(train, spec);
  }
  if (name == "ksvm") {
    auto kernel = o.kernel;
    if (kernel.gamma <= 0.0) kernel.gamma = 1.0 / static_cast<double>(std::max<std::size_t>(1, train.n_features()));
    auto cfg = o.ksvm;
    cfg.seed = o.seed;
    return fit_ksvm(train, kernel, o.ksvm_c, cfg);
  }
  throw ArgumentError("unknown model '" + name + "' (expected cox, mtlr, rsf, deepsurv or ksvm)");
}

void PipelineConfig::validate() const {
  if (input.empty()) throw ArgumentError("pipeline: --input is required");
  if (out_dir.empty()) throw ArgumentError("pipeline: --out directory is required");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("split fraction must lie in (0, 1)");
  if (models.empty()) throw ArgumentError("pipeline: no models requested");
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (std::find(kModelNames.begin(), kModelNames.end(), m) == kModelNames.end()) {
      throw ArgumentError("unknown model '" + m + "'");
    }
    if (!seen.insert(m).second) throw ArgumentError("model '" + m + "' requested twice");
  }
  for (const auto& f : formats) {
    if (f != "json" && f != "csv" && f != "text") throw ArgumentError("unknown report format '" + f + "'");
  }
}

void write_comparison_csv(const ModelComparisonReport& report, std::ostream& out) {
  out << "model,c_index\n";
  char buf[64];
  for (const auto& e : report.entries) {
    std::snprintf(buf, sizeof buf, "%.6f", e.result.c_index);
    out << e.model << ',' << buf << '\n';
  }
}

namespace {

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create directory '" + dir.string() + "'");
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

std::vector<double> event_times(const KMCurve& curve) {
  std::vector<double> t;
  for (const auto& s : curve.steps) t.push_back(s.time);
  return t;
}

struct Fitted {
  std::string name;
  AnyModel model;
};

struct Evaluation {
  ModelComparisonReport report;
  std::vector<Fitted> fitted;
  ScalingParams scaling;
  std::vector<std::string> input_features;
};

Evaluation fit_and_compare(const SurvivalDataset& ds, double fraction, std::uint64_t seed,
                           const std::vector<std::string>& models, const ModelOptions& options, TieCredit ties) {
  if (!ds.complete()) {
    for (const auto& r : ds.rows()) {
      if (!r.complete()) throw ValidationError("row '" + r.id + "' has a missing covariate; models need complete rows");
    }
  }
  const auto split = train_test_split(ds, fraction, seed);
  auto std_split = standardize(split.train, split.test);

  Evaluation ev;
  ev.scaling = std_split.params;
  ev.input_features = ds.feature_names();
  std::vector<NamedScorer> scorers;
  for (const auto& name : models) {
    try {
      ev.fitted.push_back({name, fit_named_model(name, std_split.train, options)});
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      throw FitError(name + ": " + e.what());
    }
  }
  for (const auto& f : ev.fitted) {
    const AnyModel* m = &f.model;
    scorers.push_back({f.name, [m](std::span<const double> x) { return risk_score(*m, x); }});
  }
  const SplitInfo info{seed, fraction, split.train.size(), split.test.size()};
  ev.report = compare_models(scorers, std_split.test, info, ties);
  return ev;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const auto ds = load_csv(cfg.input);
  auto options = cfg.options;
  options.seed = cfg.seed;
  const auto ev = fit_and_compare(ds, cfg.fraction, cfg.seed, cfg.models, options, cfg.tie_credit);

  ensure_dir(cfg.out_dir);
  PipelineResult result;
  result.report = ev.report;
  auto emit = [&](const std::string& file, const std::string& content) {
    const auto path = cfg.out_dir / file;
    write_text_file(path, content);
    result.written.push_back(path);
  };
  auto wants = [&](const char* f) { return std::find(cfg.formats.begin(), cfg.formats.end(), f) != cfg.formats.end(); };

  emit("report.json", to_json(ev.report).dump(2) + "\n");
  if (wants("text")) emit("report.txt", format_report_text(ev.report));
  if (wants("csv")) emit("comparison.csv", render([&](std::ostream& o) { write_comparison_csv(ev.report, o); }));

  for (const auto& f : ev.fitted) {
    const ModelArtifact artifact{f.model, ev.input_features, ev.scaling};
    emit("model_" + f.name + ".json", to_json(artifact).dump(1) + "\n");
    if (const auto* mtlr = std::get_if<MtlrModel>(&f.model)) {
      emit("weight_matrix.csv", render([&](std::ostream& o) { write_weight_csv(weight_matrix(*mtlr), o); }));
    }
  }

  const auto curve = fit_km(ds);
  const auto rows = summarize_at(curve, event_times(curve));
  emit("km_summary.csv", render([&](std::ostream& o) { write_km_summary_csv(rows, o); }));
  if (wants("text")) emit("km_summary.txt", format_km_table(rows));
  if (wants("csv")) emit("km_curve.csv", render([&](std::ostream& o) { write_km_curve_csv(curve, o); }));
  return result;
}

namespace {

// ---- argument parsing ---------------------------------------------------

struct GlobalArgs {
  std::string input;
  std::string out;
  std::uint64_t seed = 42;
  double split = 0.7;
  std::string format = "text";
  std::string config;
};

struct ModelArgs {
  ModelOptions opts;
  std::string ties = "efron";
  std::string hidden = "16,16";
  std::string activation = "relu";
  std::string kernel = "rbf";
  std::string tie_credit = "half";
  bool no_standardize = false;
};

TieCredit parse_tie_credit(const std::string& s) {
  if (s == "half") return TieCredit::kHalf;
  if (s == "zero") return TieCredit::kZero;
  throw ArgumentError("--tie-credit must be half or zero");
}

std::vector<std::size_t> parse_hidden(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.empty() || s == "none") return out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || v <= 0) throw ArgumentError("--hidden expects positive integers, got '" + s + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Turns the string-valued flags into the typed option structs.
ModelOptions resolve(const ModelArgs& a, std::uint64_t seed) {
  ModelOptions o = a.opts;
  o.seed = seed;
  o.cox.ties = a.ties == "breslow" ? TieMethod::kBreslow : TieMethod::kEfron;
  o.deepsurv.hidden_sizes = parse_hidden(a.hidden);
  o.deepsurv.activation = a.activation == "tanh" ? Activation::kTanh : Activation::kRelu;
  o.kernel.kind = a.kernel == "linear" ? KernelKind::kLinear
                  : a.kernel == "polynomial" ? KernelKind::kPolynomial
                                             : KernelKind::kRbf;
  o.deepsurv.validate();
  if (o.kernel.gamma > 0.0 || o.kernel.kind != KernelKind::kRbf) {
    auto k = o.kernel;
    if (k.gamma <= 0.0) k.gamma = 1.0;
    k.validate();
  }
  if (o.mtlr_bins < 1) throw ArgumentError("--bins must be >= 1");
  if (!(o.mtlr_c > 0.0)) throw ArgumentError("--mtlr-c must be > 0");
  if (!(o.ksvm_c > 0.0)) throw ArgumentError("--c must be > 0");
  if (o.rsf.n_trees < 1) throw ArgumentError("--trees must be >= 1");
  return o;
}

void add_model_flags(CLI::App* sub, ModelArgs& a) {
  auto& o = a.opts;
  sub->add_option("--ties", a.ties, "Cox tie handling")->check(CLI::IsMember({"efron", "breslow"}))->capture_default_str();
  sub->add_option("--max-iter", o.cox.max_iter, "Cox Newton iterations")->capture_default_str();
  sub->add_option("--ridge", o.cox.ridge, "Cox L2 penalty")->capture_default_str();
  sub->add_option("--bins", o.mtlr_bins, "MTLR intervals m (capped at the distinct event count)")->capture_default_str();
  sub->add_option("--mtlr-c", o.mtlr_c, "MTLR regularization C")->capture_default_str();
  sub->add_option("--trees", o.rsf.n_trees, "RSF number of trees")->capture_default_str();
  sub->add_option("--mtry", o.rsf.mtry, "RSF features tried per split (0 = ceil(sqrt(p)))")->capture_default_str();
  sub->add_option("--min-node-events", o.rsf.min_node_events, "RSF minimum events per node")->capture_default_str();
  sub->add_option("--max-depth", o.rsf.max_depth, "RSF depth limit (-1 = unlimited)")->capture_default_str();
  sub->add_option("--hidden", a.hidden, "DeepSurv hidden widths, comma separated, or 'none'")->capture_default_str();
  sub->add_option("--activation", a.activation, "DeepSurv activation")
      ->check(CLI::IsMember({"relu", "tanh"}))
      ->capture_default_str();
  sub->add_option("--lr", o.deepsurv.learning_rate, "DeepSurv learning rate")->capture_default_str();
  sub->add_option("--epochs", o.deepsurv.epochs, "DeepSurv epochs")->capture_default_str();
  sub->add_option("--weight-decay", o.deepsurv.weight_decay, "DeepSurv L2 weight decay")->capture_default_str();
  sub->add_option("--kernel", a.kernel, "KSVM kernel")
      ->check(CLI::IsMember({"linear", "rbf", "polynomial"}))
      ->capture_default_str();
  o.kernel.gamma = 0.0;
  sub->add_option("--gamma", o.kernel.gamma, "KSVM rbf width (0 = 1/p)")->capture_default_str();
  sub->add_option("--degree", o.kernel.degree, "KSVM polynomial degree")->capture_default_str();
  sub->add_option("--coef0", o.kernel.coef0, "KSVM polynomial offset")->capture_default_str();
  sub->add_option("--c", o.ksvm_c, "KSVM regularization C")->capture_default_str();
  sub->add_option("--ksvm-epochs", o.ksvm.epochs, "KSVM passes over the comparable pairs")->capture_default_str();
}

// Flat `key = value` config. Keys are long flag names; a key is skipped when
// the same flag already appears on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args, const std::set<std::string>& bool_flags) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;

  std::ifstream in(*path);
  if (!in) throw InputError("cannot open config file '" + *path + "'");
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };

  std::vector<std::string> extra;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key = value", line_no);
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty() || key == "config") throw ParseError("config: invalid key '" + key + "'", line_no);
    if (given(key)) continue;
    if (bool_flags.count(key)) {
      if (value == "true" || value == "1") extra.push_back("--" + key);
      else if (value != "false" && value != "0") throw ParseError("config: '" + key + "' expects true or false", line_no);
      continue;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

void require(const std::string& value, const char* flag, const char* verb) {
  if (value.empty()) throw ArgumentError(std::string(verb) + ": " + flag + " is required");
}

void emit_output(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") out << content;
  else write_text_file(path, content);
}

// ---- verbs -------------------------------------------------------------

void cmd_ingest(const GlobalArgs& g, std::ostream& out) {
  require(g.input, "--input", "ingest");
  const auto ds = load_csv(g.input);
  std::size_t missing_cells = 0, incomplete = 0, with_mvi = 0;
  for (const auto& r : ds.rows()) {
    const auto m = static_cast<std::size_t>(std::count_if(r.x.begin(), r.x.end(), is_missing));
    missing_cells += m;
    incomplete += m > 0;
    with_mvi += r.mvi.has_value();
  }
  if (g.format == "json") {
    const nlohmann::json j{{"schema_version", 1},
                           {"rows", ds.size()},
                           {"events", ds.n_events()},
                           {"censored", ds.n_censored()},
                           {"features", ds.feature_names()},
                           {"missing_cells", missing_cells},
                           {"incomplete_rows", incomplete},
                           {"mvi_rows", with_mvi}};
    out << j.dump(2) << '\n';
  } else {
    out << "rows: " << ds.size() << "\nevents: " << ds.n_events() << "\ncensored: " << ds.n_censored()
        << "\nfeatures (" << ds.n_features() << "):";
    for (const auto& f : ds.feature_names()) out << ' ' << f;
    out << "\nmissing cells: " << missing_cells << " in " << incomplete << " rows\nmvi present: " << with_mvi << '\n';
  }
  if (!g.out.empty()) save_csv(ds, g.out);
}

void cmd_km(const GlobalArgs& g, const std::vector<double>& times, double level, std::ostream& out) {
  require(g.input, "--input", "km");
  const auto ds = load_csv(g.input);
  const auto curve = fit_km(ds);
  const auto query = times.empty() ? event_times(curve) : times;
  const auto rows = summarize_at(curve, query, level);
  if (!g.out.empty() && fs::is_directory(g.out)) {
    const fs::path dir = g.out;
    write_text_file(dir / "km_summary.csv", render([&](std::ostream& o) { write_km_summary_csv(rows, o); }));
    write_text_file(dir / "km_curve.csv", render([&](std::ostream& o) { write_km_curve_csv(curve, o, level); }));
    write_text_file(dir / "km_summary.txt", format_km_table(rows, level));
    return;
  }
  std::string content;
  if (g.format == "csv") content = render([&](std::ostream& o) { write_km_summary_csv(rows, o); });
  else if (g.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      arr.push_back({{"time", r.query_time},
                     {"n_risk", r.n_risk},
                     {"n_event", r.n_event},
                     {"survival", r.survival},
                     {"std_error", r.std_error},
                     {"ci_lower", r.ci_lower},
                     {"ci_upper", r.ci_upper}});
    }
    content = nlohmann::json{{"schema_version", 1}, {"level", level}, {"rows", arr}}.dump(2) + "\n";
  } else {
    content = format_km_table(rows, level);
  }
  emit_output(content, g.out, out);
}

ModelArtifact fit_artifact(const std::string& name, const SurvivalDataset& ds, const ModelOptions& o,
                           bool standardize_inputs) {
  ModelArtifact a{CoxModel{}, ds.feature_names(), std::nullopt};
  if (standardize_inputs) {
    a.scaling = fit_scaling(ds);
    a.model = fit_named_model(name, apply_scaling(ds, *a.scaling), o);
  } else {
    a.model = fit_named_model(name, ds, o);
  }
  return a;
}

void cmd_fit(const GlobalArgs& g, const std::string& name, const ModelArgs& margs, std::ostream& out) {
  require(g.input, "--input", "fit");
  const auto ds = load_csv(g.input);
  (void)ds.design();  // rejects incomplete rows up front
  const auto opts = resolve(margs, g.seed);
  const auto artifact = fit_artifact(name, ds, opts, !margs.no_standardize);
  emit_output(to_json(artifact).dump(1) + "\n", g.out, out);
}

void cmd_predict(const GlobalArgs& g, const std::string& model_path, std::ostream& out) {
  require(g.input, "--input", "predict");
  require(model_path, "--model", "predict");
  const auto artifact = load_artifact(model_path);
  const auto ds = load_csv(g.input, artifact.input_features);
  (void)ds.design();
  std::ostringstream s;
  char buf[64];
  if (g.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : ds.rows()) arr.push_back({{"id", r.id}, {"risk_score", artifact.score_raw(r.x)}});
    s << nlohmann::json{{"schema_version", 1}, {"model", model_kind(artifact.model)}, {"predictions", arr}}.dump(2)
      << '\n';
  } else {
    s << "id,risk_score\n";
    for (const auto& r : ds.rows()) {
      std::snprintf(buf, sizeof buf, "%.17g", artifact.score_raw(r.x));
      s << r.id << ',' << buf << '\n';
    }
  }
  emit_output(s.str(), g.out, out);
}

void cmd_compare(const GlobalArgs& g, const std::vector<std::string>& models, const ModelArgs& margs,
                 std::ostream& out) {
  require(g.input, "--input", "compare");
  const auto ds = load_csv(g.input);
  const auto opts = resolve(margs, g.seed);
  const auto ev = fit_and_compare(ds, g.split, g.seed, models, opts, parse_tie_credit(margs.tie_credit));
  if (!g.out.empty()) {
    ensure_dir(g.out);
    const fs::path dir = g.out;
    write_text_file(dir / "report.json", to_json(ev.report).dump(2) + "\n");
    write_text_file(dir / "comparison.csv", render([&](std::ostream& o) { write_comparison_csv(ev.report, o); }));
  }
  if (g.format == "json") out << to_json(ev.report).dump(2) << '\n';
  else if (g.format == "csv") write_comparison_csv(ev.report, out);
  else out << format_report_text(ev.report);
}

void cmd_weights(const GlobalArgs& g, const std::string& model_path, const ModelArgs& margs, std::ostream& out) {
  std::optional<MtlrModel> model;
  if (!model_path.empty()) {
    const auto artifact = load_artifact(model_path);
    const auto* m = std::get_if<MtlrModel>(&artifact.model);
    if (m == nullptr) throw ArgumentError("weights: artifact holds a " + model_kind(artifact.model) + " model, not mtlr");
    model = *m;
  } else {
    require(g.input, "--input or --model", "weights");
    const auto ds = load_csv(g.input);
    (void)ds.design();
    const auto artifact = fit_artifact("mtlr", ds, resolve(margs, g.seed), !margs.no_standardize);
    model = std::get<MtlrModel>(artifact.model);
  }
  emit_output(render([&](std::ostream& o) { write_weight_csv(weight_matrix(*model), o); }), g.out, out);
}

void cmd_regress(const GlobalArgs& g, const std::string& response, const std::vector<std::string>& regressors,
                 std::ostream& out) {
  require(g.input, "--input", "regress-mvi");
  const auto ds = load_csv(g.input);
  const auto fit = fit_ols(ds, response, regressors.empty() ? default_mvi_regressors() : regressors);
  emit_output(g.format == "json" ? to_json(fit).dump(2) + "\n" : format_ols_text(fit), g.out, out);
}

struct SynthArgs {
  std::string kind;
  std::size_t n = 300;
  std::vector<double> beta{0.8, -0.5, 0.0};
  double shape = 1.5;
  double scale = 100.0;
  int censor = 120;
  std::string law = "normal";
};

void cmd_synth(const GlobalArgs& g, const SynthArgs& s, std::ostream& out) {
  SurvivalDataset ds;
  if (s.kind == "table1") {
    ds = table1_replica();
  } else {
    WeibullConfig cfg;
    cfg.n = s.n;
    cfg.beta = s.beta;
    cfg.shape = s.shape;
    cfg.scale = s.scale;
    cfg.censor_time = s.censor;
    cfg.covariate_law = s.law == "uniform" ? CovariateLaw::kUniform : CovariateLaw::kStandardNormal;
    cfg.seed = g.seed;
    ds = generate_weibull(cfg);
  }
  emit_output(render([&](std::ostream& o) { write_csv(ds, o); }), g.out, out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"survkit: survival analysis toolkit for right-censored time-to-event data", "survkit"};
  app.set_help_all_flag("--help-all", "Print help for every verb");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--input", g.input, "Input CSV (id,time,status,<covariates...>[,mvi])");
  app.add_option("--out", g.out, "Output file or directory (default: stdout)");
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--split", g.split, "Training fraction for the train/test split")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--config", g.config, "Flat 'key = value' config file; command-line flags win");

  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and summarize it; --out rewrites it as CSV");

  std::vector<double> km_times;
  double km_level = 0.95;
  auto* km = app.add_subcommand(
      "km", "Kaplan-Meier summary table; --out DIR writes km_summary.csv, km_curve.csv and km_summary.txt");
  km->add_option("--times", km_times, "Query times (default: every event time)")->delimiter(',');
  km->add_option("--level", km_level, "Confidence level")->capture_default_str();

  ModelArgs fit_args;
  std::string fit_model;
  auto* fit = app.add_subcommand("fit", "Fit one model on the whole input and write its JSON artifact");
  fit->add_option("model", fit_model, "cox | mtlr | rsf | deepsurv | ksvm")
      ->required()
      ->check(CLI::IsMember(kModelNames));
  fit->add_flag("--no-standardize", fit_args.no_standardize, "Fit on raw covariates");
  add_model_flags(fit, fit_args);

  std::string predict_model;
  auto* predict = app.add_subcommand("predict", "Score rows with a saved artifact (CSV id,risk_score)");
  predict->add_option("--model", predict_model, "Artifact written by fit or pipeline")->required();

  ModelArgs cmp_args;
  std::vector<std::string> cmp_models = kModelNames;
  auto* compare = app.add_subcommand("compare", "Fit models on the training split and rank them by test C-index");
  compare->add_option("--models", cmp_models, "Models to compare")
      ->delimiter(',')
      ->check(CLI::IsMember(kModelNames))
      ->capture_default_str();
  compare->add_option("--tie-credit", cmp_args.tie_credit, "C-index credit for tied risk scores")
      ->check(CLI::IsMember({"half", "zero"}))
      ->capture_default_str();
  add_model_flags(compare, cmp_args);

  ModelArgs w_args;
  std::string w_model;
  auto* weights = app.add_subcommand("weights", "MTLR weight matrix as CSV feature,boundary_time,weight");
  weights->add_option("--model", w_model, "MTLR artifact (otherwise fit from --input)");
  weights->add_flag("--no-standardize", w_args.no_standardize, "Fit on raw covariates");
  add_model_flags(weights, w_args);

  std::string response = kMviColumn;
  std::vector<std::string> regressors;
  auto* regress = app.add_subcommand("regress-mvi", "OLS regression of the vulnerability index with inference");
  regress->add_option("--response", response, "Response column")->capture_default_str();
  regress->add_option("--regressors", regressors, "Regressor columns (default: the nine risk/vulnerability terms)")
      ->delimiter(',');

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a dataset: table1 replica or seeded Weibull draws");
  synth->add_option("kind", synth_args.kind, "table1 | weibull")->required()->check(CLI::IsMember({"table1", "weibull"}));
  synth->add_option("--n", synth_args.n, "Weibull: subjects")->capture_default_str();
  synth->add_option("--beta", synth_args.beta, "Weibull: log-hazard coefficients")
      ->delimiter(',')
      ->capture_default_str();
  synth->add_option("--shape", synth_args.shape, "Weibull: shape k")->capture_default_str();
  synth->add_option("--scale", synth_args.scale, "Weibull: scale lambda")->capture_default_str();
  synth->add_option("--censor", synth_args.censor, "Weibull: administrative censoring month")->capture_default_str();
  synth->add_option("--law", synth_args.law, "Weibull: covariate distribution")
      ->check(CLI::IsMember({"normal", "uniform"}))
      ->capture_default_str();

  ModelArgs pipe_args;
  std::vector<std::string> pipe_models = kModelNames;
  std::vector<std::string> pipe_formats{"json", "csv", "text"};
  auto* pipeline = app.add_subcommand(
      "pipeline",
      "Split, standardize, fit, compare and write report.json, model artifacts, km and weight CSVs into --out");
  pipeline->add_option("--models", pipe_models, "Models to fit")
      ->delimiter(',')
      ->check(CLI::IsMember(kModelNames))
      ->capture_default_str();
  pipeline->add_option("--formats", pipe_formats, "Report formats besides report.json")
      ->delimiter(',')
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  pipeline->add_option("--tie-credit", pipe_args.tie_credit, "C-index credit for tied risk scores")
      ->check(CLI::IsMember({"half", "zero"}))
      ->capture_default_str();
  add_model_flags(pipeline, pipe_args);

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    args = merge_config(std::move(args), {"no-standardize"});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*ingest) cmd_ingest(g, out);
    else if (*km) cmd_km(g, km_times, km_level, out);
    else if (*fit) cmd_fit(g, fit_model, fit_args, out);
    else if (*predict) cmd_predict(g, predict_model, out);
    else if (*compare) cmd_compare(g, cmp_models, cmp_args, out);
    else if (*weights) cmd_weights(g, w_model, w_args, out);
    else if (*regress) cmd_regress(g, response, regressors, out);
    else if (*synth) cmd_synth(g, synth_args, out);
    else if (*pipeline) {
      PipelineConfig cfg;
      cfg.input = g.input;
      cfg.out_dir = g.out;
      cfg.fraction = g.split;
      cfg.seed = g.seed;
      cfg.models = pipe_models;
      cfg.formats = pipe_formats;
      cfg.tie_credit = parse_tie_credit(pipe_args.tie_credit);
      cfg.options = resolve(pipe_args, g.seed);
      const auto result = run_pipeline(cfg);
      out << format_report_text(result.report);
      for (const auto& p : result.written) out << "wrote " << p.string() << '\n';
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace survkit
