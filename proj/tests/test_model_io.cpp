#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "survkit/error.hpp"
#include "survkit/model_io.hpp"

using namespace survkit;
using nlohmann::json;

namespace {

SurvivalDataset sample() {
  Rng rng(4);
  return oracle::random_dataset(rng, 40, 2, 50);
}

std::vector<AnyModel> fitted_models(const SurvivalDataset& ds) {
  std::vector<AnyModel> out;
  auto cox = fit_cox(ds);
  cox.baseline = baseline_cumhaz(cox, ds);
  out.emplace_back(cox);
  out.emplace_back(fit_mtlr(ds, make_time_grid(ds, 4), 1.0));
  RsfConfig rsf;
  rsf.n_trees = 5;
  rsf.seed = 2;
  out.emplace_back(fit_rsf(ds, rsf));
  NetworkSpec net;
  net.hidden_sizes = {3};
  net.epochs = 20;
  out.emplace_back(fit_deepsurv(ds, net));
  out.emplace_back(fit_ksvm(ds, {KernelKind::kRbf, 0.5}, 1.0, {20, 1}));
  return out;
}

}  // namespace

TEST_CASE("every model kind round-trips through JSON text") {
  const auto ds = sample();
  const std::vector<std::string> kinds{"cox", "mtlr", "rsf", "deepsurv", "ksvm"};
  const auto models = fitted_models(ds);
  for (std::size_t k = 0; k < models.size(); ++k) {
    CAPTURE(kinds[k]);
    CHECK(model_kind(models[k]) == kinds[k]);
    const auto j = to_json(models[k]);
    CHECK(j.at("model") == kinds[k]);
    CHECK(j.at("version") == kArtifactVersion);
    const auto back = model_from_json(json::parse(j.dump()));
    CHECK(model_kind(back) == kinds[k]);
    for (const auto& r : ds.rows()) CHECK(risk_score(back, r.x) == risk_score(models[k], r.x));
    CHECK(to_json(back) == j);
  }
}

TEST_CASE("artifact applies its scaling to raw rows") {
  const auto raw = sample();
  const auto scaling = fit_scaling(raw);
  const auto scaled = apply_scaling(raw, scaling);
  ModelArtifact a{fit_cox(scaled), raw.feature_names(), scaling};
  const auto path = std::filesystem::temp_directory_path() / "survkit_model_io_test.json";
  save_artifact(a, path);
  const auto back = load_artifact(path);
  std::filesystem::remove(path);
  CHECK(back.input_features == raw.feature_names());
  REQUIRE(back.scaling.has_value());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(back.score_raw(raw[i].x) == risk_score(a.model, scaled[i].x));
  }
  CHECK_THROWS_AS(back.score_raw(std::vector<double>{1.0}), ArgumentError);

  ModelArtifact plain{fit_cox(raw), raw.feature_names(), std::nullopt};
  const auto again = artifact_from_json(json::parse(to_json(plain).dump()));
  CHECK_FALSE(again.scaling.has_value());
  CHECK(again.score_raw(raw[0].x) == risk_score(plain.model, raw[0].x));
}

TEST_CASE("malformed artifacts are schema errors") {
  const auto ds = sample();
  const auto good = to_json(AnyModel{fit_cox(ds)});

  auto j = good;
  j["model"] = "bayes";
  CHECK_THROWS_AS(model_from_json(j), SchemaError);
  j = good;
  j["version"] = 99;
  CHECK_THROWS_AS(model_from_json(j), SchemaError);
  j = good;
  j["beta"] = std::vector<double>{1.0};
  CHECK_THROWS_AS(model_from_json(j), SchemaError);
  j = good;
  j.erase("beta");
  CHECK_THROWS_AS(model_from_json(j), SchemaError);
  CHECK_THROWS_AS(model_from_json(json::array()), SchemaError);

  const auto path = std::filesystem::temp_directory_path() / "survkit_model_io_bad.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_artifact(path), SchemaError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_artifact(path), InputError);
}
