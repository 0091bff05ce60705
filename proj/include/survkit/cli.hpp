#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "survkit/cox.hpp"
#include "survkit/data.hpp"
#include "survkit/deepsurv.hpp"
#include "survkit/forest.hpp"
#include "survkit/ksvm.hpp"
#include "survkit/metrics.hpp"
#include "survkit/model_io.hpp"
#include "survkit/mtlr.hpp"

namespace survkit {

inline const std::vector<std::string> kModelNames{"cox", "mtlr", "rsf", "deepsurv", "ksvm"};

// Hyperparameters for every model the toolkit can fit.
struct ModelOptions {
  CoxConfig cox;
  std::size_t mtlr_bins = 10;  // capped at the number of distinct event times
  double mtlr_c = 1.0;
  MtlrConfig mtlr;
  RsfConfig rsf;
  NetworkSpec deepsurv;
  KernelSpec kernel{KernelKind::kRbf, 0.0};  // gamma <= 0 means 1/p
  double ksvm_c = 1.0;
  KsvmConfig ksvm;
  std::uint64_t seed = 42;     // overrides the per-model seeds
};

// Fits `name` on an already standardized training set.
AnyModel fit_named_model(const std::string& name, const SurvivalDataset& train, const ModelOptions& options);

struct PipelineConfig {
  std::filesystem::path input;
  double fraction = 0.7;
  std::uint64_t seed = 42;
  std::vector<std::string> models = kModelNames;
  ModelOptions options;
  std::filesystem::path out_dir;
  std::vector<std::string> formats{"json", "csv", "text"};
  TieCredit tie_credit = TieCredit::kHalf;

  void validate() const;
};

struct PipelineResult {
  ModelComparisonReport report;
  std::vector<std::filesystem::path> written;
};

// Load, split, standardize, fit, evaluate and write every artifact.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Comparison rows `model,c_index`.
void write_comparison_csv(const ModelComparisonReport& report, std::ostream& out);

// Entry point of the `survkit` executable. Returns the process exit code:
// 0 success, 1 runtime failure, 2 invalid input or configuration.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace survkit
