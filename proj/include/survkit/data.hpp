#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace survkit {

// Marker for an absent covariate cell. Only the OLS module consumes rows
// containing it; model fitting rejects them.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return v != v; }

struct SurvivalRow {
  std::string id;
  int time = 1;     // months, >= 1
  int status = 0;   // 1 = event observed, 0 = right-censored
  std::vector<double> x;
  std::optional<double> mvi;

  bool complete() const;
};

// Rows of right-censored observations sharing one covariate schema.
// Invariants are checked on construction and the object is immutable after.
class SurvivalDataset {
 public:
  SurvivalDataset() = default;
  SurvivalDataset(std::vector<SurvivalRow> rows, std::vector<std::string> feature_names);

  const std::vector<SurvivalRow>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& feature_names() const noexcept { return features_; }
  const SurvivalRow& operator[](std::size_t i) const { return rows_[i]; }

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t n_features() const noexcept { return features_.size(); }
  std::size_t n_events() const;
  std::size_t n_censored() const { return size() - n_events(); }
  bool complete() const;

  std::vector<double> times() const;
  std::vector<int> statuses() const;

  // n x p covariate matrix; throws ValidationError naming the first row
  // with an absent covariate.
  Eigen::MatrixXd design() const;

  // Position of a feature column, if present.
  std::optional<std::size_t> feature_index(const std::string& name) const;

  SurvivalDataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<SurvivalRow> rows_;
  std::vector<std::string> features_;
};

// Reserved CSV column names.
inline constexpr const char* kIdColumn = "id";
inline constexpr const char* kTimeColumn = "time";
inline constexpr const char* kStatusColumn = "status";
inline constexpr const char* kMviColumn = "mvi";

// Parses `id,time,status,<features...>[,mvi]`. When `expected_features` is
// given the covariate columns must match it exactly (names and order).
SurvivalDataset read_csv(std::istream& in,
                         const std::optional<std::vector<std::string>>& expected_features = std::nullopt);
SurvivalDataset load_csv(const std::filesystem::path& path,
                         const std::optional<std::vector<std::string>>& expected_features = std::nullopt);

void write_csv(const SurvivalDataset& ds, std::ostream& out);
void save_csv(const SurvivalDataset& ds, const std::filesystem::path& path);

struct TrainTestSplit {
  SurvivalDataset train;
  SurvivalDataset test;
};

// Train receives floor(fraction * n) rows drawn without replacement; both
// parts keep the original row order.
TrainTestSplit train_test_split(const SurvivalDataset& ds, double fraction, std::uint64_t seed);

struct ScalingParams {
  std::vector<double> means;   // length p (all input columns)
  std::vector<double> sds;     // length p; 0 for dropped columns
  std::vector<std::size_t> retained_columns;

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<std::string> retained_names(const std::vector<std::string>& names) const;
};

// Column statistics from `train` (sample sd, n-1 denominator).
ScalingParams fit_scaling(const SurvivalDataset& train);
SurvivalDataset apply_scaling(const SurvivalDataset& ds, const ScalingParams& params);

struct StandardizedSplit {
  SurvivalDataset train;
  SurvivalDataset test;
  ScalingParams params;
};

StandardizedSplit standardize(const SurvivalDataset& train, const SurvivalDataset& test);

}  // namespace survkit
