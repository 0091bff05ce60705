#include "survkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "survkit/error.hpp"
#include "survkit/random.hpp"

namespace survkit {

bool SurvivalRow::complete() const {
  return std::none_of(x.begin(), x.end(), is_missing);
}

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRow> rows, std::vector<std::string> feature_names)
    : rows_(std::move(rows)), features_(std::move(feature_names)) {
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (r.x.size() != features_.size()) {
      throw ValidationError("row '" + r.id + "' has " + std::to_string(r.x.size()) + " covariates, expected " +
                            std::to_string(features_.size()));
    }
    if (r.time < 1) throw ValidationError("row '" + r.id + "': time must be >= 1");
    if (r.status != 0 && r.status != 1) throw ValidationError("row '" + r.id + "': status must be 0 or 1");
    for (double v : r.x) {
      if (!is_missing(v) && !std::isfinite(v)) throw ValidationError("row '" + r.id + "': non-finite covariate");
    }
    if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
  }
}

std::size_t SurvivalDataset::n_events() const {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [](const SurvivalRow& r) { return r.status == 1; }));
}

bool SurvivalDataset::complete() const {
  return std::all_of(rows_.begin(), rows_.end(), [](const SurvivalRow& r) { return r.complete(); });
}

std::vector<double> SurvivalDataset::times() const {
  std::vector<double> t;
  t.reserve(rows_.size());
  for (const auto& r : rows_) t.push_back(r.time);
  return t;
}

std::vector<int> SurvivalDataset::statuses() const {
  std::vector<int> s;
  s.reserve(rows_.size());
  for (const auto& r : rows_) s.push_back(r.status);
  return s;
}

Eigen::MatrixXd SurvivalDataset::design() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(n_features()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!rows_[i].complete()) {
      throw ValidationError("row '" + rows_[i].id + "' has a missing covariate");
    }
    for (std::size_t j = 0; j < features_.size(); ++j) x(i, j) = rows_[i].x[j];
  }
  return x;
}

std::optional<std::size_t> SurvivalDataset::feature_index(const std::string& name) const {
  auto it = std::find(features_.begin(), features_.end(), name);
  if (it == features_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - features_.begin());
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<SurvivalRow> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(rows_.at(i));
  return SurvivalDataset(std::move(out), features_);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Comma split with minimal double-quote support (quoted ids).
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool is_absent_token(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string format_real(double v) {
  // Shortest representation that round-trips exactly.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

SurvivalDataset read_csv(std::istream& in, const std::optional<std::vector<std::string>>& expected_features) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw SchemaError("missing header row");

  std::optional<std::size_t> id_col, time_col, status_col, mvi_col;
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (!seen.insert(name).second) throw SchemaError("duplicate column '" + name + "'");
    if (name == kIdColumn) id_col = c;
    else if (name == kTimeColumn) time_col = c;
    else if (name == kStatusColumn) status_col = c;
    else if (name == kMviColumn) mvi_col = c;
    else {
      if (name.empty()) throw SchemaError("empty column name at position " + std::to_string(c + 1));
      feature_cols.push_back(c);
      feature_names.push_back(name);
    }
  }
  if (!id_col) throw SchemaError("missing required column: id");
  if (!time_col) throw SchemaError("missing required column: time");
  if (!status_col) throw SchemaError("missing required column: status");
  if (expected_features && *expected_features != feature_names) {
    throw SchemaError("covariate columns do not match the expected schema");
  }

  std::vector<SurvivalRow> rows;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    }
    SurvivalRow row;
    row.id = fields[*id_col];
    if (row.id.empty()) throw ParseError("empty id", line_no);
    if (!ids.insert(row.id).second) throw ValidationError("duplicate id '" + row.id + "' at line " + std::to_string(line_no));

    const auto t = parse_double(fields[*time_col]);
    if (!t || *t != std::floor(*t) || *t < 1 || *t > 1e9) {
      throw ParseError("time must be a positive integer, got '" + fields[*time_col] + "'", line_no);
    }
    row.time = static_cast<int>(*t);
    const auto s = parse_double(fields[*status_col]);
    if (!s || (*s != 0.0 && *s != 1.0)) {
      throw ParseError("status must be 0 or 1, got '" + fields[*status_col] + "'", line_no);
    }
    row.status = static_cast<int>(*s);

    row.x.reserve(feature_cols.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const auto& cell = fields[feature_cols[k]];
      if (is_absent_token(cell)) {
        row.x.push_back(kMissing);
        continue;
      }
      const auto v = parse_double(cell);
      if (!v) throw ParseError("non-numeric value '" + cell + "' in column '" + feature_names[k] + "'", line_no);
      row.x.push_back(*v);
    }
    if (mvi_col) {
      const auto& cell = fields[*mvi_col];
      if (!is_absent_token(cell)) {
        const auto v = parse_double(cell);
        if (!v) throw ParseError("non-numeric value '" + cell + "' in column 'mvi'", line_no);
        row.mvi = *v;
      }
    }
    rows.push_back(std::move(row));
  }
  return SurvivalDataset(std::move(rows), std::move(feature_names));
}

SurvivalDataset load_csv(const std::filesystem::path& path,
                         const std::optional<std::vector<std::string>>& expected_features) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_csv(in, expected_features);
}

void write_csv(const SurvivalDataset& ds, std::ostream& out) {
  const bool has_mvi =
      std::any_of(ds.rows().begin(), ds.rows().end(), [](const SurvivalRow& r) { return r.mvi.has_value(); });
  out << "id,time,status";
  for (const auto& f : ds.feature_names()) out << ',' << quote_if_needed(f);
  if (has_mvi) out << ",mvi";
  out << '\n';
  for (const auto& r : ds.rows()) {
    out << quote_if_needed(r.id) << ',' << r.time << ',' << r.status;
    for (double v : r.x) {
      out << ',';
      if (!is_missing(v)) out << format_real(v);
    }
    if (has_mvi) {
      out << ',';
      if (r.mvi) out << format_real(*r.mvi);
    }
    out << '\n';
  }
}

void save_csv(const SurvivalDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_csv(ds, out);
}

// ---------------------------------------------------------------------------
// Splitting and scaling

TrainTestSplit train_test_split(const SurvivalDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("split fraction must lie in (0, 1)");
  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw ArgumentError("split fraction " + format_real(fraction) + " leaves an empty part for n=" + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

std::vector<double> ScalingParams::apply(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(retained_columns.size());
  for (auto c : retained_columns) {
    const double v = x[c];
    out.push_back(is_missing(v) ? kMissing : (v - means[c]) / sds[c]);
  }
  return out;
}

std::vector<std::string> ScalingParams::retained_names(const std::vector<std::string>& names) const {
  std::vector<std::string> out;
  for (auto c : retained_columns) out.push_back(names.at(c));
  return out;
}

ScalingParams fit_scaling(const SurvivalDataset& train) {
  if (train.empty()) throw ArgumentError("cannot standardize an empty dataset");
  const std::size_t p = train.n_features();
  ScalingParams params;
  params.means.assign(p, 0.0);
  params.sds.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : train.rows()) {
      if (!is_missing(r.x[j])) {
        sum += r.x[j];
        ++count;
      }
    }
    if (count < 2) continue;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& r : train.rows()) {
      if (!is_missing(r.x[j])) ss += (r.x[j] - mean) * (r.x[j] - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(count - 1));
    params.means[j] = mean;
    // Relative cutoff so that float noise on a constant column counts as zero.
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      params.sds[j] = sd;
      params.retained_columns.push_back(j);
    }
  }
  if (params.retained_columns.empty()) throw ValidationError("all covariate columns have zero variance");
  return params;
}

SurvivalDataset apply_scaling(const SurvivalDataset& ds, const ScalingParams& params) {
  std::vector<SurvivalRow> rows;
  rows.reserve(ds.size());
  for (const auto& r : ds.rows()) {
    SurvivalRow out = r;
    out.x = params.apply(r.x);
    rows.push_back(std::move(out));
  }
  return SurvivalDataset(std::move(rows), params.retained_names(ds.feature_names()));
}

StandardizedSplit standardize(const SurvivalDataset& train, const SurvivalDataset& test) {
  if (train.feature_names() != test.feature_names()) {
    throw ArgumentError("train and test covariate columns differ");
  }
  auto params = fit_scaling(train);
  auto train_out = apply_scaling(train, params);
  auto test_out = apply_scaling(test, params);
  return {std::move(train_out), std::move(test_out), std::move(params)};
}

}  // namespace survkit
