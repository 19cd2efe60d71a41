#include "ssig/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ssig/error.hpp"
#include "ssig/random.hpp"

namespace ssig {

void Standardization::inverse_features(std::span<double> row) const noexcept {
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = row[c] * feature_scale[c] + feature_mean[c];
}

void Dataset::validate() const {
  if (targets.size() != features.rows()) throw ShapeError("dataset row counts disagree");
  if (!feature_names.empty() && feature_names.size() != features.cols()) {
    throw ShapeError("dataset feature name count disagrees with columns");
  }
}

namespace {

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t c = 0; c < p; ++c) names[c] = "x" + std::to_string(c + 1);
  return names;
}

}  // namespace

std::vector<Matrix> sim1_teacher_weights() {
  return {Matrix{{-5.0, 10.0, 15.0}, {5.0, -15.0, 10.0}}, Matrix{{4.0, -3.0, 3.0}}};
}

Architecture sim1_teacher_architecture() {
  return Architecture{{2, 2, 1}, Activation::sigmoid, Task::regression};
}

Dataset gen_sim1(std::size_t n, std::uint64_t seed, double noise_multiplier) {
  if (n < 2) throw ArgumentError("gen_sim1: n must be at least 2");
  RandomStream stream(seed, stream_id(StreamPurpose::data, 1));
  Dataset ds;
  ds.features = Matrix(n, 2);
  for (double& v : ds.features.values()) v = 2.0 * stream.next_uniform() - 1.0;
  const auto weights = sim1_teacher_weights();
  const Matrix y0 = forward_batch(sim1_teacher_architecture(), weights, ds.features).output();

  double mean = 0.0;
  for (double v : y0.values()) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y0.values()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  const double sd = noise_multiplier * std::sqrt(var);

  std::vector<double> noise(n);
  stream.fill_normal(noise);
  ds.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.targets[i] = y0(i, 0) + sd * noise[i];
  ds.feature_names = default_names(2);
  return ds;
}

double sim2_mean(std::span<const double> x) noexcept {
  return 7.0 * x[1] / (1.0 + x[0] * x[0]) + std::sin(x[2] * x[3]) + 2.0 * x[4];
}

Dataset gen_sim2(std::size_t n, std::uint64_t seed, double noise_sd) {
  if (n < 2) throw ArgumentError("gen_sim2: n must be at least 2");
  RandomStream stream(seed, stream_id(StreamPurpose::data, 2));
  Dataset ds;
  ds.features = Matrix(n, 5);
  stream.fill_normal(ds.features.values());
  std::vector<double> eps(n);
  stream.fill_normal(eps);
  ds.targets.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.targets[i] = sim2_mean(ds.features.row(i)) + noise_sd * eps[i];
  ds.feature_names = default_names(5);
  return ds;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string t = trim(cell);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ParseError("non-numeric cell '" + t + "' at row " + std::to_string(row) + ", column " +
                     std::to_string(col));
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column, Task task) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header row");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 2) throw FormatError(path.string() + ": need at least one feature and a target");
  for (const auto& h : header) {
    double tmp = 0.0;
    auto res = std::from_chars(h.data(), h.data() + h.size(), tmp);
    if (!h.empty() && res.ec == std::errc() && res.ptr == h.data() + h.size()) {
      throw FormatError(path.string() + ": missing header row (first row is numeric)");
    }
  }
  std::size_t target = header.size() - 1;
  if (!target_column.empty()) {
    auto it = std::find(header.begin(), header.end(), target_column);
    if (it == header.end()) throw FormatError(path.string() + ": no column named " + target_column);
    target = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<double> feats;
  std::vector<double> targets;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], row, c + 1);
      if (c == target) {
        if (task == Task::classification && (v < 0.0 || v != std::floor(v))) {
          throw ParseError("class label '" + trim(cells[c]) + "' at row " + std::to_string(row) +
                           ", column " + std::to_string(c + 1) + " is not a nonnegative integer");
        }
        targets.push_back(v);
      } else {
        feats.push_back(v);
      }
    }
  }
  if (targets.empty()) throw FormatError(path.string() + ": no data rows");

  Dataset ds;
  ds.task = task;
  const std::size_t p = header.size() - 1;
  ds.features = Matrix(targets.size(), p, std::move(feats));
  ds.targets = std::move(targets);
  ds.target_name = header[target];
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target) ds.feature_names.push_back(header[c]);
  }
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const auto names = ds.feature_names.empty() ? default_names(ds.num_features()) : ds.feature_names;
  for (const auto& n : names) out << n << ',';
  out << ds.target_name << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) out << format_double(v) << ',';
    out << format_double(ds.targets[i]) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.task = ds.task;
  out.feature_names = ds.feature_names;
  out.target_name = ds.target_name;
  out.standardization = ds.standardization;
  out.features = Matrix(rows.size(), ds.num_features());
  out.targets.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = ds.features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.targets[i] = ds.targets[rows[i]];
  }
  return out;
}

SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("split: fraction must lie in (0,1)");
  }
  const std::size_t n = ds.size();
  if (n < 2) throw ArgumentError("split: need at least 2 rows");
  RandomStream stream(seed, stream_id(StreamPurpose::split));
  auto perm = random_permutation(stream, n);
  auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitResult r;
  r.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  r.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  r.train = subset(ds, r.train_rows);
  r.test = subset(ds, r.test_rows);
  return r;
}

StandardizeResult standardize(const Dataset& train, const Dataset& test) {
  const std::size_t n = train.size();
  const std::size_t p = train.num_features();
  if (n < 2) throw ArgumentError("standardize: need at least 2 training rows");
  if (test.num_features() != p) throw ShapeError("standardize: feature counts differ");

  Standardization st;
  st.feature_mean.assign(p, 0.0);
  st.feature_scale.assign(p, 1.0);
  auto column_stats = [n](auto&& get) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += get(i);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (get(i) - mean) * (get(i) - mean);
    var /= static_cast<double>(n);
    return std::pair{mean, std::sqrt(var)};
  };
  for (std::size_t c = 0; c < p; ++c) {
    auto [mean, sd] = column_stats([&](std::size_t i) { return train.features(i, c); });
    if (sd > 0.0) {
      st.feature_mean[c] = mean;
      st.feature_scale[c] = sd;
    }
  }
  if (train.task == Task::regression) {
    auto [mean, sd] = column_stats([&](std::size_t i) { return train.targets[i]; });
    st.targets = true;
    if (sd > 0.0) {
      st.target_mean = mean;
      st.target_scale = sd;
    }
  }

  auto apply = [&st, p](const Dataset& ds) {
    Dataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto row = out.features.row(i);
      for (std::size_t c = 0; c < p; ++c) row[c] = (row[c] - st.feature_mean[c]) / st.feature_scale[c];
    }
    if (st.targets) {
      for (double& y : out.targets) y = (y - st.target_mean) / st.target_scale;
    }
    out.standardization = st;
    return out;
  };
  return {apply(train), apply(test), st};
}

}  // namespace ssig
