#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssig/matrix.hpp"
#include "ssig/model.hpp"
#include "ssig/objective.hpp"

namespace ssig {

struct Standardization {
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  bool targets = false;  // whether regression targets were z-scored
  double target_mean = 0.0;
  double target_scale = 1.0;

  double inverse_target(double y) const noexcept { return y * target_scale + target_mean; }
  void inverse_features(std::span<double> row) const noexcept;
};

struct Dataset {
  Matrix features;              // n x p
  std::vector<double> targets;  // regression values or class indices
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  Task task = Task::regression;
  std::optional<Standardization> standardization;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t num_features() const noexcept { return features.cols(); }
  BatchView view() const noexcept { return {features, targets, {}}; }
  void validate() const;
};

// Teacher 2-2-1 sigmoid network of Simulation Study I as realized weight
// matrices (bias in column 0).
std::vector<Matrix> sim1_teacher_weights();
Architecture sim1_teacher_architecture();

// X ~ U([-1,1]^2), y = teacher(X) + N(0, s^2), s = noise_multiplier * sd(teacher(X)).
Dataset gen_sim1(std::size_t n, std::uint64_t seed, double noise_multiplier = 0.05);

// Five iid N(0,1) covariates, y = 7 x2 / (1 + x1^2) + sin(x3 x4) + 2 x5 + N(0,1).
Dataset gen_sim2(std::size_t n, std::uint64_t seed, double noise_sd = 1.0);

// Noise-free regression function of Simulation Study II.
double sim2_mean(std::span<const double> x) noexcept;

// Header row required; target is the named column or the last one.
// Throws ParseError (naming row and column) or FormatError.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column = "",
                 Task task = Task::regression);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Random permutation split with ceil(fraction * n) training rows.
SplitResult split(const Dataset& ds, double train_fraction, std::uint64_t seed);

struct StandardizeResult {
  Dataset train;
  Dataset test;
  Standardization stats;
};

// z-scores features (and regression targets) with training statistics.
// Constant columns keep mean 0 and scale 1.
StandardizeResult standardize(const Dataset& train, const Dataset& test);

}  // namespace ssig
