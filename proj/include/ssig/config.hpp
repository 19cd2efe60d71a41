#pragma once

// Run configuration: a flat `key = value` document, one key per line, '#'
// starts a comment. List values are comma separated. A `preset` key loads
// the named preset first; every other key overrides it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssig/model.hpp"
#include "ssig/trainer.hpp"

namespace ssig {

struct RunConfig {
  std::string preset;

  // architecture
  std::vector<std::size_t> hidden;
  Activation activation = Activation::sigmoid;
  Task task = Task::regression;
  Mode mode = Mode::ssig;
  InitOptions init;

  // prior
  double sigma0_2 = 1.0;
  double sigma_e2 = 1.0;
  std::vector<double> lambda;  // explicit override, length L+1
  std::vector<double> C;       // explicit constants; empty = select automatically
  std::vector<double> B;       // norm bounds; empty = k_l + 1
  double lambda_floor = 1e-50;

  TrainConfig train;
  bool seed_given = false;

  // data: exactly one of `dataset` (sim1 | sim2) or `csv`
  std::string dataset;
  std::string csv;
  std::string test_csv;
  std::string target_column;
  std::size_t n_train = 3000;
  std::size_t n_test = 1000;
  double train_fraction = 0.9;
  bool standardize = false;

  std::string out_dir = "out";
  std::string resume;
};

// Every recognised key in serialization order.
const std::vector<std::string>& run_config_keys();

// Applies a preset's values to `cfg`.
void apply_preset(RunConfig& cfg, const Preset& preset);

// Parses the document. Throws ConfigError listing every unknown key,
// malformed value and violated constraint.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical document with every key written explicitly.
std::string serialize_run_config(const RunConfig& cfg);

// Constraint violations; empty when valid.
std::vector<std::string> validate_run_config(const RunConfig& cfg);

}  // namespace ssig
