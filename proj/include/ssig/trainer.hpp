#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssig/data.hpp"
#include "ssig/eval.hpp"
#include "ssig/model.hpp"
#include "ssig/objective.hpp"

namespace ssig {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 0;  // 0 = full batch
  std::size_t max_epochs = 1000;
  std::size_t mc_samples = 1;  // S
  double tau = 0.5;
  double elbo_tol = 1e-4;       // relative change of the windowed mean loss
  std::size_t elbo_window = 50;
  bool stop_on_convergence = true;
  std::uint64_t seed = 0;
  AdamConfig adam;
  std::size_t log_every = 10;        // trace row cadence (epochs)
  std::size_t checkpoint_every = 0;  // 0 = no intermediate checkpoints
  std::size_t metrics_window = 1000; // RMSE/accuracy evaluated in the last N epochs
  std::size_t eval_samples = kDefaultPredictionSamples;
  MaskMode mask_mode = MaskMode::hard;

  void validate(std::size_t n) const;
};

// First and second moments per parameter block (see parameter_blocks).
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;

  static AdamState zeros_like(VariationalState& state);
};

// One bias-corrected Adam update at 1-based `step`. Updates params, m and v
// in place. ShapeError when the spans disagree in length.
void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m,
               std::span<double> v, std::uint64_t step, const AdamConfig& config,
               double learning_rate);

struct TraceEntry {
  std::size_t epoch = 0;
  LossBreakdown loss;
  std::vector<double> sparsity;  // per weight layer, output layer last
  std::optional<double> train_rmse;
  std::optional<double> test_rmse;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
};

struct TraceLog {
  std::vector<TraceEntry> entries;

  // Header: epoch,nll,kl_bern,kl_gauss,total,sparsity_l1..sparsity_lL
  // followed by train_rmse,test_rmse (or accuracies) when any row has them.
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainerState {
  VariationalState state;
  AdamState adam;
  std::size_t epoch = 0;             // epochs completed
  TraceLog trace;
  std::vector<double> recent_losses; // trailing per-epoch losses for the stopping rule
  bool converged = false;
};

TrainerState start_training(VariationalState state);

nlohmann::json trainer_to_json(const TrainerState& ts);
TrainerState trainer_from_json(const nlohmann::json& doc);
void save_checkpoint(const std::filesystem::path& path, const TrainerState& ts);
// Accepts plain state documents too (fresh optimizer, epoch 0).
TrainerState load_checkpoint(const std::filesystem::path& path);

using CheckpointFn = std::function<void(const TrainerState&)>;

// Runs epochs until max_epochs or convergence. Each epoch reshuffles with the
// (seed, shuffle, epoch) stream and draws masks/noise from (seed, noise,
// epoch), so resuming from a checkpoint reproduces the uninterrupted run.
// Throws DivergenceError on a non-finite loss.
TrainerState train(TrainerState start, const Dataset& data, const TrainConfig& config,
                   const Dataset* eval_set = nullptr, const CheckpointFn& on_checkpoint = {});

// Per-layer medians of trace sparsity over the last `window` epochs, taking
// every `stride`-th epoch counted back from the final entry.
std::vector<double> median_sparsity_over_window(const TraceLog& trace, std::size_t window,
                                                std::size_t stride);

// Mean/sd of the recorded metrics and median sparsity over the same window.
MetricsReport window_metrics(const TraceLog& trace, std::size_t window, std::size_t stride);

// Named experiment settings.
struct Preset {
  std::string name;
  std::vector<std::size_t> hidden;  // hidden widths
  Activation activation = Activation::sigmoid;
  Task task = Task::regression;
  Mode mode = Mode::ssig;
  InitScheme init = InitScheme::uniform_range;
  TrainConfig train;
  std::string dataset;  // "sim1", "sim2" or "" (CSV)
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

// sim1-20, sim1-100, sim2, uci-small, uci-large; a "dense-baseline-"
// prefix selects the dense mode of any of them. ConfigError for unknown names.
Preset find_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ssig
