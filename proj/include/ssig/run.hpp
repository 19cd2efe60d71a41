#pragma once

// End-to-end experiment pipeline shared by the CLI and the acceptance suite.

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "ssig/config.hpp"
#include "ssig/data.hpp"
#include "ssig/eval.hpp"
#include "ssig/model.hpp"
#include "ssig/prior_calculus.hpp"
#include "ssig/trainer.hpp"

namespace ssig {

struct PreparedRun {
  Dataset train;
  Dataset test;
  Architecture arch;
  PriorConfig prior;
  std::optional<prior::PriorReport> prior_report;  // absent when lambda was given
};

// Generates simulation data (n_train + n_test rows from one seed, first
// n_train rows for training) or loads CSV data, then derives the prior.
PreparedRun prepare_run(const RunConfig& cfg);

struct RunResult {
  PreparedRun setup;
  TrainerState final;
  MetricsReport metrics;  // window statistics over the last metrics_window epochs
};

// Trains per the config. When `out_dir` is set, writes trace.csv,
// ckpt_<epoch>.state, final.state, metrics.json, node_summary.csv,
// config.txt and manifest.json there.
RunResult run_training(const RunConfig& cfg,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Manifest for generated datasets: n, p, task, source, seed.
nlohmann::json dataset_manifest(const Dataset& ds, const std::string& source, std::uint64_t seed);

}  // namespace ssig
