#include "ssig/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "ssig/checkpoint.hpp"
#include "ssig/error.hpp"

namespace ssig {
namespace {

Dataset take_rows(const Dataset& ds, std::size_t begin, std::size_t end) {
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return subset(ds, rows);
}

std::size_t output_width(const RunConfig& cfg, const Dataset& train) {
  if (cfg.task == Task::regression) return 1;
  double mx = 0.0;
  for (double y : train.targets) mx = std::max(mx, y);
  return static_cast<std::size_t>(mx) + 1;
}

}  // namespace

PreparedRun prepare_run(const RunConfig& cfg) {
  if (auto errs = validate_run_config(cfg); !errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  PreparedRun run;
  if (!cfg.dataset.empty()) {
    const std::size_t total = cfg.n_train + cfg.n_test;
    Dataset all = cfg.dataset == "sim1" ? gen_sim1(total, cfg.train.seed)
                                        : gen_sim2(total, cfg.train.seed);
    run.train = take_rows(all, 0, cfg.n_train);
    run.test = take_rows(all, cfg.n_train, total);
  } else {
    Dataset all = load_csv(cfg.csv, cfg.target_column, cfg.task);
    if (!cfg.test_csv.empty()) {
      run.train = std::move(all);
      run.test = load_csv(cfg.test_csv, cfg.target_column, cfg.task);
    } else {
      SplitResult s = split(all, cfg.train_fraction, cfg.train.seed);
      run.train = std::move(s.train);
      run.test = std::move(s.test);
    }
  }
  if (cfg.standardize) {
    StandardizeResult st = standardize(run.train, run.test);
    run.train = std::move(st.train);
    run.test = std::move(st.test);
  }

  run.arch.widths.push_back(run.train.num_features());
  run.arch.widths.insert(run.arch.widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  run.arch.widths.push_back(output_width(cfg, run.train));
  run.arch.activation = cfg.activation;
  run.arch.task = cfg.task;
  run.arch.validate();

  run.prior.sigma0_2 = cfg.sigma0_2;
  run.prior.sigma_e2 = cfg.sigma_e2;
  if (!cfg.lambda.empty()) {
    run.prior.lambda = cfg.lambda;
  } else {
    prior::PriorRequest req;
    req.k = run.arch.widths;
    req.n = static_cast<double>(std::max<std::size_t>(run.train.size(), 2));
    req.B = cfg.B;
    req.C = cfg.C;
    req.floor = cfg.lambda_floor;
    run.prior_report = prior::build_report(req);
    run.prior.lambda = run.prior_report->lambda;
  }
  return run;
}

nlohmann::json dataset_manifest(const Dataset& ds, const std::string& source, std::uint64_t seed) {
  return {{"n", ds.size()},
          {"p", ds.num_features()},
          {"task", std::string(to_string(ds.task))},
          {"source", source},
          {"seed", seed}};
}

RunResult run_training(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  RunResult result;
  result.setup = prepare_run(cfg);
  const PreparedRun& setup = result.setup;

  TrainerState start;
  if (!cfg.resume.empty()) {
    start = load_checkpoint(cfg.resume);
    if (start.state.arch != setup.arch) {
      throw ConfigError("resume checkpoint architecture does not match the configuration");
    }
  } else {
    start = start_training(
        init_state(setup.arch, setup.prior, cfg.mode, cfg.train.seed, cfg.init));
  }

  CheckpointFn on_checkpoint;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    on_checkpoint = [dir = *out_dir](const TrainerState& ts) {
      save_checkpoint(dir / ("ckpt_" + std::to_string(ts.epoch) + ".state"), ts);
    };
  }

  result.final = train(std::move(start), setup.train, cfg.train, &setup.test, on_checkpoint);
  const std::size_t window = std::min(cfg.train.metrics_window, result.final.epoch);
  result.metrics = window_metrics(result.final.trace, std::max<std::size_t>(window, 1),
                                  cfg.train.log_every);
  result.metrics.samples = cfg.train.eval_samples;
  result.metrics.seed = cfg.train.seed;

  if (out_dir) {
    const auto& dir = *out_dir;
    result.final.trace.write_csv(dir / "trace.csv");
    save_checkpoint(dir / "final.state", result.final);
    write_json_file(dir / "metrics.json", nlohmann::json(result.metrics));
    write_node_summary_csv(node_weight_summary(result.final.state), dir / "node_summary.csv");
    {
      std::ofstream out(dir / "config.txt");
      out << serialize_run_config(cfg);
    }
    nlohmann::json manifest{
        {"preset", cfg.preset},
        {"seed", cfg.train.seed},
        {"seed_generated", !cfg.seed_given},
        {"widths", setup.arch.widths},
        {"mode", std::string(to_string(cfg.mode))},
        {"lambda", setup.prior.lambda},
        {"epochs", result.final.epoch},
        {"converged", result.final.converged},
        {"train", dataset_manifest(setup.train, cfg.dataset.empty() ? cfg.csv : cfg.dataset,
                                   cfg.train.seed)},
        {"test", dataset_manifest(setup.test,
                                  cfg.dataset.empty() ? (cfg.test_csv.empty() ? cfg.csv : cfg.test_csv)
                                                      : cfg.dataset,
                                  cfg.train.seed)},
        {"created_unix",
         std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()}};
    if (setup.prior_report) manifest["prior"] = *setup.prior_report;
    write_json_file(dir / "manifest.json", manifest);
  }
  return result;
}

}  // namespace ssig
