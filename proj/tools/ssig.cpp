// ssig: command-line front end for spike-and-slab node-selection networks.
//
//   ssig hyper    --widths 5,20,20,1 --n 3000
//   ssig simulate --which sim2 --n 3000 --n-test 1000 --seed 1 --out data/
//   ssig train    --config run.cfg [--preset sim2] [--seed 1] [--out runs/a]
//   ssig eval     --checkpoint runs/a/final.state --data data/test.csv --s 30
//   ssig export   --checkpoint runs/a/final.state --out plots/
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric divergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssig/checkpoint.hpp"
#include "ssig/config.hpp"
#include "ssig/data.hpp"
#include "ssig/error.hpp"
#include "ssig/eval.hpp"
#include "ssig/prior_calculus.hpp"
#include "ssig/run.hpp"
#include "ssig/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

std::uint64_t generated_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int cmd_hyper(const std::vector<std::size_t>& widths, double n, const std::vector<double>& s,
              const std::vector<double>& B, const std::vector<double>& C, double xi, double floor) {
  ssig::prior::PriorRequest req;
  req.k = widths;
  req.n = n;
  req.s = s;
  req.B = B;
  req.C = C;
  req.xi = xi;
  req.floor = floor;
  const auto report = ssig::prior::build_report(req);
  json j = report;
  std::cout << j.dump(2) << '\n';
  if (std::find(report.C_infeasible.begin(), report.C_infeasible.end(), true) !=
      report.C_infeasible.end()) {
    std::cerr << "warning: no C in the grid keeps lambda above the floor for some layer; C = 0 used\n";
  }
  return 0;
}

int cmd_simulate(const std::string& which, std::size_t n, std::size_t n_test,
                 std::optional<std::uint64_t> seed_opt, const fs::path& out) {
  if (which != "sim1" && which != "sim2") throw ssig::ConfigError("--which must be sim1 or sim2");
  const std::uint64_t seed = seed_opt.value_or(generated_seed());
  const std::size_t total = n + n_test;
  ssig::Dataset all = which == "sim1" ? ssig::gen_sim1(total, seed) : ssig::gen_sim2(total, seed);
  std::vector<std::size_t> tr(n), te(n_test);
  for (std::size_t i = 0; i < n; ++i) tr[i] = i;
  for (std::size_t i = 0; i < n_test; ++i) te[i] = n + i;
  fs::create_directories(out);
  const auto train = ssig::subset(all, tr);
  const auto test = ssig::subset(all, te);
  ssig::save_csv(train, out / "train.csv");
  if (n_test > 0) ssig::save_csv(test, out / "test.csv");

  json manifest = ssig::dataset_manifest(train, which, seed);
  manifest["n_test"] = n_test;
  manifest["seed_generated"] = !seed_opt.has_value();
  if (which == "sim1") {
    json teacher = json::array();
    for (const auto& w : ssig::sim1_teacher_weights()) {
      json rows = json::array();
      for (std::size_t r = 0; r < w.rows(); ++r) {
        rows.push_back(std::vector<double>(w.row(r).begin(), w.row(r).end()));
      }
      teacher.push_back(rows);
    }
    manifest["teacher"] = {{"widths", {2, 2, 1}},
                           {"activation", "sigmoid"},
                           {"weights_bias_first", teacher}};
    manifest["noise_multiplier"] = 0.05;
  } else {
    manifest["noise_sd"] = 1.0;
  }
  ssig::write_json_file(out / "manifest.json", manifest);
  std::cout << "wrote " << n << " training and " << n_test << " test rows to " << out.string()
            << " (seed " << seed << ")\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& preset,
              std::optional<std::uint64_t> seed, const std::string& out, const std::string& resume,
              std::optional<std::size_t> samples) {
  std::string text;
  if (!preset.empty()) text += "preset = " + preset + "\n";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ssig::ConfigError("cannot open config " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    text += ss.str() + "\n";
  }
  if (config_path.empty() && preset.empty()) throw ssig::ConfigError("train needs --config or --preset");
  if (seed) text += "seed = " + std::to_string(*seed) + "\n";
  if (!out.empty()) text += "out_dir = " + out + "\n";
  if (!resume.empty()) text += "resume = " + resume + "\n";
  if (samples) text += "eval_samples = " + std::to_string(*samples) + "\n";

  ssig::RunConfig cfg = ssig::parse_run_config(text);
  if (!cfg.seed_given) {
    cfg.train.seed = generated_seed();
    std::cerr << "no seed given; using generated seed " << cfg.train.seed << '\n';
  }
  const auto result = ssig::run_training(cfg, fs::path(cfg.out_dir));
  std::cout << json(result.metrics).dump(2) << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, const std::string& target,
             std::size_t samples, std::uint64_t seed, const std::string& out) {
  const ssig::TrainerState ts = ssig::load_checkpoint(checkpoint);
  const ssig::Dataset ds = ssig::load_csv(data, target, ts.state.arch.task);
  if (ds.num_features() != ts.state.arch.input_dim()) {
    throw ssig::ShapeError("checkpoint expects " + std::to_string(ts.state.arch.input_dim()) +
                           " features, dataset has " + std::to_string(ds.num_features()));
  }
  ssig::RandomStream stream(seed, ssig::stream_id(ssig::StreamPurpose::eval));
  const auto pm = ssig::evaluate(ts.state, ds, samples, stream);
  ssig::MetricsReport report;
  if (pm.rmse) report.test_rmse = ssig::MetricStat{*pm.rmse, 0.0, 1};
  if (pm.accuracy) report.test_accuracy = ssig::MetricStat{*pm.accuracy, 0.0, 1};
  report.sparsity = ssig::sparsity_estimate(ts.state);
  report.samples = samples;
  report.seed = seed;
  std::cout << json(report).dump(2) << '\n';
  if (!out.empty()) {
    fs::create_directories(out);
    ssig::write_node_summary_csv(ssig::node_weight_summary(ts.state), fs::path(out) / "node_summary.csv");
  }
  return 0;
}

int cmd_export(const std::string& checkpoint, const std::string& out) {
  const ssig::TrainerState ts = ssig::load_checkpoint(checkpoint);
  fs::create_directories(out);
  ssig::write_node_summary_csv(ssig::node_weight_summary(ts.state), fs::path(out) / "node_summary.csv");
  if (!ts.trace.entries.empty()) ts.trace.write_csv(fs::path(out) / "trace.csv");
  json j{{"epoch", ts.epoch}, {"sparsity", ssig::sparsity_estimate(ts.state)}};
  ssig::write_json_file(fs::path(out) / "sparsity.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian MLPs with spike-and-slab node selection"};
  app.require_subcommand(1);

  auto* hyper = app.add_subcommand("hyper", "Layer-wise prior inclusion probabilities");
  std::vector<std::size_t> widths;
  double n_hyper = 0.0;
  std::vector<double> s_hyper, b_hyper, c_hyper;
  double xi = 0.0;
  double floor = 1e-50;
  hyper->add_option("--widths", widths, "k_0,...,k_{L+1}")->required()->delimiter(',');
  hyper->add_option("--n", n_hyper, "Training sample size")->required();
  hyper->add_option("--sparsity", s_hyper, "Target sparsity s_l per layer")->delimiter(',');
  hyper->add_option("--B", b_hyper, "Norm bounds B_l")->delimiter(',');
  hyper->add_option("--C", c_hyper, "Constants C_l (skips automatic selection)")->delimiter(',');
  hyper->add_option("--xi", xi, "Approximation error term");
  hyper->add_option("--floor", floor, "Lower bound on lambda for C selection");

  auto* simulate = app.add_subcommand("simulate", "Generate simulation-study data");
  std::string which = "sim2";
  std::size_t n_sim = 3000, n_test = 1000;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out = "data";
  simulate->add_option("--which", which, "sim1 or sim2");
  simulate->add_option("--n", n_sim, "Training rows");
  simulate->add_option("--n-test", n_test, "Test rows");
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--out", sim_out, "Output directory");

  auto* train = app.add_subcommand("train", "Train a network");
  std::string config_path, preset, train_out, resume;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> train_s;
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--preset", preset, "Named preset");
  train->add_option("--seed", train_seed, "Random seed");
  train->add_option("--out", train_out, "Output directory");
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--s", train_s, "Monte Carlo samples for evaluation");

  auto* eval = app.add_subcommand("eval", "Posterior-mean metrics of a checkpoint");
  std::string eval_ckpt, eval_data, eval_target, eval_out;
  std::size_t eval_s = ssig::kDefaultPredictionSamples;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", eval_ckpt, "State or checkpoint file")->required();
  eval->add_option("--data", eval_data, "CSV dataset")->required();
  eval->add_option("--target-column", eval_target, "Target column name (default: last)");
  eval->add_option("--s", eval_s, "Monte Carlo samples");
  eval->add_option("--seed", eval_seed, "Random seed");
  eval->add_option("--out", eval_out, "Directory for node_summary.csv");

  auto* exp = app.add_subcommand("export", "Export plot data from a checkpoint");
  std::string exp_ckpt, exp_out = "export";
  exp->add_option("--checkpoint", exp_ckpt, "State or checkpoint file")->required();
  exp->add_option("--out", exp_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*hyper) return cmd_hyper(widths, n_hyper, s_hyper, b_hyper, c_hyper, xi, floor);
    if (*simulate) return cmd_simulate(which, n_sim, n_test, sim_seed, sim_out);
    if (*train) return cmd_train(config_path, preset, train_seed, train_out, resume, train_s);
    if (*eval) return cmd_eval(eval_ckpt, eval_data, eval_target, eval_s, eval_seed, eval_out);
    if (*exp) return cmd_export(exp_ckpt, exp_out);
  } catch (const ssig::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const ssig::ArgumentError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const ssig::DomainError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const ssig::DivergenceError& e) {
    std::cerr << e.what() << '\n';
    return kExitDivergence;
  } catch (const ssig::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitData;
  } catch (const ssig::FormatError& e) {
    std::cerr << e.what() << '\n';
    return kExitData;
  } catch (const ssig::ShapeError& e) {
    std::cerr << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
