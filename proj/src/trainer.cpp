#include "ssig/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "ssig/backprop.hpp"
#include "ssig/checkpoint.hpp"
#include "ssig/error.hpp"

namespace ssig {

using nlohmann::json;

void TrainConfig::validate(std::size_t n) const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be nonnegative");
  if (batch_size > n) throw ConfigError("batch_size exceeds the number of training rows");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (mc_samples == 0) throw ConfigError("mc_samples must be at least 1");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(elbo_tol > 0.0)) throw ConfigError("elbo_tol must be positive");
  if (elbo_window == 0) throw ConfigError("elbo_window must be at least 1");
  if (log_every == 0) throw ConfigError("log_every must be at least 1");
  if (eval_samples == 0) throw ConfigError("eval_samples must be at least 1");
}

AdamState AdamState::zeros_like(VariationalState& state) {
  AdamState a;
  for (auto block : parameter_blocks(state)) {
    a.m.emplace_back(block.size(), 0.0);
    a.v.emplace_back(block.size(), 0.0);
  }
  return a;
}

void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m,
               std::span<double> v, std::uint64_t step, const AdamConfig& c,
               double learning_rate) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment lengths differ");
  }
  if (step == 0) throw ArgumentError("adam_step: step is 1-based");
  const double t = static_cast<double>(step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + c.eps_hat);
  }
}

void TraceLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::size_t hidden = entries.empty() ? 0 : entries.front().sparsity.size() - 1;
  bool has_rmse = false;
  bool has_acc = false;
  for (const auto& e : entries) {
    has_rmse = has_rmse || e.train_rmse || e.test_rmse;
    has_acc = has_acc || e.train_accuracy || e.test_accuracy;
  }
  out << "epoch,nll,kl_bern,kl_gauss,total";
  for (std::size_t l = 1; l <= hidden; ++l) out << ",sparsity_l" << l;
  if (has_rmse) out << ",train_rmse,test_rmse";
  if (has_acc) out << ",train_accuracy,test_accuracy";
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& e : entries) {
    out << e.epoch << ',' << format_double(e.loss.nll) << ',' << format_double(e.loss.kl_bern) << ','
        << format_double(e.loss.kl_gauss) << ',' << format_double(e.loss.total);
    for (std::size_t l = 0; l < hidden; ++l) out << ',' << format_double(e.sparsity[l]);
    if (has_rmse) out << ',' << opt(e.train_rmse) << ',' << opt(e.test_rmse);
    if (has_acc) out << ',' << opt(e.train_accuracy) << ',' << opt(e.test_accuracy);
    out << '\n';
  }
}

TrainerState start_training(VariationalState state) {
  TrainerState ts;
  ts.state = std::move(state);
  ts.adam = AdamState::zeros_like(ts.state);
  return ts;
}

namespace {

json loss_to_json(const LossBreakdown& l) {
  return {{"nll", l.nll}, {"kl_bern", l.kl_bern}, {"kl_gauss", l.kl_gauss}, {"total", l.total}};
}

LossBreakdown loss_from_json(const json& j) {
  return {j.at("nll").get<double>(), j.at("kl_bern").get<double>(),
          j.at("kl_gauss").get<double>(), j.at("total").get<double>()};
}

void put_opt(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

std::optional<double> get_opt(const json& j, const char* key) {
  if (j.contains(key)) return j.at(key).get<double>();
  return std::nullopt;
}

}  // namespace

json trainer_to_json(const TrainerState& ts) {
  json doc = state_to_json(ts.state);
  json trace = json::array();
  for (const auto& e : ts.trace.entries) {
    json row{{"epoch", e.epoch}, {"loss", loss_to_json(e.loss)}, {"sparsity", e.sparsity}};
    put_opt(row, "train_rmse", e.train_rmse);
    put_opt(row, "test_rmse", e.test_rmse);
    put_opt(row, "train_accuracy", e.train_accuracy);
    put_opt(row, "test_accuracy", e.test_accuracy);
    trace.push_back(std::move(row));
  }
  doc["trainer"] = {{"epoch", ts.epoch},
                    {"converged", ts.converged},
                    {"adam_step", ts.adam.step},
                    {"adam_m", ts.adam.m},
                    {"adam_v", ts.adam.v},
                    {"recent_losses", ts.recent_losses},
                    {"trace", std::move(trace)}};
  return doc;
}

TrainerState trainer_from_json(const json& doc) {
  TrainerState ts = start_training(state_from_json(doc));
  if (!doc.contains("trainer")) return ts;
  try {
    const auto& t = doc.at("trainer");
    ts.epoch = t.at("epoch").get<std::size_t>();
    ts.converged = t.at("converged").get<bool>();
    ts.adam.step = t.at("adam_step").get<std::uint64_t>();
    ts.adam.m = t.at("adam_m").get<std::vector<std::vector<double>>>();
    ts.adam.v = t.at("adam_v").get<std::vector<std::vector<double>>>();
    ts.recent_losses = t.at("recent_losses").get<std::vector<double>>();
    for (const auto& row : t.at("trace")) {
      TraceEntry e;
      e.epoch = row.at("epoch").get<std::size_t>();
      e.loss = loss_from_json(row.at("loss"));
      e.sparsity = row.at("sparsity").get<std::vector<double>>();
      e.train_rmse = get_opt(row, "train_rmse");
      e.test_rmse = get_opt(row, "test_rmse");
      e.train_accuracy = get_opt(row, "train_accuracy");
      e.test_accuracy = get_opt(row, "test_accuracy");
      ts.trace.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed trainer section: ") + e.what());
  }
  auto blocks = parameter_blocks(ts.state);
  if (ts.adam.m.size() != blocks.size() || ts.adam.v.size() != blocks.size()) {
    throw FormatError("optimizer moments do not match the parameter layout");
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (ts.adam.m[b].size() != blocks[b].size() || ts.adam.v[b].size() != blocks[b].size()) {
      throw FormatError("optimizer moment block has the wrong length");
    }
  }
  return ts;
}

void save_checkpoint(const std::filesystem::path& path, const TrainerState& ts) {
  write_json_file(path, trainer_to_json(ts));
}

TrainerState load_checkpoint(const std::filesystem::path& path) {
  return trainer_from_json(read_json_file(path));
}

namespace {

void record_metrics(TraceEntry& e, const VariationalState& state, const Dataset& data,
                    const Dataset* eval_set, const TrainConfig& cfg) {
  RandomStream stream(cfg.seed, stream_id(StreamPurpose::eval, e.epoch));
  const PointMetrics tr = evaluate(state, data, cfg.eval_samples, stream);
  e.train_rmse = tr.rmse;
  e.train_accuracy = tr.accuracy;
  if (eval_set != nullptr) {
    const PointMetrics te = evaluate(state, *eval_set, cfg.eval_samples, stream);
    e.test_rmse = te.rmse;
    e.test_accuracy = te.accuracy;
  }
}

bool loss_converged(const std::vector<double>& losses, const TrainConfig& cfg) {
  const std::size_t w = cfg.elbo_window;
  if (losses.size() < 2 * w) return false;
  const auto end = losses.end();
  const double cur = std::accumulate(end - static_cast<std::ptrdiff_t>(w), end, 0.0) / static_cast<double>(w);
  const double prev = std::accumulate(end - static_cast<std::ptrdiff_t>(2 * w),
                                      end - static_cast<std::ptrdiff_t>(w), 0.0) /
                      static_cast<double>(w);
  return std::abs(cur - prev) < cfg.elbo_tol * std::max(1.0, std::abs(prev));
}

}  // namespace

TrainerState train(TrainerState ts, const Dataset& data, const TrainConfig& cfg,
                   const Dataset* eval_set, const CheckpointFn& on_checkpoint) {
  const std::size_t n = data.size();
  if (n == 0) throw ArgumentError("train: empty training set");
  data.validate();
  if (data.num_features() != ts.state.arch.input_dim()) {
    throw ShapeError("train: dataset feature count does not match the architecture");
  }
  cfg.validate(n);
  const std::size_t batch = cfg.batch_size == 0 ? n : cfg.batch_size;
  if (ts.adam.m.empty()) ts.adam = AdamState::zeros_like(ts.state);

  std::vector<std::span<double>> params = parameter_blocks(ts.state);
  while (ts.epoch < cfg.max_epochs && !ts.converged) {
    const std::size_t epoch = ts.epoch + 1;
    RandomStream shuffle(cfg.seed, stream_id(StreamPurpose::shuffle, epoch));
    RandomStream noise(cfg.seed, stream_id(StreamPurpose::noise, epoch));
    const std::vector<std::size_t> order = random_permutation(shuffle, n);

    LossBreakdown epoch_loss;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const BatchView view{data.features, data.targets,
                           std::span<const std::size_t>(order).subspan(start, stop - start)};
      LossAndGradients lg = loss_and_gradients(ts.state, view, n, cfg.mc_samples, cfg.tau, noise,
                                               cfg.mask_mode);
      if (!std::isfinite(lg.loss.total)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                              " (nll=" + std::to_string(lg.loss.nll) +
                              ", kl_bern=" + std::to_string(lg.loss.kl_bern) +
                              ", kl_gauss=" + std::to_string(lg.loss.kl_gauss) + ")");
      }
      epoch_loss += lg.loss;
      ++batches;
      ++ts.adam.step;
      auto grads = gradient_blocks(lg.grads);
      for (std::size_t b = 0; b < params.size(); ++b) {
        adam_step(params[b], grads[b], ts.adam.m[b], ts.adam.v[b], ts.adam.step, cfg.adam,
                  cfg.learning_rate);
      }
    }
    epoch_loss *= 1.0 / static_cast<double>(batches);
    ts.epoch = epoch;

    ts.recent_losses.push_back(epoch_loss.total);
    if (ts.recent_losses.size() > 2 * cfg.elbo_window) {
      ts.recent_losses.erase(ts.recent_losses.begin());
    }
    if (cfg.stop_on_convergence && loss_converged(ts.recent_losses, cfg)) ts.converged = true;

    const bool last = ts.epoch == cfg.max_epochs || ts.converged;
    if (epoch % cfg.log_every == 0 || last) {
      TraceEntry e;
      e.epoch = epoch;
      e.loss = epoch_loss;
      e.sparsity = sparsity_estimate(ts.state);
      const std::size_t window_start =
          cfg.max_epochs > cfg.metrics_window ? cfg.max_epochs - cfg.metrics_window : 0;
      if (epoch > window_start || last) record_metrics(e, ts.state, data, eval_set, cfg);
      ts.trace.entries.push_back(std::move(e));
    }
    if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      on_checkpoint(ts);
    }
  }
  return ts;
}

namespace {

std::vector<const TraceEntry*> window_entries(const TraceLog& trace, std::size_t window,
                                              std::size_t stride) {
  if (trace.entries.empty()) throw ArgumentError("trace is empty");
  if (stride == 0) throw ArgumentError("stride must be at least 1");
  const std::size_t last = trace.entries.back().epoch;
  std::vector<const TraceEntry*> picked;
  for (const auto& e : trace.entries) {
    if (e.epoch + window <= last) continue;
    if ((last - e.epoch) % stride != 0) continue;
    picked.push_back(&e);
  }
  if (picked.empty()) throw ArgumentError("trace too short for the requested window");
  return picked;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

std::vector<double> median_sparsity_over_window(const TraceLog& trace, std::size_t window,
                                                std::size_t stride) {
  const auto picked = window_entries(trace, window, stride);
  const std::size_t layers = picked.front()->sparsity.size();
  std::vector<double> out(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<double> vals;
    for (const TraceEntry* e : picked) vals.push_back(e->sparsity[l]);
    out[l] = median(std::move(vals));
  }
  return out;
}

MetricsReport window_metrics(const TraceLog& trace, std::size_t window, std::size_t stride) {
  const auto picked = window_entries(trace, window, stride);
  MetricsReport r;
  r.sparsity = median_sparsity_over_window(trace, window, stride);
  auto collect = [&picked](std::optional<double> TraceEntry::*field) -> std::optional<MetricStat> {
    std::vector<double> vals;
    for (const TraceEntry* e : picked) {
      if (e->*field) vals.push_back(*(e->*field));
    }
    if (vals.empty()) return std::nullopt;
    return summarize(vals);
  };
  r.train_rmse = collect(&TraceEntry::train_rmse);
  r.test_rmse = collect(&TraceEntry::test_rmse);
  r.train_accuracy = collect(&TraceEntry::train_accuracy);
  r.test_accuracy = collect(&TraceEntry::test_accuracy);
  return r;
}

namespace {

Preset base_preset(const std::string& name) {
  Preset p;
  p.name = name;
  p.train.stop_on_convergence = false;
  p.train.mc_samples = 1;
  p.train.tau = 0.5;
  p.train.log_every = 10;
  if (name == "sim1-20") {
    p.hidden = {20};
    p.train.learning_rate = 3e-3;
    p.train.batch_size = 400;
    p.train.max_epochs = 10000;
    p.dataset = "sim1";
    p.n_train = 3000;
    p.n_test = 1000;
  } else if (name == "sim1-100") {
    p.hidden = {100};
    p.train.learning_rate = 1e-3;
    p.train.batch_size = 400;
    p.train.max_epochs = 20000;
    p.dataset = "sim1";
    p.n_train = 3000;
    p.n_test = 1000;
  } else if (name == "sim2") {
    p.hidden = {20, 20};
    p.train.learning_rate = 5e-3;
    p.train.batch_size = 0;
    p.train.max_epochs = 10000;
    p.dataset = "sim2";
    p.n_train = 3000;
    p.n_test = 1000;
  } else if (name == "uci-small") {
    p.hidden = {50};
    p.train.learning_rate = 1e-3;
    p.train.batch_size = 128;
    p.train.max_epochs = 500;
    p.train.metrics_window = 100;
  } else if (name == "uci-large") {
    p.hidden = {100};
    p.train.learning_rate = 1e-3;
    p.train.batch_size = 256;
    p.train.max_epochs = 100;
    p.train.metrics_window = 20;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return p;
}

constexpr std::string_view kDensePrefix = "dense-baseline-";

}  // namespace

Preset find_preset(const std::string& name) {
  if (name.starts_with(kDensePrefix)) {
    Preset p = base_preset(name.substr(kDensePrefix.size()));
    p.name = name;
    p.mode = Mode::dense;
    return p;
  }
  return base_preset(name);
}

std::vector<std::string> preset_names() {
  return {"sim1-20", "sim1-100", "sim2", "uci-small", "uci-large"};
}

}  // namespace ssig
