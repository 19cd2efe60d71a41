#include "ssig/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ssig/data.hpp"
#include "ssig/error.hpp"

namespace ssig {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ArgumentError("expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ArgumentError("expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ArgumentError("expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(s));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<std::size_t>(to_u64(s)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::string b2s(bool b) { return b ? "true" : "false"; }

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SSIG_DOUBLE(expr) \
  Field{[](RunConfig& c, const std::string& v) { expr = to_double(v); }, \
        [](const RunConfig& c) { return format_double(expr); }}
#define SSIG_SIZE(expr) \
  Field{[](RunConfig& c, const std::string& v) { expr = static_cast<std::size_t>(to_u64(v)); }, \
        [](const RunConfig& c) { return std::to_string(expr); }}
#define SSIG_BOOL(expr) \
  Field{[](RunConfig& c, const std::string& v) { expr = to_bool(v); }, \
        [](const RunConfig& c) { return b2s(expr); }}
#define SSIG_STRING(expr) \
  Field{[](RunConfig& c, const std::string& v) { expr = v; }, \
        [](const RunConfig& c) { return expr; }}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"preset", SSIG_STRING(c.preset)},
      {"hidden",
       {[](RunConfig& c, const std::string& v) { c.hidden = to_sizes(v); },
        [](const RunConfig& c) { return join(c.hidden); }}},
      {"activation",
       {[](RunConfig& c, const std::string& v) { c.activation = parse_activation(v); },
        [](const RunConfig& c) { return std::string(to_string(c.activation)); }}},
      {"task",
       {[](RunConfig& c, const std::string& v) { c.task = parse_task(v); },
        [](const RunConfig& c) { return std::string(to_string(c.task)); }}},
      {"mode",
       {[](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); },
        [](const RunConfig& c) { return std::string(to_string(c.mode)); }}},
      {"init_scheme",
       {[](RunConfig& c, const std::string& v) { c.init.scheme = parse_init_scheme(v); },
        [](const RunConfig& c) { return std::string(to_string(c.init.scheme)); }}},
      {"init_range", SSIG_DOUBLE(c.init.range)},
      {"rho_init", SSIG_DOUBLE(c.init.rho)},
      {"gamma_init", SSIG_DOUBLE(c.init.gamma)},
      {"sigma0_2", SSIG_DOUBLE(c.sigma0_2)},
      {"sigma_e2", SSIG_DOUBLE(c.sigma_e2)},
      {"lambda",
       {[](RunConfig& c, const std::string& v) { c.lambda = to_doubles(v); },
        [](const RunConfig& c) { return join(c.lambda); }}},
      {"C",
       {[](RunConfig& c, const std::string& v) {
          c.C = trim(v) == "auto" ? std::vector<double>{} : to_doubles(v);
        },
        [](const RunConfig& c) { return c.C.empty() ? std::string("auto") : join(c.C); }}},
      {"B",
       {[](RunConfig& c, const std::string& v) { c.B = to_doubles(v); },
        [](const RunConfig& c) { return join(c.B); }}},
      {"lambda_floor", SSIG_DOUBLE(c.lambda_floor)},
      {"learning_rate", SSIG_DOUBLE(c.train.learning_rate)},
      {"batch_size", SSIG_SIZE(c.train.batch_size)},
      {"max_epochs", SSIG_SIZE(c.train.max_epochs)},
      {"mc_samples", SSIG_SIZE(c.train.mc_samples)},
      {"tau", SSIG_DOUBLE(c.train.tau)},
      {"elbo_tol", SSIG_DOUBLE(c.train.elbo_tol)},
      {"elbo_window", SSIG_SIZE(c.train.elbo_window)},
      {"stop_on_convergence", SSIG_BOOL(c.train.stop_on_convergence)},
      {"seed",
       {[](RunConfig& c, const std::string& v) {
          c.train.seed = to_u64(v);
          c.seed_given = true;
        },
        [](const RunConfig& c) { return std::to_string(c.train.seed); }}},
      {"adam_beta1", SSIG_DOUBLE(c.train.adam.beta1)},
      {"adam_beta2", SSIG_DOUBLE(c.train.adam.beta2)},
      {"adam_eps", SSIG_DOUBLE(c.train.adam.eps_hat)},
      {"log_every", SSIG_SIZE(c.train.log_every)},
      {"checkpoint_every", SSIG_SIZE(c.train.checkpoint_every)},
      {"metrics_window", SSIG_SIZE(c.train.metrics_window)},
      {"eval_samples", SSIG_SIZE(c.train.eval_samples)},
      {"mask_mode",
       {[](RunConfig& c, const std::string& v) { c.train.mask_mode = parse_mask_mode(v); },
        [](const RunConfig& c) { return std::string(to_string(c.train.mask_mode)); }}},
      {"dataset", SSIG_STRING(c.dataset)},
      {"csv", SSIG_STRING(c.csv)},
      {"test_csv", SSIG_STRING(c.test_csv)},
      {"target_column", SSIG_STRING(c.target_column)},
      {"n_train", SSIG_SIZE(c.n_train)},
      {"n_test", SSIG_SIZE(c.n_test)},
      {"train_fraction", SSIG_DOUBLE(c.train_fraction)},
      {"standardize", SSIG_BOOL(c.standardize)},
      {"out_dir", SSIG_STRING(c.out_dir)},
      {"resume", SSIG_STRING(c.resume)},
  };
  return table;
}

#undef SSIG_DOUBLE
#undef SSIG_SIZE
#undef SSIG_BOOL
#undef SSIG_STRING

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return &f;
  }
  return nullptr;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
  }();
  return keys;
}

void apply_preset(RunConfig& cfg, const Preset& p) {
  cfg.preset = p.name;
  cfg.hidden = p.hidden;
  cfg.activation = p.activation;
  cfg.task = p.task;
  cfg.mode = p.mode;
  cfg.init.scheme = p.init;
  const std::uint64_t seed = cfg.train.seed;
  cfg.train = p.train;
  cfg.train.seed = seed;
  cfg.dataset = p.dataset;
  if (p.n_train > 0) cfg.n_train = p.n_train;
  if (p.n_test > 0) cfg.n_test = p.n_test;
}

RunConfig parse_run_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> errors;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!find_field(key)) {
      errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    entries.emplace_back(std::move(key), std::move(value));
  }

  RunConfig cfg;
  for (const auto& [k, v] : entries) {
    if (k != "preset" || v.empty()) continue;
    try {
      apply_preset(cfg, find_preset(v));
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }
  for (const auto& [k, v] : entries) {
    if (k == "preset") continue;
    try {
      find_field(k)->set(cfg, v);
    } catch (const Error& e) {
      errors.push_back(k + ": " + e.what());
    }
  }
  for (auto& e : validate_run_config(cfg)) errors.push_back(std::move(e));
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

std::vector<std::string> validate_run_config(const RunConfig& c) {
  std::vector<std::string> err;
  const bool sim = !c.dataset.empty();
  const bool csv = !c.csv.empty();
  if (sim == csv) err.emplace_back("exactly one of 'dataset' or 'csv' must be set");
  if (sim && c.dataset != "sim1" && c.dataset != "sim2") {
    err.push_back("dataset must be sim1 or sim2, got '" + c.dataset + "'");
  }
  if (!c.lambda.empty() && !c.C.empty()) err.emplace_back("'lambda' and 'C' are mutually exclusive");
  for (std::size_t w : c.hidden) {
    if (w == 0) err.emplace_back("hidden widths must be at least 1");
  }
  if (!c.lambda.empty() && c.lambda.size() != c.hidden.size() + 1) {
    err.emplace_back("lambda needs one entry per weight layer (hidden layers + 1)");
  }
  if (!c.lambda.empty() && c.lambda.back() != 1.0) {
    err.emplace_back("lambda for the output layer must be 1");
  }
  for (double l : c.lambda) {
    if (!(l > 0.0 && l <= 1.0)) err.emplace_back("lambda entries must lie in (0,1]");
  }
  if (!c.C.empty() && c.C.size() != c.hidden.size() && c.C.size() != c.hidden.size() + 1) {
    err.emplace_back("C needs one entry per hidden layer");
  }
  for (double v : c.C) {
    if (!(v >= 0.0)) err.emplace_back("C entries must be nonnegative");
  }
  if (!c.B.empty() && c.B.size() != c.hidden.size() + 1) {
    err.emplace_back("B needs one entry per weight layer");
  }
  if (!(c.lambda_floor > 0.0 && c.lambda_floor < 1.0)) err.emplace_back("lambda_floor must lie in (0,1)");
  if (!(c.sigma0_2 > 0.0)) err.emplace_back("sigma0_2 must be positive");
  if (!(c.sigma_e2 > 0.0)) err.emplace_back("sigma_e2 must be positive");
  if (!(c.init.gamma > 0.0 && c.init.gamma < 1.0)) err.emplace_back("gamma_init must lie in (0,1)");
  if (!(c.init.range > 0.0)) err.emplace_back("init_range must be positive");
  if (!(c.train.learning_rate >= 0.0)) err.emplace_back("learning_rate must be nonnegative");
  if (c.train.max_epochs == 0) err.emplace_back("max_epochs must be at least 1");
  if (c.train.mc_samples == 0) err.emplace_back("mc_samples must be at least 1");
  if (!(c.train.tau > 0.0)) err.emplace_back("tau must be positive");
  if (!(c.train.elbo_tol > 0.0)) err.emplace_back("elbo_tol must be positive");
  if (c.train.elbo_window == 0) err.emplace_back("elbo_window must be at least 1");
  if (c.train.log_every == 0) err.emplace_back("log_every must be at least 1");
  if (c.train.eval_samples == 0) err.emplace_back("eval_samples must be at least 1");
  if (!(c.train.adam.beta1 >= 0.0 && c.train.adam.beta1 < 1.0)) err.emplace_back("adam_beta1 must lie in [0,1)");
  if (!(c.train.adam.beta2 >= 0.0 && c.train.adam.beta2 < 1.0)) err.emplace_back("adam_beta2 must lie in [0,1)");
  if (!(c.train.adam.eps_hat > 0.0)) err.emplace_back("adam_eps must be positive");
  if (sim && c.n_train < 2) err.emplace_back("n_train must be at least 2");
  if (sim && c.n_test < 1) err.emplace_back("n_test must be at least 1");
  if (sim && c.train.batch_size > c.n_train) err.emplace_back("batch_size exceeds n_train");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) err.emplace_back("train_fraction must lie in (0,1)");
  if (c.out_dir.empty()) err.emplace_back("out_dir must not be empty");
  return err;
}

}  // namespace ssig
