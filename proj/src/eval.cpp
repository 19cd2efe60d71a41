#include "ssig/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ssig/error.hpp"
#include "ssig/objective.hpp"

namespace ssig {

Matrix predict_posterior_mean(const VariationalState& state, const Matrix& inputs,
                              std::size_t samples, RandomStream& stream) {
  if (samples == 0) throw ArgumentError("predict_posterior_mean: need at least one sample");
  Matrix mean(inputs.rows(), state.arch.output_dim());
  const double w = 1.0 / static_cast<double>(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    RealizedSample sample = draw_sample(state, stream, MaskMode::hard, 0.5);
    Matrix out = forward_batch(state.arch, sample, inputs);
    if (state.arch.task == Task::classification) {
      for (std::size_t i = 0; i < out.rows(); ++i) softmax_inplace(out.row(i));
    }
    auto mv = mean.values();
    auto ov = out.values();
    for (std::size_t t = 0; t < mv.size(); ++t) mv[t] += w * ov[t];
  }
  return mean;
}

std::vector<std::size_t> predicted_labels(const Matrix& probabilities) {
  std::vector<std::size_t> labels(probabilities.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto row = probabilities.row(i);
    labels[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return labels;
}

double rmse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) throw ShapeError("rmse: length mismatch");
  if (preds.empty()) throw ArgumentError("rmse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - targets[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(preds.size()));
}

double accuracy(std::span<const std::size_t> labels, std::span<const double> targets) {
  if (labels.size() != targets.size()) throw ShapeError("accuracy: length mismatch");
  if (labels.empty()) throw ArgumentError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<double>(labels[i]) == targets[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::vector<double> sparsity_estimate(const VariationalState& state, double threshold) {
  std::vector<double> out(state.layers.size(), 1.0);
  for (std::size_t l = 0; l + 1 < state.layers.size(); ++l) {
    const std::size_t k = state.layers[l].mu.rows();
    std::size_t active = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (state.gamma(l, j) >= threshold) ++active;
    }
    out[l] = static_cast<double>(active) / static_cast<double>(k);
  }
  return out;
}

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<NodeSummary> node_weight_summary(const VariationalState& state, double threshold) {
  std::vector<NodeSummary> rows;
  for (std::size_t l = 0; l + 1 < state.layers.size(); ++l) {
    const auto& mu = state.layers[l].mu;
    for (std::size_t j = 0; j < mu.rows(); ++j) {
      std::vector<double> mags;
      for (double v : mu.row(j)) mags.push_back(std::abs(v));
      std::sort(mags.begin(), mags.end());
      const double g = state.gamma(l, j);
      rows.push_back({l, j, g, mags.front(), quantile(mags, 0.25), quantile(mags, 0.5),
                      quantile(mags, 0.75), mags.back(), g >= threshold});
    }
  }
  return rows;
}

void write_node_summary_csv(const std::vector<NodeSummary>& rows,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "layer,node,gamma,min,q1,median,q3,max,active\n";
  for (const auto& r : rows) {
    out << r.layer + 1 << ',' << r.node << ',' << format_double(r.gamma) << ','
        << format_double(r.min) << ',' << format_double(r.q1) << ',' << format_double(r.median)
        << ',' << format_double(r.q3) << ',' << format_double(r.max) << ',' << (r.active ? 1 : 0)
        << '\n';
  }
}

MetricStat summarize(std::span<const double> values) {
  MetricStat st;
  st.count = values.size();
  if (values.empty()) return st;
  for (double v : values) st.mean += v;
  st.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - st.mean) * (v - st.mean);
    st.sd = std::sqrt(var / static_cast<double>(values.size() - 1));
  }
  return st;
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  auto stat = [](const MetricStat& s) {
    return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}, {"count", s.count}};
  };
  j = nlohmann::json::object();
  if (r.train_rmse) j["train_rmse"] = stat(*r.train_rmse);
  if (r.test_rmse) j["test_rmse"] = stat(*r.test_rmse);
  if (r.train_accuracy) j["train_accuracy"] = stat(*r.train_accuracy);
  if (r.test_accuracy) j["test_accuracy"] = stat(*r.test_accuracy);
  j["sparsity"] = r.sparsity;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
}

PointMetrics evaluate(const VariationalState& state, const Dataset& data, std::size_t samples,
                      RandomStream& stream) {
  if (data.num_features() != state.arch.input_dim()) {
    throw ShapeError("evaluate: dataset has " + std::to_string(data.num_features()) +
                     " features, model expects " + std::to_string(state.arch.input_dim()));
  }
  const Matrix mean = predict_posterior_mean(state, data.features, samples, stream);
  PointMetrics pm;
  if (state.arch.task == Task::regression) {
    std::vector<double> preds(mean.values().begin(), mean.values().end());
    std::vector<double> targets = data.targets;
    if (data.standardization && data.standardization->targets) {
      for (double& v : preds) v = data.standardization->inverse_target(v);
      for (double& v : targets) v = data.standardization->inverse_target(v);
    }
    pm.rmse = rmse(preds, targets);
  } else {
    pm.accuracy = accuracy(predicted_labels(mean), data.targets);
  }
  return pm;
}

}  // namespace ssig
