#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ssig/data.hpp"
#include "ssig/model.hpp"
#include "ssig/random.hpp"

namespace ssig {

inline constexpr std::size_t kDefaultPredictionSamples = 30;

// Average of forward passes over `samples` independent hard-mask draws.
// Regression: mean outputs. Classification: mean class probabilities.
Matrix predict_posterior_mean(const VariationalState& state, const Matrix& inputs,
                              std::size_t samples, RandomStream& stream);

// Argmax per row; ties go to the lowest index.
std::vector<std::size_t> predicted_labels(const Matrix& probabilities);

double rmse(std::span<const double> preds, std::span<const double> targets);
double accuracy(std::span<const std::size_t> labels, std::span<const double> targets);

// Fraction of nodes with gamma >= threshold in each weight layer. The output
// layer is always 1.
std::vector<double> sparsity_estimate(const VariationalState& state, double threshold = 0.5);

struct NodeSummary {
  std::size_t layer;  // weight layer index l (node lives in hidden layer l+1)
  std::size_t node;
  double gamma;
  double min, q1, median, q3, max;  // of |mu| over the incoming row, bias included
  bool active;
};

// One row per hidden node.
std::vector<NodeSummary> node_weight_summary(const VariationalState& state,
                                             double threshold = 0.5);
// CSV header: layer,node,gamma,min,q1,median,q3,max,active
void write_node_summary_csv(const std::vector<NodeSummary>& rows,
                            const std::filesystem::path& path);

struct MetricStat {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

MetricStat summarize(std::span<const double> values);

struct MetricsReport {
  std::optional<MetricStat> train_rmse;
  std::optional<MetricStat> test_rmse;
  std::optional<MetricStat> train_accuracy;
  std::optional<MetricStat> test_accuracy;
  std::vector<double> sparsity;
  std::size_t samples = kDefaultPredictionSamples;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const MetricsReport& r);

struct PointMetrics {
  std::optional<double> rmse;
  std::optional<double> accuracy;
};

// Posterior-mean metrics on one dataset. Regression RMSE is reported on the
// original target scale when the dataset carries target standardization.
PointMetrics evaluate(const VariationalState& state, const Dataset& data, std::size_t samples,
                      RandomStream& stream);

}  // namespace ssig
