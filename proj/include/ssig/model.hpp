#pragma once

// Spike-and-slab node-selection network (SS-IG).
//
// Every hidden node j of weight layer l carries an incoming weight row
// w_lj = (bias, weights) with variational factor
//   q(w_lj | z_lj = 1) = N(mu_lj, diag(softplus(rho_lj)^2)),  q(z_lj) = Ber(gamma_lj),
// gamma_lj = sigmoid(phi_lj). The output layer (l = L) is never masked.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssig/matrix.hpp"
#include "ssig/random.hpp"

namespace ssig {

enum class Activation { sigmoid, swish, tanh, relu };
enum class Task { regression, classification };

// ssig: spike-and-slab node selection. dense: all inclusion probabilities
// pinned at 1 and no Bernoulli KL (the VBNN baseline).
enum class Mode { ssig, dense };

// hard: rows scaled by the binary mask (straight-through gradients).
// soft: rows scaled by the relaxed mask.
// mean: zeta = 0 and z = 1{gamma > 0.5}.
enum class MaskMode { hard, soft, mean };

enum class InitScheme { uniform_range, fan_in_uniform };

std::string_view to_string(Activation a) noexcept;
std::string_view to_string(Task t) noexcept;
std::string_view to_string(Mode m) noexcept;
std::string_view to_string(MaskMode m) noexcept;
std::string_view to_string(InitScheme s) noexcept;
Activation parse_activation(std::string_view s);
Task parse_task(std::string_view s);
Mode parse_mode(std::string_view s);
MaskMode parse_mask_mode(std::string_view s);
InitScheme parse_init_scheme(std::string_view s);

double activate(Activation a, double x) noexcept;
// Derivative at pre-activation x. relu'(0) = 0.
double activate_derivative(Activation a, double x) noexcept;

struct Architecture {
  std::vector<std::size_t> widths;  // k_0 .. k_{L+1}
  Activation activation = Activation::sigmoid;
  Task task = Task::regression;

  std::size_t depth() const noexcept { return widths.size() - 2; }  // L
  std::size_t num_layers() const noexcept { return widths.size() - 1; }
  std::size_t input_dim() const noexcept { return widths.front(); }
  std::size_t output_dim() const noexcept { return widths.back(); }
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct PriorConfig {
  double sigma0_2 = 1.0;
  double sigma_e2 = 1.0;
  std::vector<double> lambda;  // length L+1, lambda_L = 1

  friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

// Inclusion probabilities are clamped to [kGammaClamp, 1 - kGammaClamp].
inline constexpr double kGammaClamp = 1e-7;

struct LayerParams {
  Matrix mu;                // k_{l+1} x (k_l + 1), column 0 is the bias
  Matrix rho;               // same shape; sigma = softplus(rho)
  std::vector<double> phi;  // k_{l+1} inclusion logits; empty when unmasked

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct VariationalState {
  Architecture arch;
  PriorConfig prior;
  Mode mode = Mode::ssig;
  std::vector<LayerParams> layers;

  // Whether nodes of weight layer l carry a spike.
  bool has_spike(std::size_t l) const noexcept { return mode == Mode::ssig && l < arch.depth(); }
  // Clamped inclusion probability; 1 for unmasked layers.
  double gamma(std::size_t l, std::size_t j) const noexcept;
  // True when sigmoid(phi) lies outside the clamp interval.
  bool gamma_clamped(std::size_t l, std::size_t j) const noexcept;
  void validate() const;

  friend bool operator==(const VariationalState&, const VariationalState&) = default;
};

// Same shapes as the variational parameters.
struct LayerGrads {
  Matrix mu;
  Matrix rho;
  std::vector<double> phi;
};

struct Gradients {
  std::vector<LayerGrads> layers;
  static Gradients zeros_like(const VariationalState& state);
};

// Parameter blocks in a fixed order (per layer: mu, rho, phi-if-present).
std::vector<std::span<double>> parameter_blocks(VariationalState& state);
std::vector<std::span<double>> gradient_blocks(Gradients& grads);

struct InitOptions {
  InitScheme scheme = InitScheme::uniform_range;
  double range = 0.6;   // uniform_range half-width
  double rho = -6.0;
  double gamma = 0.99;  // initial inclusion probability of hidden nodes
};

// Validates the prior (lambda length L+1 with last entry 1) and draws mu from
// the init stream of `seed`.
VariationalState init_state(const Architecture& arch, PriorConfig prior, Mode mode,
                            std::uint64_t seed, const InitOptions& options = {});

struct LayerSample {
  Matrix zeta;
  std::vector<double> u;
  std::vector<std::uint8_t> z_hard;
  std::vector<double> z_soft;
  std::vector<double> z;  // the mask actually applied to the rows
  Matrix weights;         // realized W-bar, row j = z_j (mu_j + sigma_j .* zeta_j)
};

struct RealizedSample {
  MaskMode mode = MaskMode::hard;
  double tau = 0.5;
  std::vector<LayerSample> layers;
};

// Draws zeta for every weight and u for every node, layer by layer, then
// realizes the weights. Hard and soft realizations from the same stream state
// share (zeta, u).
RealizedSample draw_sample(const VariationalState& state, RandomStream& stream, MaskMode mode,
                           double tau);

// Network output for one input.
std::vector<double> forward(const Architecture& arch, const RealizedSample& sample,
                            std::span<const double> x);

// Per-layer activations kept for the backward pass.
struct ForwardCache {
  std::vector<Matrix> act;  // act[0] = inputs, act[l] = psi(pre[l]) for l = 1..L
  std::vector<Matrix> pre;  // pre[l] for l = 1..L+1; pre[L+1] is the output
  const Matrix& output() const { return pre.back(); }
};

// Rows of `inputs` are data points.
ForwardCache forward_batch(const Architecture& arch, std::span<const Matrix> weights,
                           const Matrix& inputs);
Matrix forward_batch(const Architecture& arch, const RealizedSample& sample, const Matrix& inputs);

// Backpropagates d(loss)/d(output) through the realized weights. Returns the
// gradients with respect to each realized W-bar.
std::vector<Matrix> backward_batch(const Architecture& arch, std::span<const Matrix> weights,
                                   const ForwardCache& cache, Matrix d_output);

}  // namespace ssig
