#include "ssig/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssig/distributions.hpp"
#include "ssig/error.hpp"
#include "ssig/simd.hpp"

namespace ssig {

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::swish: return "swish";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "?";
}

std::string_view to_string(Task t) noexcept {
  return t == Task::regression ? "regression" : "classification";
}

std::string_view to_string(Mode m) noexcept { return m == Mode::ssig ? "ssig" : "dense"; }

std::string_view to_string(MaskMode m) noexcept {
  switch (m) {
    case MaskMode::hard: return "hard";
    case MaskMode::soft: return "soft";
    case MaskMode::mean: return "mean";
  }
  return "?";
}

std::string_view to_string(InitScheme s) noexcept {
  return s == InitScheme::uniform_range ? "uniform-range" : "fan-in-uniform";
}

Activation parse_activation(std::string_view s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "swish" || s == "silu") return Activation::swish;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw ArgumentError("unknown activation: " + std::string(s));
}

Task parse_task(std::string_view s) {
  if (s == "regression") return Task::regression;
  if (s == "classification") return Task::classification;
  throw ArgumentError("unknown task: " + std::string(s));
}

Mode parse_mode(std::string_view s) {
  if (s == "ssig") return Mode::ssig;
  if (s == "dense" || s == "dense-baseline") return Mode::dense;
  throw ArgumentError("unknown mode: " + std::string(s));
}

MaskMode parse_mask_mode(std::string_view s) {
  if (s == "hard") return MaskMode::hard;
  if (s == "soft") return MaskMode::soft;
  if (s == "mean") return MaskMode::mean;
  throw ArgumentError("unknown mask mode: " + std::string(s));
}

InitScheme parse_init_scheme(std::string_view s) {
  if (s == "uniform-range") return InitScheme::uniform_range;
  if (s == "fan-in-uniform") return InitScheme::fan_in_uniform;
  throw ArgumentError("unknown init scheme: " + std::string(s));
}

double activate(Activation a, double x) noexcept {
  switch (a) {
    case Activation::sigmoid: return sigmoid(x);
    case Activation::swish: return x * sigmoid(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::relu: return x > 0.0 ? x : 0.0;
  }
  return x;
}

double activate_derivative(Activation a, double x) noexcept {
  switch (a) {
    case Activation::sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::swish: {
      const double s = sigmoid(x);
      return s + x * s * (1.0 - s);
    }
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

void Architecture::validate() const {
  if (widths.size() < 2) throw ArgumentError("architecture needs input and output widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ArgumentError("architecture widths must be at least 1");
  }
  if (task == Task::classification && output_dim() < 2) {
    throw ArgumentError("classification needs at least 2 output classes");
  }
}

double VariationalState::gamma(std::size_t l, std::size_t j) const noexcept {
  if (!has_spike(l)) return 1.0;
  return std::clamp(sigmoid(layers[l].phi[j]), kGammaClamp, 1.0 - kGammaClamp);
}

bool VariationalState::gamma_clamped(std::size_t l, std::size_t j) const noexcept {
  if (!has_spike(l)) return true;
  const double g = sigmoid(layers[l].phi[j]);
  return g < kGammaClamp || g > 1.0 - kGammaClamp;
}

void VariationalState::validate() const {
  arch.validate();
  const std::size_t nl = arch.num_layers();
  if (layers.size() != nl) throw ShapeError("state has wrong number of layers");
  if (prior.lambda.size() != nl) throw ArgumentError("prior lambda must have length L+1");
  if (prior.lambda.back() != 1.0) throw ArgumentError("prior lambda for the output layer must be 1");
  for (std::size_t l = 0; l + 1 < nl; ++l) {
    if (!(prior.lambda[l] > 0.0 && prior.lambda[l] <= 1.0)) {
      throw ArgumentError("prior lambda_" + std::to_string(l) + " must lie in (0,1]");
    }
  }
  if (!(prior.sigma0_2 > 0.0) || !(prior.sigma_e2 > 0.0)) {
    throw ArgumentError("prior variances must be positive");
  }
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& p = layers[l];
    const std::size_t rows = arch.widths[l + 1];
    const std::size_t cols = arch.widths[l] + 1;
    if (p.mu.rows() != rows || p.mu.cols() != cols || !p.mu.same_shape(p.rho)) {
      throw ShapeError("layer " + std::to_string(l) + " parameter shape mismatch");
    }
    const std::size_t phi_len = has_spike(l) ? rows : 0;
    if (p.phi.size() != phi_len) {
      throw ShapeError("layer " + std::to_string(l) + " phi length mismatch");
    }
  }
}

Gradients Gradients::zeros_like(const VariationalState& state) {
  Gradients g;
  g.layers.reserve(state.layers.size());
  for (const auto& p : state.layers) {
    g.layers.push_back({Matrix(p.mu.rows(), p.mu.cols()), Matrix(p.rho.rows(), p.rho.cols()),
                        std::vector<double>(p.phi.size(), 0.0)});
  }
  return g;
}

std::vector<std::span<double>> parameter_blocks(VariationalState& state) {
  std::vector<std::span<double>> blocks;
  for (auto& p : state.layers) {
    blocks.push_back(p.mu.values());
    blocks.push_back(p.rho.values());
    if (!p.phi.empty()) blocks.emplace_back(p.phi);
  }
  return blocks;
}

std::vector<std::span<double>> gradient_blocks(Gradients& grads) {
  std::vector<std::span<double>> blocks;
  for (auto& g : grads.layers) {
    blocks.push_back(g.mu.values());
    blocks.push_back(g.rho.values());
    if (!g.phi.empty()) blocks.emplace_back(g.phi);
  }
  return blocks;
}

VariationalState init_state(const Architecture& arch, PriorConfig prior, Mode mode,
                            std::uint64_t seed, const InitOptions& options) {
  arch.validate();
  if (!(options.gamma > 0.0 && options.gamma < 1.0)) {
    throw ArgumentError("initial gamma must lie in (0,1)");
  }
  VariationalState state;
  state.arch = arch;
  state.prior = std::move(prior);
  state.mode = mode;

  RandomStream stream(seed, stream_id(StreamPurpose::init));
  const double phi0 = logit(options.gamma);
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::size_t rows = arch.widths[l + 1];
    const std::size_t cols = arch.widths[l] + 1;
    const double bound = options.scheme == InitScheme::uniform_range
                             ? options.range
                             : std::sqrt(6.0 / static_cast<double>(arch.widths[l]));
    LayerParams p{Matrix(rows, cols), Matrix(rows, cols, options.rho), {}};
    for (double& m : p.mu.values()) m = bound * (2.0 * stream.next_uniform() - 1.0);
    if (state.has_spike(l)) p.phi.assign(rows, phi0);
    state.layers.push_back(std::move(p));
  }
  state.validate();
  return state;
}

RealizedSample draw_sample(const VariationalState& state, RandomStream& stream, MaskMode mode,
                           double tau) {
  if (!(tau > 0.0)) throw ArgumentError("draw_sample: tau must be positive");
  RealizedSample sample;
  sample.mode = mode;
  sample.tau = tau;
  sample.layers.reserve(state.layers.size());
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& p = state.layers[l];
    const std::size_t rows = p.mu.rows();
    LayerSample ls;
    ls.zeta = Matrix(rows, p.mu.cols());
    ls.u.assign(rows, 0.5);
    if (mode != MaskMode::mean) {
      stream.fill_normal(ls.zeta.values());
      stream.fill_uniform(ls.u);
    }
    ls.z_hard.assign(rows, 1);
    ls.z_soft.assign(rows, 1.0);
    if (state.has_spike(l)) {
      for (std::size_t j = 0; j < rows; ++j) {
        const double g = state.gamma(l, j);
        if (mode == MaskMode::mean) {
          ls.z_hard[j] = g > 0.5;
          ls.z_soft[j] = ls.z_hard[j];
        } else {
          const GumbelDraw d = gumbel_softmax_sample(g, tau, ls.u[j]);
          ls.z_hard[j] = d.z_hard;
          ls.z_soft[j] = d.z_soft;
        }
      }
    }
    ls.z.resize(rows);
    for (std::size_t j = 0; j < rows; ++j) {
      ls.z[j] = mode == MaskMode::soft ? ls.z_soft[j] : static_cast<double>(ls.z_hard[j]);
    }
    ls.weights = Matrix(rows, p.mu.cols());
    for (std::size_t j = 0; j < rows; ++j) {
      auto w = ls.weights.row(j);
      auto mu = p.mu.row(j);
      auto rho = p.rho.row(j);
      auto zeta = ls.zeta.row(j);
      for (std::size_t c = 0; c < w.size(); ++c) {
        w[c] = ls.z[j] * (mu[c] + softplus(rho[c]) * zeta[c]);
      }
    }
    sample.layers.push_back(std::move(ls));
  }
  return sample;
}

ForwardCache forward_batch(const Architecture& arch, std::span<const Matrix> weights,
                           const Matrix& inputs) {
  const std::size_t nl = arch.num_layers();
  if (weights.size() != nl) throw ShapeError("forward: wrong number of weight layers");
  if (inputs.cols() != arch.input_dim()) {
    throw ShapeError("forward: input has " + std::to_string(inputs.cols()) +
                     " features, network expects " + std::to_string(arch.input_dim()));
  }
  const std::size_t m = inputs.rows();
  ForwardCache cache;
  cache.act.reserve(nl);
  cache.pre.reserve(nl + 1);
  cache.act.push_back(inputs);
  cache.pre.emplace_back();  // pre[0] unused
  for (std::size_t l = 0; l < nl; ++l) {
    const Matrix& w = weights[l];
    const std::size_t kin = arch.widths[l];
    const std::size_t kout = arch.widths[l + 1];
    if (w.rows() != kout || w.cols() != kin + 1) throw ShapeError("forward: weight shape mismatch");
    const Matrix& in = cache.act[l];
    Matrix h(m, kout);
    for (std::size_t i = 0; i < m; ++i) {
      const double* x = in.row(i).data();
      double* out = h.row(i).data();
      for (std::size_t j = 0; j < kout; ++j) {
        const double* wr = w.row(j).data();
        out[j] = wr[0] + simd::dot(wr + 1, x, kin);
      }
    }
    if (l + 1 < nl) {
      Matrix a(m, kout);
      auto hv = h.values();
      auto av = a.values();
      for (std::size_t t = 0; t < hv.size(); ++t) av[t] = activate(arch.activation, hv[t]);
      cache.pre.push_back(std::move(h));
      cache.act.push_back(std::move(a));
    } else {
      cache.pre.push_back(std::move(h));
    }
  }
  return cache;
}

Matrix forward_batch(const Architecture& arch, const RealizedSample& sample, const Matrix& inputs) {
  std::vector<Matrix> weights;
  weights.reserve(sample.layers.size());
  for (const auto& ls : sample.layers) weights.push_back(ls.weights);
  return std::move(forward_batch(arch, weights, inputs).pre.back());
}

std::vector<double> forward(const Architecture& arch, const RealizedSample& sample,
                            std::span<const double> x) {
  if (x.size() != arch.input_dim()) throw ShapeError("forward: input length mismatch");
  Matrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
  Matrix out = forward_batch(arch, sample, in);
  return {out.values().begin(), out.values().end()};
}

std::vector<Matrix> backward_batch(const Architecture& arch, std::span<const Matrix> weights,
                                   const ForwardCache& cache, Matrix d_output) {
  const std::size_t nl = arch.num_layers();
  const std::size_t m = cache.act[0].rows();
  std::vector<Matrix> dw(nl);
  Matrix dh = std::move(d_output);
  for (std::size_t l = nl; l-- > 0;) {
    const Matrix& w = weights[l];
    const Matrix& in = cache.act[l];
    const std::size_t kin = arch.widths[l];
    const std::size_t kout = arch.widths[l + 1];
    Matrix g(kout, kin + 1);
    for (std::size_t i = 0; i < m; ++i) {
      const double* x = in.row(i).data();
      const double* d = dh.row(i).data();
      for (std::size_t j = 0; j < kout; ++j) {
        double* gr = g.row(j).data();
        gr[0] += d[j];
        simd::axpy(d[j], x, gr + 1, kin);
      }
    }
    dw[l] = std::move(g);
    if (l == 0) break;
    Matrix da(m, kin);
    for (std::size_t i = 0; i < m; ++i) {
      const double* d = dh.row(i).data();
      double* out = da.row(i).data();
      for (std::size_t j = 0; j < kout; ++j) simd::axpy(d[j], w.row(j).data() + 1, out, kin);
    }
    const Matrix& pre = cache.pre[l];
    auto dv = da.values();
    auto pv = pre.values();
    for (std::size_t t = 0; t < dv.size(); ++t) dv[t] *= activate_derivative(arch.activation, pv[t]);
    dh = std::move(da);
  }
  return dw;
}

}  // namespace ssig
