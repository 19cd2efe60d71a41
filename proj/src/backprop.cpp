#include "ssig/backprop.hpp"

#include <string>
#include <vector>

#include "ssig/distributions.hpp"
#include "ssig/error.hpp"

namespace ssig {
namespace {

Matrix output_gradient(const VariationalState& state, const Matrix& pred, const BatchView& batch,
                       double scale) {
  Matrix d(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    const double y = batch.targets[batch.row(i)];
    if (state.arch.task == Task::regression) {
      d(i, 0) = scale * (pred(i, 0) - y) / state.prior.sigma_e2;
    } else {
      auto out = d.row(i);
      auto in = pred.row(i);
      std::copy(in.begin(), in.end(), out.begin());
      softmax_inplace(out);
      out[static_cast<std::size_t>(y)] -= 1.0;
      for (double& v : out) v *= scale;
    }
  }
  return d;
}

}  // namespace

LossAndGradients loss_and_gradients(const VariationalState& state, const BatchView& batch,
                                    std::size_t n_total, std::size_t samples, double tau,
                                    RandomStream& stream, MaskMode mask_mode) {
  const std::size_t m = batch.size();
  if (m == 0) throw ArgumentError("loss_and_gradients: empty batch");
  if (samples == 0) throw ArgumentError("loss_and_gradients: need at least one sample");
  if (n_total < m) throw ArgumentError("loss_and_gradients: n_total smaller than batch");

  const Matrix x = gather_features(batch);
  const double scale = static_cast<double>(n_total) / static_cast<double>(m) /
                       static_cast<double>(samples);

  LossAndGradients out{{}, Gradients::zeros_like(state)};
  std::vector<Matrix> predictions;
  predictions.reserve(samples);
  std::vector<Matrix> weights(state.layers.size());

  for (std::size_t s = 0; s < samples; ++s) {
    RealizedSample sample = draw_sample(state, stream, mask_mode, tau);
    for (std::size_t l = 0; l < weights.size(); ++l) weights[l] = std::move(sample.layers[l].weights);
    ForwardCache cache = forward_batch(state.arch, weights, x);
    if (mask_mode == MaskMode::hard && state.mode == Mode::ssig && state.arch.depth() > 0) {
      // The logged loss keeps the hard masks; the gradient is that of the
      // relaxed network built from the same draw.
      predictions.push_back(std::move(cache.pre.back()));
      for (std::size_t l = 0; l < state.arch.depth(); ++l) {
        const auto& ls = sample.layers[l];
        const auto& p = state.layers[l];
        for (std::size_t j = 0; j < p.mu.rows(); ++j) {
          auto w = weights[l].row(j);
          auto mu = p.mu.row(j);
          auto rho = p.rho.row(j);
          auto zeta = ls.zeta.row(j);
          for (std::size_t c = 0; c < w.size(); ++c) {
            w[c] = ls.z_soft[j] * (mu[c] + softplus(rho[c]) * zeta[c]);
          }
        }
      }
      cache = forward_batch(state.arch, weights, x);
    }
    Matrix d_out = output_gradient(state, cache.output(), batch, scale);
    std::vector<Matrix> dw = backward_batch(state.arch, weights, cache, std::move(d_out));
    if (predictions.size() == s) predictions.push_back(std::move(cache.pre.back()));

    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      const auto& p = state.layers[l];
      const auto& ls = sample.layers[l];
      auto& g = out.grads.layers[l];
      const bool spike = state.has_spike(l) && mask_mode != MaskMode::mean;
      for (std::size_t j = 0; j < p.mu.rows(); ++j) {
        const double z = mask_mode == MaskMode::mean ? ls.z[j] : ls.z_soft[j];
        auto d = dw[l].row(j);
        auto mu = p.mu.row(j);
        auto rho = p.rho.row(j);
        auto zeta = ls.zeta.row(j);
        auto gmu = g.mu.row(j);
        auto grho = g.rho.row(j);
        double dz = 0.0;
        for (std::size_t c = 0; c < d.size(); ++c) {
          const double sig = softplus(rho[c]);
          gmu[c] += d[c] * z;
          grho[c] += d[c] * z * zeta[c] * sigmoid(rho[c]);
          dz += d[c] * (mu[c] + sig * zeta[c]);
        }
        if (spike && !state.gamma_clamped(l, j)) {
          const double zs = ls.z_soft[j];
          g.phi[j] += dz * zs * (1.0 - zs) / tau;
        }
      }
    }
  }

  out.loss = negative_elbo(state, batch, n_total, predictions);
  add_kl_gradients(state, out.grads);
  return out;
}

}  // namespace ssig
