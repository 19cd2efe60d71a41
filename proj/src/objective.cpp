#include "ssig/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ssig/distributions.hpp"
#include "ssig/error.hpp"

namespace ssig {

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) noexcept {
  nll += o.nll;
  kl_bern += o.kl_bern;
  kl_gauss += o.kl_gauss;
  total += o.total;
  return *this;
}

LossBreakdown& LossBreakdown::operator*=(double s) noexcept {
  nll *= s;
  kl_bern *= s;
  kl_gauss *= s;
  total *= s;
  return *this;
}

double nll_gaussian(double pred, double y, double sigma_e2) noexcept {
  const double r = y - pred;
  return 0.5 * std::log(2.0 * std::numbers::pi * sigma_e2) + r * r / (2.0 * sigma_e2);
}

double nll_categorical(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw ArgumentError("nll_categorical: label " + std::to_string(label) + " out of range");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double v : logits) acc += std::exp(v - mx);
  return (mx + std::log(acc)) - logits[label];
}

void softmax_inplace(std::span<double> logits) noexcept {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    acc += v;
  }
  for (double& v : logits) v /= acc;
}

Matrix gather_features(const BatchView& batch) {
  if (batch.rows.empty()) return batch.features;
  const std::size_t p = batch.features.cols();
  Matrix out(batch.rows.size(), p);
  for (std::size_t i = 0; i < batch.rows.size(); ++i) {
    auto src = batch.features.row(batch.rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

KlTerms kl_terms(const VariationalState& state) {
  KlTerms kl;
  std::vector<double> sigma2;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& p = state.layers[l];
    const double lambda = state.prior.lambda[l];
    sigma2.resize(p.rho.cols());
    for (std::size_t j = 0; j < p.mu.rows(); ++j) {
      const double g = state.gamma(l, j);
      if (state.has_spike(l)) kl.bern += kl_bernoulli(g, lambda);
      auto rho = p.rho.row(j);
      for (std::size_t c = 0; c < rho.size(); ++c) {
        const double s = softplus(rho[c]);
        sigma2[c] = s * s;
      }
      kl.gauss += g * kl_gaussian_diag(p.mu.row(j), sigma2, state.prior.sigma0_2);
    }
  }
  return kl;
}

void add_kl_gradients(const VariationalState& state, Gradients& grads) {
  const double s0 = state.prior.sigma0_2;
  std::vector<double> sigma2;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& p = state.layers[l];
    auto& g = grads.layers[l];
    sigma2.resize(p.rho.cols());
    for (std::size_t j = 0; j < p.mu.rows(); ++j) {
      const double gam = state.gamma(l, j);
      auto mu = p.mu.row(j);
      auto rho = p.rho.row(j);
      auto gmu = g.mu.row(j);
      auto grho = g.rho.row(j);
      for (std::size_t c = 0; c < mu.size(); ++c) {
        const double sigma = softplus(rho[c]);
        sigma2[c] = sigma * sigma;
        gmu[c] += gam * mu[c] / s0;
        // d/d sigma of 0.5 (sigma^2/s0 - log sigma^2), chained through softplus.
        grho[c] += gam * (sigma / s0 - 1.0 / sigma) * sigmoid(rho[c]);
      }
      if (state.has_spike(l) && !state.gamma_clamped(l, j)) {
        const double dgamma_dphi = gam * (1.0 - gam);
        const double kl_g = kl_gaussian_diag(mu, sigma2, s0);
        g.phi[j] +=
            (kl_bernoulli_dgamma(gam, state.prior.lambda[l]) + kl_g) * dgamma_dphi;
      }
    }
  }
}

double batch_nll(const Architecture& arch, const Matrix& predictions, const BatchView& batch,
                 double sigma_e2) {
  if (predictions.rows() != batch.size() || predictions.cols() != arch.output_dim()) {
    throw ShapeError("batch_nll: prediction shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double y = batch.targets[batch.row(i)];
    if (arch.task == Task::regression) {
      acc += nll_gaussian(predictions(i, 0), y, sigma_e2);
    } else {
      acc += nll_categorical(predictions.row(i), static_cast<std::size_t>(y));
    }
  }
  return acc;
}

LossBreakdown negative_elbo(const VariationalState& state, const BatchView& batch,
                            std::size_t n_total, std::span<const Matrix> predictions) {
  const std::size_t m = batch.size();
  if (m == 0) throw ArgumentError("negative_elbo: empty batch");
  if (n_total < m) throw ArgumentError("negative_elbo: n_total smaller than batch");
  if (predictions.empty()) throw ArgumentError("negative_elbo: no Monte Carlo draws");
  double nll = 0.0;
  for (const Matrix& pred : predictions) {
    nll += batch_nll(state.arch, pred, batch, state.prior.sigma_e2);
  }
  nll /= static_cast<double>(predictions.size());
  nll *= static_cast<double>(n_total) / static_cast<double>(m);
  const KlTerms kl = kl_terms(state);
  LossBreakdown out;
  out.nll = nll;
  out.kl_bern = kl.bern;
  out.kl_gauss = kl.gauss;
  out.total = nll + kl.bern + kl.gauss;
  return out;
}

}  // namespace ssig
