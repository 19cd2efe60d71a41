#pragma once

// Negative evidence lower bound:
//   (n / m) * sum_{batch} NLL  (averaged over Monte Carlo draws)
//   + sum_{l<L, j} KL(Ber(gamma_lj) || Ber(lambda_l))
//   + sum_{l, j} gamma_lj * KL(N(mu_lj, diag sigma_lj^2) || N(0, sigma0^2 I)).
// The KL of the Dirac spike against itself is zero and does not appear.

#include <cstddef>
#include <span>
#include <vector>

#include "ssig/matrix.hpp"
#include "ssig/model.hpp"

namespace ssig {

struct LossBreakdown {
  double nll = 0.0;
  double kl_bern = 0.0;
  double kl_gauss = 0.0;
  double total = 0.0;

  LossBreakdown& operator+=(const LossBreakdown& o) noexcept;
  LossBreakdown& operator*=(double s) noexcept;
};

// 0.5 log(2 pi sigma_e2) + (y - pred)^2 / (2 sigma_e2)
double nll_gaussian(double pred, double y, double sigma_e2) noexcept;

// logsumexp(logits) - logits[label]; ArgumentError when label is out of range.
double nll_categorical(std::span<const double> logits, std::size_t label);

void softmax_inplace(std::span<double> logits) noexcept;

// A minibatch: selected rows of a feature matrix and their targets.
// Classification targets hold class indices.
struct BatchView {
  const Matrix& features;
  std::span<const double> targets;
  std::span<const std::size_t> rows;  // empty selects every row
  std::size_t size() const noexcept { return rows.empty() ? features.rows() : rows.size(); }
  std::size_t row(std::size_t i) const noexcept { return rows.empty() ? i : rows[i]; }
};

// Gathers the batch rows into a contiguous matrix.
Matrix gather_features(const BatchView& batch);

struct KlTerms {
  double bern = 0.0;
  double gauss = 0.0;
};

// Pure function of the state.
KlTerms kl_terms(const VariationalState& state);

// Adds d(kl_bern + kl_gauss)/d(mu, rho, phi) into grads.
void add_kl_gradients(const VariationalState& state, Gradients& grads);

// Summed (unscaled) negative log-likelihood of one prediction matrix.
double batch_nll(const Architecture& arch, const Matrix& predictions, const BatchView& batch,
                 double sigma_e2);

// predictions[s] holds the network outputs (batch rows x outputs) of draw s.
LossBreakdown negative_elbo(const VariationalState& state, const BatchView& batch,
                            std::size_t n_total, std::span<const Matrix> predictions);

}  // namespace ssig
