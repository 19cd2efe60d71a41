#pragma once

// Spike-and-slab building blocks: the binary Gumbel-softmax (Concrete)
// relaxation of the Bernoulli spike, the non-centred Gaussian slab, and the
// closed-form KL divergences between variational factors and the prior.

#include <span>

#include "ssig/matrix.hpp"

namespace ssig {

// Clamp applied to uniforms before taking their logit.
inline constexpr double kUniformClamp = 1e-12;

double sigmoid(double x) noexcept;

// log(1 + exp(rho)), overflow-safe.
double softplus(double rho) noexcept;
// Inverse of softplus; throws DomainError for sigma <= 0.
double inverse_softplus(double sigma);

// log(p) - log(1 - p).
double logit(double p) noexcept;

struct GumbelDraw {
  double z_soft;  // sigmoid(eta / tau)
  bool z_hard;    // z_soft > 0.5
  double eta;     // logit(gamma) + logit(u)
  double u;
};

// Coupled relaxed/hard Bernoulli(gamma) draw from one uniform u. z_hard is
// 1 exactly when u > 1 - gamma, which gives the hard draw marginal
// Bernoulli(gamma). Throws DomainError unless 0 < gamma < 1 and tau > 0.
GumbelDraw gumbel_softmax_sample(double gamma, double tau, double u);

// KL(Ber(gamma) || Ber(lambda)) with 0 log 0 = 0.
// DomainError for arguments outside [0, 1]; OverflowError when lambda is 0 or
// 1 and gamma differs from it.
double kl_bernoulli(double gamma, double lambda);

// d/dgamma of kl_bernoulli, for 0 < gamma, lambda < 1.
double kl_bernoulli_dgamma(double gamma, double lambda) noexcept;

// KL(N(mu, diag(sigma2)) || N(0, sigma0_2 I)).
double kl_gaussian_diag(std::span<const double> mu, std::span<const double> sigma2,
                        double sigma0_2);

// mu + sigma .* zeta. ShapeError on mismatched shapes.
Matrix reparam_gaussian(const Matrix& mu, const Matrix& sigma, const Matrix& zeta);

}  // namespace ssig
