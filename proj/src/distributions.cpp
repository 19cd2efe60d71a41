#include "ssig/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssig/error.hpp"

namespace ssig {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double rho) noexcept {
  // log1p(exp(-|rho|)) + max(rho, 0)
  return std::log1p(std::exp(-std::abs(rho))) + std::max(rho, 0.0);
}

double inverse_softplus(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("inverse_softplus: sigma must be positive");
  // log(exp(sigma) - 1) = sigma + log(1 - exp(-sigma))
  return sigma + std::log(-std::expm1(-sigma));
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

GumbelDraw gumbel_softmax_sample(double gamma, double tau, double u) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("gumbel_softmax_sample: gamma must lie in (0,1), got " +
                      std::to_string(gamma));
  }
  if (!(tau > 0.0)) throw DomainError("gumbel_softmax_sample: tau must be positive");
  const double uc = std::clamp(u, kUniformClamp, 1.0 - kUniformClamp);
  GumbelDraw d{};
  d.u = u;
  d.eta = logit(gamma) + logit(uc);
  d.z_soft = sigmoid(d.eta / tau);
  d.z_hard = d.z_soft > 0.5;
  return d;
}

double kl_bernoulli(double gamma, double lambda) {
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("kl_bernoulli: probabilities must lie in [0,1]");
  }
  if ((lambda == 0.0 || lambda == 1.0) && gamma != lambda) {
    throw OverflowError("kl_bernoulli: infinite divergence (lambda at boundary)");
  }
  double kl = 0.0;
  if (gamma > 0.0) kl += gamma * std::log(gamma / lambda);
  if (gamma < 1.0) kl += (1.0 - gamma) * std::log((1.0 - gamma) / (1.0 - lambda));
  return std::max(kl, 0.0);
}

double kl_bernoulli_dgamma(double gamma, double lambda) noexcept {
  return std::log(gamma / lambda) - std::log((1.0 - gamma) / (1.0 - lambda));
}

double kl_gaussian_diag(std::span<const double> mu, std::span<const double> sigma2,
                        double sigma0_2) {
  if (mu.size() != sigma2.size()) throw ShapeError("kl_gaussian_diag: length mismatch");
  if (mu.empty()) throw ShapeError("kl_gaussian_diag: empty input");
  if (!(sigma0_2 > 0.0)) throw DomainError("kl_gaussian_diag: prior variance must be positive");
  double acc = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!(sigma2[j] > 0.0)) throw DomainError("kl_gaussian_diag: variance must be positive");
    const double ratio = sigma2[j] / sigma0_2;
    acc += ratio + mu[j] * mu[j] / sigma0_2 - 1.0 - std::log(ratio);
  }
  return 0.5 * acc;
}

Matrix reparam_gaussian(const Matrix& mu, const Matrix& sigma, const Matrix& zeta) {
  if (!mu.same_shape(sigma) || !mu.same_shape(zeta)) {
    throw ShapeError("reparam_gaussian: shape mismatch");
  }
  Matrix w(mu.rows(), mu.cols());
  auto out = w.values();
  auto m = mu.values();
  auto s = sigma.values();
  auto z = zeta.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] + s[i] * z[i];
  return w;
}

}  // namespace ssig
