#pragma once

// Straight-line reference implementations used as test oracles. Nothing here
// calls into the library's numeric helpers, so agreement is a real check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

inline double kl_bernoulli(double g, double lam) {
  double a = 0.0;
  double b = 0.0;
  if (g > 0.0) a = g * std::log(g / lam);
  if (g < 1.0) b = (1.0 - g) * std::log((1.0 - g) / (1.0 - lam));
  return a + b;
}

inline double kl_gaussian(const std::vector<double>& mu, const std::vector<double>& s2, double s0) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double ratio = s2[i] / s0;
    acc += ratio + mu[i] * mu[i] / s0 - 1.0 - std::log(ratio);
  }
  return 0.5 * acc;
}

// k = (k_0, ..., k_{L+1})
inline std::vector<double> u(const std::vector<double>& k, double n) {
  const std::size_t L = k.size() - 2;
  const double lp1 = static_cast<double>(L + 1);
  std::vector<double> out;
  for (std::size_t l = 0; l <= L; ++l) {
    out.push_back(lp1 * lp1 *
                  (std::log(n) + std::log(lp1) + std::log(k[l + 1]) + std::log(k[l] + 1.0)));
  }
  return out;
}

inline std::vector<double> vartheta(const std::vector<double>& k, const std::vector<double>& B,
                                    double n, const std::vector<double>& uu) {
  const std::size_t L = k.size() - 2;
  double su = 0.0;
  for (double x : uu) su += x;
  std::vector<double> out;
  for (std::size_t l = 0; l <= L; ++l) {
    double logs = 0.0;
    for (std::size_t m = 0; m <= L; ++m) {
      if (m != l) logs += std::log(B[m]);
    }
    out.push_back(B[l] * B[l] / (k[l] + 1.0) + logs + static_cast<double>(L) + std::log(k[l + 1]) +
                  std::log(k[l] + 1.0) + std::log(n) + std::log(su));
  }
  return out;
}

inline std::vector<double> r(const std::vector<double>& s, const std::vector<double>& k,
                             const std::vector<double>& th, double n) {
  std::vector<double> out;
  for (std::size_t l = 0; l < s.size(); ++l) out.push_back(s[l] * (k[l] + 1.0) * th[l] / n);
  return out;
}

inline std::vector<double> lambda(const std::vector<double>& k, const std::vector<double>& th,
                                  const std::vector<double>& C) {
  const std::size_t L = k.size() - 2;
  std::vector<double> out;
  for (std::size_t l = 0; l < L; ++l) {
    out.push_back(std::exp(-std::log(k[l + 1]) - C[l] * (k[l] + 1.0) * th[l]));
  }
  out.push_back(1.0);
  return out;
}

inline double epsilon_n(const std::vector<double>& rr, double xi, const std::vector<double>& uu) {
  double sr = 0.0;
  double su = 0.0;
  for (double x : rr) sr += x;
  for (double x : uu) su += x;
  return std::sqrt((sr + xi) * su);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Sim I teacher written out by hand.
inline double teacher(double x1, double x2) {
  const double h1 = logistic(-5.0 + 10.0 * x1 + 15.0 * x2);
  const double h2 = logistic(5.0 - 15.0 * x1 + 10.0 * x2);
  return 4.0 - 3.0 * h1 + 3.0 * h2;
}

inline double sim2(const double* x) {
  return 7.0 * x[1] / (1.0 + x[0] * x[0]) + std::sin(x[2] * x[3]) + 2.0 * x[4];
}

// Box-Muller, first output.
inline double box_muller_first(double u1, double u2) {
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double relative_error(double a, double b, double floor = 0.0) {
  const double den = std::max({std::abs(a), std::abs(b), floor});
  return den == 0.0 ? 0.0 : std::abs(a - b) / den;
}

}  // namespace oracle
