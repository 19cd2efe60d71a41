#pragma once

// Layer-wise prior hyperparameters derived from posterior contraction
// theory. Widths are given as k = (k_0, ..., k_{L+1}), so a network with L
// hidden layers has L + 1 weight layers indexed l = 0..L. All logarithms are
// natural.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssig::prior {

using Widths = std::vector<std::size_t>;

// u_l = (L+1)^2 (log n + log(L+1) + log k_{l+1} + log(k_l+1)), l = 0..L.
// Throws DomainError for n < 2 and ArgumentError for malformed widths.
std::vector<double> compute_u(std::size_t depth, const Widths& k, double n);

// B_l = k_l + 1, l = 0..L.
std::vector<double> default_B(const Widths& k);

// theta_l = B_l^2/(k_l+1) + sum_{m != l} log B_m + L + log k_{l+1}
//           + log(k_l+1) + log n + log(sum_m u_m)
std::vector<double> compute_vartheta(std::size_t depth, const Widths& k,
                                     const std::vector<double>& B, double n,
                                     const std::vector<double>& u);

// r_l = s_l (k_l+1) theta_l / n. Requires 0 <= s_l <= k_{l+1}.
std::vector<double> compute_r(const std::vector<double>& s, const Widths& k,
                              const std::vector<double>& vartheta, double n);

// lambda_l = exp(-log k_{l+1} - C_l (k_l+1) theta_l) for hidden layers and
// lambda_L = 1. Throws UnderflowError when a hidden lambda rounds to 0.
std::vector<double> compute_lambda(const Widths& k, const std::vector<double>& vartheta,
                                   const std::vector<double>& C);

struct CSelection {
  std::vector<double> C;         // length L+1; C_L = 0 (unused)
  std::vector<bool> infeasible;  // true where no grid value met the floor
  bool any_infeasible() const;
};

// Largest C_l in {1e-1, 1e-2, ..., 1e-16} keeping lambda_l >= floor, per
// hidden layer. Falls back to C_l = 0 and flags the layer when none does.
CSelection select_C(const Widths& k, const std::vector<double>& vartheta,
                    double floor = 1e-50);

// sqrt((sum r_l + xi) * sum u_l).
double compute_epsilon_n(const std::vector<double>& r, double xi, const std::vector<double>& u);

struct PriorReport {
  std::vector<double> u;
  std::vector<double> vartheta;
  std::vector<double> r;
  std::vector<double> C;
  std::vector<double> lambda;
  std::vector<bool> C_infeasible;
  double epsilon_n = 0.0;
  double xi = 0.0;
  double n = 0.0;
  std::vector<double> s;
  std::vector<double> B;
  Widths k;
  double floor = 1e-50;
};

struct PriorRequest {
  Widths k;
  double n = 0.0;
  std::vector<double> s;  // empty: s_l = k_{l+1}
  std::vector<double> B;  // empty: default_B
  std::vector<double> C;  // empty: select_C
  double xi = 0.0;
  double floor = 1e-50;
};

// Runs the full calculation with the documented defaults.
PriorReport build_report(const PriorRequest& request);

void to_json(nlohmann::json& j, const PriorReport& report);

}  // namespace ssig::prior
