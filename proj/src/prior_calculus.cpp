#include "ssig/prior_calculus.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <json.hpp>

#include "ssig/error.hpp"

namespace ssig::prior {
namespace {

std::size_t depth_of(const Widths& k) {
  if (k.size() < 2) throw ArgumentError("width vector needs at least input and output widths");
  for (std::size_t w : k) {
    if (w == 0) throw ArgumentError("layer widths must be at least 1");
  }
  return k.size() - 2;
}

void expect_len(const std::vector<double>& v, std::size_t len, const char* what) {
  if (v.size() != len) {
    throw ArgumentError(std::string(what) + ": expected length " + std::to_string(len) +
                        ", got " + std::to_string(v.size()));
  }
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

std::vector<double> compute_u(std::size_t depth, const Widths& k, double n) {
  if (depth_of(k) != depth) throw ArgumentError("compute_u: width vector must have length L+2");
  if (!(n >= 2.0)) throw DomainError("compute_u: n must be at least 2");
  const double lp1 = static_cast<double>(depth + 1);
  std::vector<double> u(depth + 1);
  for (std::size_t l = 0; l <= depth; ++l) {
    u[l] = lp1 * lp1 *
           (std::log(n) + std::log(lp1) + std::log(static_cast<double>(k[l + 1])) +
            std::log(static_cast<double>(k[l]) + 1.0));
  }
  return u;
}

std::vector<double> default_B(const Widths& k) {
  const std::size_t depth = depth_of(k);
  std::vector<double> B(depth + 1);
  for (std::size_t l = 0; l <= depth; ++l) B[l] = static_cast<double>(k[l]) + 1.0;
  return B;
}

std::vector<double> compute_vartheta(std::size_t depth, const Widths& k,
                                     const std::vector<double>& B, double n,
                                     const std::vector<double>& u) {
  if (depth_of(k) != depth) throw ArgumentError("compute_vartheta: width vector must have length L+2");
  expect_len(B, depth + 1, "compute_vartheta B");
  expect_len(u, depth + 1, "compute_vartheta u");
  for (double b : B) {
    if (!(b > 0.0)) throw DomainError("compute_vartheta: norm bounds must be positive");
  }
  if (!(n > 0.0)) throw DomainError("compute_vartheta: n must be positive");
  const double usum = sum(u);
  if (!(usum > 0.0)) throw DomainError("compute_vartheta: sum of u must be positive");

  double log_b_total = 0.0;
  for (double b : B) log_b_total += std::log(b);

  const double common = static_cast<double>(depth) + std::log(n) + std::log(usum);
  std::vector<double> theta(depth + 1);
  for (std::size_t l = 0; l <= depth; ++l) {
    const double kin = static_cast<double>(k[l]) + 1.0;
    theta[l] = B[l] * B[l] / kin + (log_b_total - std::log(B[l])) + common +
               std::log(static_cast<double>(k[l + 1])) + std::log(kin);
  }
  return theta;
}

std::vector<double> compute_r(const std::vector<double>& s, const Widths& k,
                              const std::vector<double>& vartheta, double n) {
  const std::size_t depth = depth_of(k);
  expect_len(s, depth + 1, "compute_r s");
  expect_len(vartheta, depth + 1, "compute_r vartheta");
  if (!(n > 0.0)) throw DomainError("compute_r: n must be positive");
  std::vector<double> r(depth + 1);
  for (std::size_t l = 0; l <= depth; ++l) {
    if (!(s[l] >= 0.0 && s[l] <= static_cast<double>(k[l + 1]))) {
      throw DomainError("compute_r: s_" + std::to_string(l) + " must lie in [0, k_{l+1}]");
    }
    r[l] = s[l] * (static_cast<double>(k[l]) + 1.0) * vartheta[l] / n;
  }
  return r;
}

std::vector<double> compute_lambda(const Widths& k, const std::vector<double>& vartheta,
                                   const std::vector<double>& C) {
  const std::size_t depth = depth_of(k);
  expect_len(vartheta, depth + 1, "compute_lambda vartheta");
  if (C.size() != depth && C.size() != depth + 1) {
    throw ArgumentError("compute_lambda: C needs one entry per hidden layer");
  }
  std::vector<double> lambda(depth + 1, 1.0);
  for (std::size_t l = 0; l < depth; ++l) {
    if (!(C[l] >= 0.0)) throw DomainError("compute_lambda: C_l must be nonnegative");
    const double log_lambda = -std::log(static_cast<double>(k[l + 1])) -
                              C[l] * (static_cast<double>(k[l]) + 1.0) * vartheta[l];
    lambda[l] = std::exp(log_lambda);
    if (lambda[l] == 0.0) {
      throw UnderflowError("compute_lambda: lambda_" + std::to_string(l) +
                           " underflows to 0; shrink C_" + std::to_string(l));
    }
  }
  return lambda;
}

bool CSelection::any_infeasible() const {
  for (bool b : infeasible) {
    if (b) return true;
  }
  return false;
}

CSelection select_C(const Widths& k, const std::vector<double>& vartheta, double floor) {
  const std::size_t depth = depth_of(k);
  expect_len(vartheta, depth + 1, "select_C vartheta");
  if (!(floor > 0.0 && floor < 1.0)) throw DomainError("select_C: floor must lie in (0,1)");
  const double log_floor = std::log(floor);
  CSelection sel{std::vector<double>(depth + 1, 0.0), std::vector<bool>(depth + 1, false)};
  for (std::size_t l = 0; l < depth; ++l) {
    const double base = -std::log(static_cast<double>(k[l + 1]));
    const double slope = (static_cast<double>(k[l]) + 1.0) * vartheta[l];
    bool found = false;
    for (int e = 1; e <= 16; ++e) {
      const double c = std::pow(10.0, -e);
      if (base - c * slope >= log_floor) {
        sel.C[l] = c;
        found = true;
        break;
      }
    }
    sel.infeasible[l] = !found;
  }
  return sel;
}

double compute_epsilon_n(const std::vector<double>& r, double xi, const std::vector<double>& u) {
  if (!(xi >= 0.0)) throw DomainError("compute_epsilon_n: xi must be nonnegative");
  return std::sqrt((sum(r) + xi) * sum(u));
}

PriorReport build_report(const PriorRequest& req) {
  const std::size_t depth = depth_of(req.k);
  PriorReport rep;
  rep.k = req.k;
  rep.n = req.n;
  rep.xi = req.xi;
  rep.floor = req.floor;
  rep.u = compute_u(depth, req.k, req.n);
  rep.B = req.B.empty() ? default_B(req.k) : req.B;
  if (req.s.empty()) {
    rep.s.resize(depth + 1);
    for (std::size_t l = 0; l <= depth; ++l) rep.s[l] = static_cast<double>(req.k[l + 1]);
  } else {
    rep.s = req.s;
  }
  rep.vartheta = compute_vartheta(depth, req.k, rep.B, req.n, rep.u);
  rep.r = compute_r(rep.s, req.k, rep.vartheta, req.n);
  if (req.C.empty()) {
    auto sel = select_C(req.k, rep.vartheta, req.floor);
    rep.C = std::move(sel.C);
    rep.C_infeasible = std::move(sel.infeasible);
  } else {
    rep.C = req.C;
    if (rep.C.size() == depth) rep.C.push_back(0.0);
    rep.C_infeasible.assign(depth + 1, false);
  }
  rep.lambda = compute_lambda(req.k, rep.vartheta, rep.C);
  rep.epsilon_n = compute_epsilon_n(rep.r, req.xi, rep.u);
  return rep;
}

void to_json(nlohmann::json& j, const PriorReport& r) {
  j = nlohmann::json{{"k", r.k},
                     {"n", r.n},
                     {"s", r.s},
                     {"B", r.B},
                     {"xi", r.xi},
                     {"floor", r.floor},
                     {"u", r.u},
                     {"vartheta", r.vartheta},
                     {"r", r.r},
                     {"C", r.C},
                     {"C_infeasible", r.C_infeasible},
                     {"lambda", r.lambda},
                     {"epsilon_n", r.epsilon_n}};
}

}  // namespace ssig::prior
