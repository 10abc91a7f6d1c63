//
// Copyright 2026 The dpce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "dpce/channel.hpp"
#include "dpce/linalg.hpp"
#include "dpce/rng.hpp"

namespace dpce {

enum class Mechanism { fw, svd };

struct PrivacyBudget {
  double eps = 1.0;
  double delta = 0.1;
  int T = 1;  // number of releases per AP

  void validate() const {
    if (!(eps > 0.0)) throw ArgumentError("eps must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must be in (0, 1)");
    if (T < 1) throw ArgumentError("T must be >= 1");
  }
};

struct NoiseScale {
  double L = 0.0;      // bound on ||Y_m||_F
  double scale = 0.0;  // per-entry standard deviation of the Gram noise
  Mechanism mechanism = Mechanism::fw;
};

// Bound on every ||Y_m||_F from channel hardening and the law of large
// numbers:
//   L = max_m sqrt(K tau_c N_a sum_k beta_km) + sqrt(N_a tau_c sigma2).
inline double frob_bound_L(const RMatrix& beta, const Scenario& sc) {
  const double K = static_cast<double>(beta.rows());
  const double tc = sc.tau_c();
  const double na = sc.N_a;
  double worst = 0.0;
  for (Eigen::Index m = 0; m < beta.cols(); ++m) {
    worst = std::max(worst, beta.col(m).sum());
  }
  return std::sqrt(K * tc * na * worst) + std::sqrt(na * tc * sc.sigma2);
}

namespace detail {
inline void check_privacy_args(double eps, double delta, const char* who) {
  if (!(eps > 0.0)) throw ArgumentError(std::string(who) + ": eps must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ArgumentError(std::string(who) + ": delta must be in (0, 1)");
  }
}
}  // namespace detail

// Per-release noise std for T Frank-Wolfe releases (advanced composition
// over T rounds, Gaussian mechanism per round):
//   mu = 16 L^2 sqrt(T/M ln(2.5 T / delta) ln(2 / delta)) / eps.
inline double calibrate_mu(double L, int T, int M, double eps, double delta) {
  detail::check_privacy_args(eps, delta, "calibrate_mu");
  if (!(L > 0.0) || T < 1 || M < 1) {
    throw ArgumentError("calibrate_mu: L, T, M must be positive");
  }
  const double t = T;
  return 16.0 * L * L *
         std::sqrt(t / M * std::log(2.5 * t / delta) * std::log(2.0 / delta)) /
         eps;
}

// Noise std for the single spectral release:
//   nu = L^2 sqrt(2/M ln(1.25 / delta)) / eps.
inline double calibrate_nu(double L, int M, double eps, double delta) {
  detail::check_privacy_args(eps, delta, "calibrate_nu");
  if (!(L > 0.0) || M < 1) {
    throw ArgumentError("calibrate_nu: L, M must be positive");
  }
  return L * L * std::sqrt(2.0 / M * std::log(1.25 / delta)) / eps;
}

// L from beta unless the operator supplies one.
inline NoiseScale noise_scale(Mechanism mech, const RMatrix& beta,
                              const Scenario& sc, const PrivacyBudget& budget,
                              std::optional<double> L_override = std::nullopt) {
  budget.validate();
  NoiseScale ns;
  ns.mechanism = mech;
  ns.L = L_override.value_or(frob_bound_L(beta, sc));
  ns.scale = mech == Mechanism::fw
                 ? calibrate_mu(ns.L, budget.T, sc.M, budget.eps, budget.delta)
                 : calibrate_nu(ns.L, sc.M, budget.eps, budget.delta);
  return ns;
}

// Hermitian G: strict upper entries N_c(0, scale^2), diagonal N(0, scale^2),
// lower triangle the exact conjugate mirror.
inline CMatrix sample_hermitian_noise(Eigen::Index dim, double scale,
                                      std::uint64_t seed) {
  if (dim < 1) throw ArgumentError("sample_hermitian_noise: dim must be >= 1");
  if (!(scale >= 0.0)) throw ArgumentError("sample_hermitian_noise: scale must be >= 0");
  CMatrix G = CMatrix::Zero(dim, dim);
  if (scale == 0.0) return G;
  Rng rng(seed);
  const double var = scale * scale;
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const cplx z = rng.cnormal(var);
      G(i, j) = z;
      G(j, i) = std::conj(z);
    }
    G(j, j) = cplx(scale * rng.normal(), 0.0);
  }
  return G;
}

struct Composition {
  double eps = 0.0;
  double delta = 0.0;
};

// T-fold advanced composition of (eps, delta) mechanisms:
//   eps' = eps sqrt(2 T ln(1/delta')) + T eps (e^eps - 1),  delta'' = T delta + delta'.
inline Composition compose(double eps_per, double delta_per, int T,
                           double delta_prime) {
  const double t = T;
  return {eps_per * std::sqrt(2.0 * t * std::log(1.0 / delta_prime)) +
              t * eps_per * std::expm1(eps_per),
          t * delta_per + delta_prime};
}

// Per-release epsilon that makes the T-fold composition (eps_total, ...)-DP
// for eps_total < 1.
inline double per_release_eps(double eps_total, int T, double delta_prime) {
  return eps_total / std::sqrt(8.0 * T * std::log(1.0 / delta_prime));
}

}  // namespace dpce
