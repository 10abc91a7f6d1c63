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
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dpce/dp.hpp"
#include "dpce/linalg.hpp"
#include "dpce/protocol.hpp"
#include "dpce/rng.hpp"

// Joint-DP Frank-Wolfe matrix completion over the nuclear-norm ball. Each
// round, every AP releases a noisy Gram matrix of its residual; the CPU
// broadcasts the leading eigenvector of the sum and a noise-inflated
// eigenvalue; every AP then takes a rank-one step on its own block and clips
// it to the sensitivity bound.

namespace dpce {

struct FwConfig {
  int T = 20;
  double nuc_bound = 1.0;
  double L = std::numeric_limits<double>::infinity();
  double mu = 0.0;

  // eta(1) = 1, eta(n) = 1/T afterwards.
  double step(int n) const { return n == 1 ? 1.0 : 1.0 / T; }

  void validate() const {
    if (T < 1) throw ArgumentError("FwConfig: T must be >= 1");
    if (!(nuc_bound > 0.0)) throw ArgumentError("FwConfig: nuc_bound must be > 0");
    if (!(L > 0.0)) throw ArgumentError("FwConfig: L must be > 0");
    if (!(mu >= 0.0)) throw ArgumentError("FwConfig: mu must be >= 0");
  }
};

// J_m = (X_m)_Omega - Y_m.
inline CMatrix ap_residual(const CMatrix& X, const CMatrix& Y, const Mask& mask) {
  require_same_shape(X, Y, "ap_residual");
  return masked(X, mask) - masked(Y, mask);
}

// J^H J with the lower triangle mirrored from the upper one, so the result
// is Hermitian bit for bit.
inline CMatrix exact_gram(const CMatrix& J) {
  CMatrix G = J.adjoint() * J;
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    G(j, j) = cplx(G(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < G.rows(); ++i) G(i, j) = std::conj(G(j, i));
  }
  return G;
}

inline CMatrix ap_release_gram(const CMatrix& J, double mu, std::uint64_t seed) {
  if (!(mu >= 0.0)) throw ArgumentError("ap_release_gram: mu must be >= 0");
  CMatrix G = exact_gram(J);
  if (mu > 0.0) G += sample_hermitian_noise(J.cols(), mu, seed);
  return G;
}

struct EigBroadcastPayload {
  CVector v;                 // unit, canonical phase
  double top_eig = 0.0;      // largest eigenvalue of the aggregate
  double lambda_hat = 0.0;   // sqrt(max(top_eig, 0))
  double lambda_tilde = 0.0; // lambda_hat + sqrt(mu) (M tau_c)^(1/4)
};

inline CMatrix sum_grams(const std::vector<CMatrix>& grams) {
  if (grams.empty()) throw ArgumentError("sum_grams: no releases");
  CMatrix W = grams.front();
  for (std::size_t m = 1; m < grams.size(); ++m) {
    require_same_shape(W, grams[m], "sum_grams");
    W += grams[m];
  }
  return W;
}

inline EigBroadcastPayload cpu_aggregate_eig(const std::vector<CMatrix>& grams,
                                             double mu, int M, int tau_c) {
  const CMatrix W = sum_grams(grams);
  if (W.rows() != tau_c || W.cols() != tau_c) {
    throw DimensionError("cpu_aggregate_eig: releases must be tau_c x tau_c");
  }
  auto top = hermitian_eig(W, 1);
  EigBroadcastPayload out;
  out.v = std::move(top.front().vector);
  out.top_eig = top.front().value;
  out.lambda_hat = std::sqrt(std::max(out.top_eig, 0.0));
  out.lambda_tilde = out.lambda_hat;
  if (mu > 0.0) {
    out.lambda_tilde += std::sqrt(mu) *
                        std::pow(static_cast<double>(M) * tau_c, 0.25);
  }
  return out;
}

// Xi_{L,Omega}(A) = min(L / ||(A)_Omega||_F, 1) A.
inline CMatrix xi_project(CMatrix A, const Mask& mask, double L) {
  const double n = masked_frob_norm(A, mask);
  if (n > L) A *= L / n;
  return A;
}

// X' = Xi((1 - eta) X - (eta nuc_bound / lambda_tilde) J v v^H).
inline CMatrix ap_update(const CMatrix& X, const CMatrix& J, const CVector& v,
                         double lambda_tilde, double eta, double nuc_bound,
                         double L, const Mask& mask) {
  if (!(lambda_tilde > 0.0)) {
    throw ArgumentError("ap_update: degenerate step, lambda_tilde = " +
                        std::to_string(lambda_tilde));
  }
  const CVector Jv = J * v;
  CMatrix next = (1.0 - eta) * X - (eta * nuc_bound / lambda_tilde) * (Jv * v.adjoint());
  return xi_project(std::move(next), mask, L);
}

struct FwTelemetry {
  std::vector<double> lambda_tilde;   // per round
  std::vector<double> top_eig;        // per round
  // per round, per AP: ||(X_m)_Omega_m||_F after the update
  std::vector<std::vector<double>> masked_norm;
  // per round: sum_m ||(X_m)_Omega - Y_m||_F^2 after the update
  std::vector<double> objective;
};

struct CompletionResult {
  std::vector<CMatrix> X_hat;  // per AP
  Transcript transcript;
  OverheadLedger ledger;
  FwTelemetry fw;              // empty for the spectral method
};

// Access point for the Frank-Wolfe rounds. Y_m, Omega_m and the iterate stay
// inside the node; only Gram releases leave it.
class FwAccessPoint {
 public:
  FwAccessPoint(int id, CMatrix Y, Mask mask)
      : id_(id), Y_(std::move(Y)), mask_(std::move(mask)),
        X_(CMatrix::Zero(Y_.rows(), Y_.cols())) {
    require_same_shape(X_, Y_, "FwAccessPoint");
  }

  void release(Backhaul& bh, int round, double mu, std::uint64_t seed) {
    J_ = ap_residual(X_, Y_, mask_);
    Message msg;
    msg.kind = MessageKind::GramRelease;
    msg.sender = id_;
    msg.round = round;
    msg.payload = ap_release_gram(J_, mu, seed);
    bh.send_to_cpu(std::move(msg));
  }

  void update(const Backhaul& bh, int round, const FwConfig& cfg) {
    const Message& b = bh.receive_broadcast(id_, round, MessageKind::EigBroadcast);
    const CVector v = b.payload.col(0);
    X_ = ap_update(X_, J_, v, b.scalar.value_or(0.0), cfg.step(round),
                   cfg.nuc_bound, cfg.L, mask_);
  }

  double masked_norm() const { return masked_frob_norm(X_, mask_); }
  double local_objective() const { return ap_residual(X_, Y_, mask_).squaredNorm(); }
  const CMatrix& iterate() const { return X_; }

 private:
  int id_;
  CMatrix Y_;
  Mask mask_;
  CMatrix X_;
  CMatrix J_;
};

class FwCentralProcessor {
 public:
  FwCentralProcessor(int M, int tau_c, double mu) : M_(M), tau_c_(tau_c), mu_(mu) {}

  EigBroadcastPayload aggregate_and_broadcast(Backhaul& bh, int round) {
    auto msgs = bh.collect_at_cpu(round, MessageKind::GramRelease);
    std::vector<CMatrix> grams;
    grams.reserve(msgs.size());
    for (auto& m : msgs) grams.push_back(std::move(m.payload));
    EigBroadcastPayload eig = cpu_aggregate_eig(grams, mu_, M_, tau_c_);
    Message b;
    b.kind = MessageKind::EigBroadcast;
    b.round = round;
    b.payload = eig.v;
    b.scalar = eig.lambda_tilde;
    bh.broadcast(std::move(b));
    return eig;
  }

 private:
  int M_;
  int tau_c_;
  double mu_;
};

inline std::uint64_t fw_noise_seed(std::uint64_t base, int ap, int round) {
  return seeds::split(base, "fw-gram",
                      {static_cast<std::uint64_t>(ap), static_cast<std::uint64_t>(round)});
}

struct FwNetwork {
  std::vector<FwAccessPoint> aps;
  FwCentralProcessor cpu;
  Backhaul backhaul;
};

// One round: release -> aggregate and broadcast -> local update.
inline void run_round_fw(FwNetwork& net, int round, const FwConfig& cfg,
                         std::uint64_t noise_base, FwTelemetry& tel) {
  for (std::size_t m = 0; m < net.aps.size(); ++m) {
    net.aps[m].release(net.backhaul, round, cfg.mu,
                       fw_noise_seed(noise_base, static_cast<int>(m), round));
  }
  EigBroadcastPayload eig;
  try {
    eig = net.cpu.aggregate_and_broadcast(net.backhaul, round);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("round " + std::to_string(round) + ": " + e.what(),
                           e.residual());
  }
  tel.lambda_tilde.push_back(eig.lambda_tilde);
  tel.top_eig.push_back(eig.top_eig);
  std::vector<double> norms;
  norms.reserve(net.aps.size());
  double obj = 0.0;
  for (auto& ap : net.aps) {
    ap.update(net.backhaul, round, cfg);
    norms.push_back(ap.masked_norm());
    obj += ap.local_objective();
  }
  tel.masked_norm.push_back(std::move(norms));
  tel.objective.push_back(obj);
}

// Called after every round with the current per-AP iterates.
using FwObserver = std::function<void(int round, const std::vector<CMatrix>& X)>;

inline CompletionResult run_fw(const std::vector<CMatrix>& Y,
                               const std::vector<Mask>& masks,
                               const FwConfig& cfg, std::uint64_t noise_base,
                               const FwObserver& observer = {}) {
  cfg.validate();
  if (Y.empty() || Y.size() != masks.size()) {
    throw DimensionError("run_fw: need one mask per AP");
  }
  const int M = static_cast<int>(Y.size());
  const auto tau_c = static_cast<int>(Y.front().cols());
  FwNetwork net{{}, FwCentralProcessor(M, tau_c, cfg.mu), Backhaul(M)};
  net.aps.reserve(Y.size());
  for (int m = 0; m < M; ++m) {
    if (Y[static_cast<std::size_t>(m)].cols() != tau_c) {
      throw DimensionError("run_fw: AP blocks must share tau_c");
    }
    net.aps.emplace_back(m, Y[static_cast<std::size_t>(m)], masks[static_cast<std::size_t>(m)]);
  }
  CompletionResult res;
  for (int n = 1; n <= cfg.T; ++n) {
    run_round_fw(net, n, cfg, noise_base, res.fw);
    if (observer) {
      std::vector<CMatrix> X;
      X.reserve(net.aps.size());
      for (const auto& ap : net.aps) X.push_back(ap.iterate());
      observer(n, X);
    }
  }
  res.X_hat.reserve(net.aps.size());
  for (const auto& ap : net.aps) res.X_hat.push_back(ap.iterate());
  res.transcript = net.backhaul.transcript();
  res.ledger = net.backhaul.ledger();
  return res;
}

// Nuclear-norm budget from the large-scale gains:
//   r = sqrt(K^2 tau_c N_a sum_m sum_k beta_km).
inline double nuclear_bound_r(const RMatrix& beta, int tau_c, int N_a) {
  const double K = static_cast<double>(beta.rows());
  return std::sqrt(K * K * tau_c * N_a * beta.sum());
}

}  // namespace dpce
