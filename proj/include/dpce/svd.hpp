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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpce/dp.hpp"
#include "dpce/fw.hpp"
#include "dpce/linalg.hpp"
#include "dpce/protocol.hpp"
#include "dpce/rng.hpp"

// One-shot spectral completion: trim over-sampled rows, release one noisy
// Gram matrix per AP, take the top-K eigenspace of the sum at the CPU and
// project each AP's rescaled observation onto it.

namespace dpce {

inline double trim_threshold(int N_r, int tau_c, int N_a) {
  return 2.0 * N_r * tau_c / N_a;
}

struct SvdConfig {
  int K = 1;
  double nu = 0.0;
  double trim_threshold = 0.0;

  static SvdConfig make(int K, double nu, int N_r, int tau_c, int N_a) {
    return {K, nu, dpce::trim_threshold(N_r, tau_c, N_a)};
  }

  void validate() const {
    if (K < 1) throw ArgumentError("SvdConfig: K must be >= 1");
    if (!(nu >= 0.0)) throw ArgumentError("SvdConfig: nu must be >= 0");
    if (!(trim_threshold > 0.0)) throw ArgumentError("SvdConfig: trim threshold must be > 0");
  }
};

// Rows with more than `threshold` non-zero entries are zeroed.
inline CMatrix trim(const CMatrix& Y, double threshold) {
  if (!(threshold > 0.0)) throw ArgumentError("trim: threshold must be > 0");
  CMatrix out = Y;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const auto nnz = (Y.row(i).array() != cplx(0.0, 0.0)).count();
    if (static_cast<double>(nnz) > threshold) out.row(i).setZero();
  }
  return out;
}

inline CMatrix ap_release_gram_svd(const CMatrix& Y_trimmed, double nu,
                                   std::uint64_t seed) {
  return ap_release_gram(Y_trimmed, nu, seed);
}

// Orthonormal tau_c x K basis of the top-K eigenspace of sum_m releases.
inline CMatrix cpu_topk(const std::vector<CMatrix>& grams, int K) {
  const CMatrix W = sum_grams(grams);
  if (K < 1 || K > W.rows()) {
    throw ArgumentError("cpu_topk: K=" + std::to_string(K) + " outside [1, " +
                        std::to_string(W.rows()) + "]");
  }
  const auto pairs = hermitian_eig(W, K);
  CMatrix V(W.rows(), K);
  for (int k = 0; k < K; ++k) V.col(k) = pairs[static_cast<std::size_t>(k)].vector;
  return V;
}

// X_m = (N_a / N_r) Y~_m V V^H.
inline CMatrix ap_complete(const CMatrix& Y_trimmed, const CMatrix& V, int N_a,
                           int N_r) {
  if (Y_trimmed.cols() != V.rows()) {
    throw DimensionError("ap_complete: Y has " + std::to_string(Y_trimmed.cols()) +
                         " columns, basis has " + std::to_string(V.rows()) + " rows");
  }
  const double gain = static_cast<double>(N_a) / N_r;
  return gain * ((Y_trimmed * V) * V.adjoint());
}

class SvdAccessPoint {
 public:
  SvdAccessPoint(int id, const CMatrix& Y, double threshold)
      : id_(id), Y_trimmed_(trim(Y, threshold)), trimmed_(Y_trimmed_ != Y) {}

  void release(Backhaul& bh, double nu, std::uint64_t seed) const {
    Message msg;
    msg.kind = MessageKind::GramRelease;
    msg.sender = id_;
    msg.round = 1;
    msg.payload = ap_release_gram_svd(Y_trimmed_, nu, seed);
    bh.send_to_cpu(std::move(msg));
  }

  CMatrix complete(const Backhaul& bh, int N_a, int N_r) const {
    const Message& b = bh.receive_broadcast(id_, 1, MessageKind::BasisBroadcast);
    return ap_complete(Y_trimmed_, b.payload, N_a, N_r);
  }

  bool trimmed_any() const { return trimmed_; }

 private:
  int id_;
  CMatrix Y_trimmed_;
  bool trimmed_;
};

inline std::uint64_t svd_noise_seed(std::uint64_t base, int ap) {
  return seeds::split(base, "svd-gram", {static_cast<std::uint64_t>(ap)});
}

// The single exchange: every AP releases, the CPU broadcasts the basis.
inline void run_round_svd(const std::vector<SvdAccessPoint>& aps, Backhaul& bh,
                          const SvdConfig& cfg, std::uint64_t noise_base) {
  for (std::size_t m = 0; m < aps.size(); ++m) {
    aps[m].release(bh, cfg.nu, svd_noise_seed(noise_base, static_cast<int>(m)));
  }
  auto msgs = bh.collect_at_cpu(1, MessageKind::GramRelease);
  std::vector<CMatrix> grams;
  grams.reserve(msgs.size());
  for (auto& m : msgs) grams.push_back(std::move(m.payload));
  Message b;
  b.kind = MessageKind::BasisBroadcast;
  b.round = 1;
  b.payload = cpu_topk(grams, cfg.K);
  bh.broadcast(std::move(b));
}

struct SvdResult : CompletionResult {
  int trimmed_aps = 0;
};

inline SvdResult run_svd(const std::vector<CMatrix>& Y, const SvdConfig& cfg,
                         int N_a, int N_r, std::uint64_t noise_base) {
  cfg.validate();
  if (Y.empty()) throw DimensionError("run_svd: no APs");
  const int M = static_cast<int>(Y.size());
  std::vector<SvdAccessPoint> aps;
  aps.reserve(Y.size());
  for (int m = 0; m < M; ++m) {
    aps.emplace_back(m, Y[static_cast<std::size_t>(m)], cfg.trim_threshold);
  }
  Backhaul bh(M);
  run_round_svd(aps, bh, cfg, noise_base);
  SvdResult res;
  res.X_hat.reserve(aps.size());
  for (const auto& ap : aps) {
    res.X_hat.push_back(ap.complete(bh, N_a, N_r));
    if (ap.trimmed_any()) ++res.trimmed_aps;
  }
  res.transcript = bh.transcript();
  res.ledger = bh.ledger();
  return res;
}

}  // namespace dpce
