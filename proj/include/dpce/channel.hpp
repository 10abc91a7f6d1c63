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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dpce/config.hpp"
#include "dpce/linalg.hpp"
#include "dpce/rng.hpp"

namespace dpce {

enum class SignalModel { gaussian, qpsk };
// Distribution of the shadowing variable z in the dB exponent.
//   real:       z ~ N(0, 1)
//   complex_re: z = Re(w), w ~ N_c(0, 1), i.e. z ~ N(0, 1/2)
enum class ShadowDist { real, complex_re };

inline SignalModel parse_signal_model(const std::string& s) {
  if (s == "qpsk") return SignalModel::qpsk;
  if (s == "gaussian") return SignalModel::gaussian;
  throw ConfigError("signal_model", "expected qpsk|gaussian, got '" + s + "'");
}

inline ShadowDist parse_shadow_dist(const std::string& s) {
  if (s == "real") return ShadowDist::real;
  if (s == "complex_re") return ShadowDist::complex_re;
  throw ConfigError("shadow_dist", "expected real|complex_re, got '" + s + "'");
}

struct Scenario {
  int M = 20;
  int K = 4;
  int N_a = 4;
  int N_r = 2;
  int tau_p = 4;
  int tau_d = 56;
  double R_km = 1.0;
  double pl_a = 36.8;
  double pl_b = 36.7;
  double sigma_sh_db = 8.0;
  double sigma2 = 1e-13;
  SignalModel signal_model = SignalModel::qpsk;
  ShadowDist shadow_dist = ShadowDist::real;
  std::uint64_t seed = 1;

  int tau_c() const { return tau_p + tau_d; }

  // Throws ConfigError naming the first offending field. M*N_a > tau_c is
  // only enforced when strict; the estimators still run without it.
  void validate(bool strict = false) const {
    if (M < 1) throw ConfigError("M", "must be >= 1");
    if (K < 1) throw ConfigError("K", "must be >= 1");
    if (N_a < 1) throw ConfigError("N_a", "must be >= 1");
    if (N_r < 1 || N_r > N_a) throw ConfigError("N_r", "must be in [1, N_a]");
    if (tau_p < K) throw ConfigError("tau_p", "must be >= K");
    if (tau_d < 0) throw ConfigError("tau_d", "must be >= 0");
    if (!(R_km > 0.0)) throw ConfigError("R_km", "must be > 0");
    if (!(sigma2 >= 0.0)) throw ConfigError("sigma2", "must be >= 0");
    if (!(sigma_sh_db >= 0.0)) throw ConfigError("sigma_sh_db", "must be >= 0");
    if (strict && static_cast<long>(M) * N_a <= tau_c()) {
      throw ConfigError("tau_d", "requires M*N_a > tau_p + tau_d");
    }
  }

  // Table I parameters (M = 100, N_a = 4, N_r = 2, 8 dB shadowing).
  static Scenario table1(int users, int payload) {
    Scenario s;
    s.M = 100;
    s.K = users;
    s.tau_p = users;
    s.tau_d = payload;
    return s;
  }

  // Small profile for quick experiments and the acceptance suite.
  static Scenario desk() {
    Scenario s;
    s.M = 20;
    s.K = 4;
    s.tau_p = 4;
    s.tau_d = 56;
    return s;
  }

  static Scenario from_config(const KeyValueConfig& cfg,
                              const Scenario& base = desk()) {
    Scenario s = base;
    s.M = static_cast<int>(cfg.get_int("M", s.M));
    s.K = static_cast<int>(cfg.get_int("K", s.K));
    s.N_a = static_cast<int>(cfg.get_int("N_a", s.N_a));
    s.N_r = static_cast<int>(cfg.get_int("N_r", s.N_r));
    s.tau_p = static_cast<int>(cfg.get_int("tau_p", cfg.has("K") ? s.K : s.tau_p));
    s.tau_d = static_cast<int>(cfg.get_int("tau_d", s.tau_d));
    s.R_km = cfg.get_double("R_km", s.R_km);
    s.pl_a = cfg.get_double("pl_a", s.pl_a);
    s.pl_b = cfg.get_double("pl_b", s.pl_b);
    s.sigma_sh_db = cfg.get_double("sigma_sh_db", s.sigma_sh_db);
    s.sigma2 = cfg.get_double("sigma2", s.sigma2);
    if (cfg.has("signal_model")) {
      s.signal_model = parse_signal_model(cfg.raw("signal_model"));
    }
    if (cfg.has("shadow_dist")) {
      s.shadow_dist = parse_shadow_dist(cfg.raw("shadow_dist"));
    }
    s.seed = cfg.get_u64("seed", s.seed);
    s.validate();
    return s;
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Topology {
  std::vector<Point> ap_xy;
  std::vector<Point> user_xy;
  bool operator==(const Topology&) const = default;
};

// Regular hexagon centred at the origin with vertices at (+-radius, 0).
inline bool in_hexagon(const Point& p, double radius) {
  const double ax = std::abs(p.x);
  const double ay = std::abs(p.y);
  const double s3 = std::numbers::sqrt3;
  return ay <= 0.5 * s3 * radius && s3 * ax + ay <= s3 * radius;
}

inline Point sample_in_hexagon(Rng& rng, double radius) {
  const double half_h = 0.5 * std::numbers::sqrt3 * radius;
  for (;;) {
    Point p{rng.uniform(-radius, radius), rng.uniform(-half_h, half_h)};
    if (in_hexagon(p, radius)) return p;
  }
}

inline Topology gen_topology(const Scenario& sc, std::uint64_t seed) {
  if (!(sc.R_km > 0.0)) throw ArgumentError("gen_topology: R_km must be > 0");
  Rng rng(seed);
  const double radius = sc.R_km * 1000.0;
  Topology t;
  t.ap_xy.reserve(static_cast<std::size_t>(sc.M));
  t.user_xy.reserve(static_cast<std::size_t>(sc.K));
  for (int m = 0; m < sc.M; ++m) t.ap_xy.push_back(sample_in_hexagon(rng, radius));
  for (int k = 0; k < sc.K; ++k) t.user_xy.push_back(sample_in_hexagon(rng, radius));
  return t;
}

inline constexpr double kMinDistanceM = 1.0;

inline double path_loss_db(double d_m, double pl_a, double pl_b) {
  return pl_a + pl_b * std::log10(std::max(d_m, kMinDistanceM));
}

// beta(k, m) = 10^(-(PL(d_km) + sigma_sh z_km) / 10), linear power gain.
inline RMatrix large_scale_fading(const Topology& topo, const Scenario& sc,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const auto K = static_cast<Eigen::Index>(topo.user_xy.size());
  const auto M = static_cast<Eigen::Index>(topo.ap_xy.size());
  RMatrix beta(K, M);
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const Point& u = topo.user_xy[static_cast<std::size_t>(k)];
      const Point& a = topo.ap_xy[static_cast<std::size_t>(m)];
      const double d = std::hypot(u.x - a.x, u.y - a.y);
      double z = 0.0;
      if (sc.shadow_dist == ShadowDist::real) {
        z = rng.normal();
      } else {
        z = rng.cnormal(1.0).real();
      }
      const double pl = path_loss_db(d, sc.pl_a, sc.pl_b);
      beta(k, m) = std::pow(10.0, -(pl + sc.sigma_sh_db * z) / 10.0);
    }
  }
  return beta;
}

struct ChannelSet {
  RMatrix beta;  // K x M
  CMatrix H;     // (M N_a) x K, AP blocks stacked in AP order
};

// Rows of AP m in any matrix stacked per AP with n_a rows per block.
inline auto ap_block(const CMatrix& stacked, int m, int n_a) {
  return stacked.middleRows(static_cast<Eigen::Index>(m) * n_a, n_a);
}

inline ChannelSet gen_channels(const RMatrix& beta, const Scenario& sc,
                               std::uint64_t seed) {
  if ((beta.array() < 0.0).any()) {
    throw ArgumentError("gen_channels: beta must be non-negative");
  }
  Rng rng(seed);
  const Eigen::Index K = beta.rows();
  const Eigen::Index M = beta.cols();
  ChannelSet cs;
  cs.beta = beta;
  cs.H.resize(M * sc.N_a, K);
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double amp = std::sqrt(beta(k, m));
      for (int n = 0; n < sc.N_a; ++n) {
        cs.H(m * sc.N_a + n, k) = amp * rng.cnormal(1.0);
      }
    }
  }
  return cs;
}

// K rows of the unitary tau_p-point DFT: P P^H = I_K.
inline CMatrix gen_pilots(int K, int tau_p) {
  if (K < 1 || tau_p < K) {
    throw ArgumentError("gen_pilots: need 1 <= K <= tau_p, got K=" +
                        std::to_string(K) + " tau_p=" + std::to_string(tau_p));
  }
  CMatrix P(K, tau_p);
  const double norm = 1.0 / std::sqrt(static_cast<double>(tau_p));
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < tau_p; ++t) {
      // Reduce k*t mod tau_p first to keep the angle small and exact at 0.
      const long phase_idx = (static_cast<long>(k) * t) % tau_p;
      const double ang = -2.0 * std::numbers::pi *
                         static_cast<double>(phase_idx) / tau_p;
      P(k, t) = phase_idx == 0 ? cplx(norm, 0.0)
                               : norm * cplx(std::cos(ang), std::sin(ang));
    }
  }
  return P;
}

inline cplx qpsk_point(bool re_positive, bool im_positive) {
  const double a = 1.0 / std::numbers::sqrt2;
  return {re_positive ? a : -a, im_positive ? a : -a};
}

// Unit-average-power payload, generated slot by slot.
inline CMatrix gen_payload(int K, int tau_d, SignalModel model,
                           std::uint64_t seed) {
  if (tau_d < 0) throw ArgumentError("gen_payload: tau_d must be >= 0");
  Rng rng(seed);
  CMatrix D(K, tau_d);
  for (int t = 0; t < tau_d; ++t) {
    for (int k = 0; k < K; ++k) {
      if (model == SignalModel::qpsk) {
        const auto bits = rng.below(4);
        D(k, t) = qpsk_point((bits & 1u) != 0, (bits & 2u) != 0);
      } else {
        D(k, t) = rng.cnormal(1.0);
      }
    }
  }
  return D;
}

// R = H S + N with N_c(0, sigma2) noise drawn slot by slot, so the pilot
// columns depend only on the seed and not on tau_d.
inline CMatrix transmit(const CMatrix& H, const CMatrix& S, double sigma2,
                        std::uint64_t seed) {
  if (H.cols() != S.rows()) {
    throw DimensionError("transmit: H is " + std::to_string(H.rows()) + "x" +
                         std::to_string(H.cols()) + ", S is " +
                         std::to_string(S.rows()) + "x" +
                         std::to_string(S.cols()));
  }
  CMatrix R = H * S;
  if (sigma2 > 0.0) {
    Rng rng(seed);
    for (Eigen::Index t = 0; t < R.cols(); ++t) {
      for (Eigen::Index i = 0; i < R.rows(); ++i) R(i, t) += rng.cnormal(sigma2);
    }
  }
  return R;
}

struct Observation {
  std::vector<CMatrix> Y;  // per AP, N_a x tau_c, zero off the mask
  std::vector<Mask> mask;  // per AP, true on Omega_m
};

// Every slot, each AP connects its N_r RF chains to N_r distinct antennas
// chosen uniformly at random.
inline Observation sample_switch(const CMatrix& R, int M, int N_a, int N_r,
                                 std::uint64_t seed) {
  if (N_r < 1 || N_r > N_a) throw ArgumentError("sample_switch: need 1 <= N_r <= N_a");
  if (R.rows() != static_cast<Eigen::Index>(M) * N_a) {
    throw DimensionError("sample_switch: R rows must equal M*N_a");
  }
  Rng rng(seed);
  const Eigen::Index tc = R.cols();
  Observation obs;
  obs.mask.assign(static_cast<std::size_t>(M), Mask::Constant(N_a, tc, false));
  std::vector<int> perm(static_cast<std::size_t>(N_a));
  for (Eigen::Index t = 0; t < tc; ++t) {
    for (int m = 0; m < M; ++m) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = 0; i < N_r; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(N_a - i)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        obs.mask[static_cast<std::size_t>(m)](perm[static_cast<std::size_t>(i)], t) = true;
      }
    }
  }
  obs.Y.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    obs.Y.push_back(masked(ap_block(R, m, N_a), obs.mask[static_cast<std::size_t>(m)]));
  }
  return obs;
}

struct Index2 {
  int row = 0;
  int col = 0;
};

// Omega_m as (antenna, slot) pairs in slot-major order.
inline std::vector<Index2> omega_indices(const Mask& mask) {
  std::vector<Index2> out;
  for (Eigen::Index t = 0; t < mask.cols(); ++t) {
    for (Eigen::Index n = 0; n < mask.rows(); ++n) {
      if (mask(n, t)) out.push_back({static_cast<int>(n), static_cast<int>(t)});
    }
  }
  return out;
}

struct SignalBlock {
  CMatrix P;  // K x tau_p
  CMatrix D;  // K x tau_d
  CMatrix S;  // [P, D]
  CMatrix X;  // H S
  CMatrix R;  // X + N
  Observation obs;
};

struct TrialSeeds {
  std::uint64_t channel = 0;
  std::uint64_t payload = 0;
  std::uint64_t noise = 0;
  std::uint64_t sw = 0;

  static TrialSeeds derive(std::uint64_t master, std::uint64_t trial) {
    return {seeds::split(master, "channel", {trial}),
            seeds::split(master, "payload", {trial}),
            seeds::split(master, "noise", {trial}),
            seeds::split(master, "switch", {trial})};
  }
};

inline SignalBlock gen_signal_block(const Scenario& sc, const CMatrix& H,
                                    const TrialSeeds& s) {
  SignalBlock b;
  b.P = gen_pilots(sc.K, sc.tau_p);
  b.D = gen_payload(sc.K, sc.tau_d, sc.signal_model, s.payload);
  b.S.resize(sc.K, sc.tau_c());
  b.S << b.P, b.D;
  b.X = H * b.S;
  b.R = transmit(H, b.S, sc.sigma2, s.noise);
  b.obs = sample_switch(b.R, sc.M, sc.N_a, sc.N_r, s.sw);
  return b;
}

}  // namespace dpce
