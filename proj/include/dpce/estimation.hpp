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

#include <string>
#include <vector>

#include "dpce/channel.hpp"
#include "dpce/linalg.hpp"

namespace dpce {

class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// H_m = X_{m,p} P^+, where X_{m,p} is the first tau_p columns of X_m.
inline CMatrix estimate_channel(const CMatrix& X_m, const CMatrix& P,
                                double rcond = kDefaultRcond) {
  if (X_m.cols() < P.cols()) {
    throw DimensionError("estimate_channel: X_m has fewer columns than P");
  }
  return X_m.leftCols(P.cols()) * pinv(P, rcond);
}

// D_m = H_m^+ X_{m,d}. Underdetermined systems (N_a < K) get the
// minimum-norm solution.
inline CMatrix detect_local(const CMatrix& H_m, const CMatrix& X_md,
                            double rcond = kDefaultRcond) {
  if (H_m.rows() != X_md.rows()) {
    throw DimensionError("detect_local: row mismatch");
  }
  if (X_md.cols() == 0) return CMatrix(H_m.cols(), 0);
  if (H_m.isZero(0.0)) return CMatrix::Zero(H_m.cols(), X_md.cols());
  return pinv(H_m, rcond) * X_md;
}

// Nearest QPSK point by quadrant; a zero component decides toward +.
inline cplx qpsk_slice(cplx z) {
  return qpsk_point(!(z.real() < 0.0), !(z.imag() < 0.0));
}

struct Detection {
  CMatrix soft;
  CMatrix symbols;
};

inline Detection combine_and_slice(const std::vector<CMatrix>& D_local) {
  if (D_local.empty()) throw ArgumentError("combine_and_slice: no APs");
  Detection out;
  out.soft = D_local.front();
  for (std::size_t m = 1; m < D_local.size(); ++m) {
    require_same_shape(out.soft, D_local[m], "combine_and_slice");
    out.soft += D_local[m];
  }
  out.soft /= static_cast<double>(D_local.size());
  out.symbols = out.soft.unaryExpr([](cplx z) { return qpsk_slice(z); });
  return out;
}

// Pilot-only least squares: H_m = Y_m(:, 1:tau_p) P^H.
inline CMatrix pilot_only_ls(const CMatrix& Y_m, const CMatrix& P) {
  if (Y_m.cols() < P.cols()) throw DimensionError("pilot_only_ls: too few slots");
  return Y_m.leftCols(P.cols()) * P.adjoint();
}

// Per-slot LMMSE with the observed antennas only:
//   d = (F^H F + sigma2 I)^-1 F^H y,  F = C[t] H_m.
inline CVector pilot_only_lmmse(const CMatrix& H_m, const CMatrix& Y_m,
                                const Mask& mask, double sigma2, Eigen::Index t) {
  if (t < 0 || t >= Y_m.cols()) throw ArgumentError("pilot_only_lmmse: slot out of range");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index n = 0; n < mask.rows(); ++n) {
    if (mask(n, t)) rows.push_back(n);
  }
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index K = H_m.cols();
  CMatrix F(nr, K);
  CVector y(nr);
  for (Eigen::Index i = 0; i < nr; ++i) {
    F.row(i) = H_m.row(rows[static_cast<std::size_t>(i)]);
    y(i) = Y_m(rows[static_cast<std::size_t>(i)], t);
  }
  const CMatrix A = F.adjoint() * F + sigma2 * CMatrix::Identity(K, K);
  const CVector rhs = F.adjoint() * y;
  if (sigma2 > 0.0) {
    Eigen::LDLT<CMatrix> ldlt(A);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      CVector d = ldlt.solve(rhs);
      if (d.allFinite()) return d;
    }
  }
  return pinv(A) * rhs;
}

// LMMSE statistic for all payload slots, K x tau_d.
inline CMatrix pilot_only_detect(const CMatrix& H_m, const CMatrix& Y_m,
                                 const Mask& mask, double sigma2, int tau_p) {
  const Eigen::Index tau_d = Y_m.cols() - tau_p;
  CMatrix D(H_m.cols(), tau_d);
  for (Eigen::Index t = 0; t < tau_d; ++t) {
    D.col(t) = pilot_only_lmmse(H_m, Y_m, mask, sigma2, tau_p + t);
  }
  return D;
}

inline double nmse(const CMatrix& H_hat, const CMatrix& H) {
  require_same_shape(H_hat, H, "nmse");
  const double den = H.squaredNorm();
  if (!(den > 0.0)) throw MetricError("nmse: reference channel is zero");
  return (H_hat - H).squaredNorm() / den;
}

// Fraction of decisions that differ from the transmitted symbols. For
// Gaussian payloads the reference is the QPSK quadrant of each symbol.
inline double ser(const CMatrix& symbols, const CMatrix& D) {
  require_same_shape(symbols, D, "ser");
  if (D.size() == 0) return 0.0;
  Eigen::Index wrong = 0;
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
      if (symbols(i, j) != qpsk_slice(D(i, j))) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(D.size());
}

}  // namespace dpce
