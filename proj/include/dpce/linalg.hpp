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
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpce {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
// Observation pattern: true where an entry was sampled.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct EigPair {
  double value = 0.0;
  CVector vector;
};

inline constexpr double kDefaultRcond = 1e-12;

inline bool all_finite(const CMatrix& a) {
  return a.array().isFinite().all();
}

inline void require_square(const CMatrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(who) + ": matrix is " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b,
                               const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(who) + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

inline double frob_norm(const CMatrix& a) { return a.norm(); }

// Largest singular value.
inline double spec_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

// tr(A^H B).
inline cplx frob_inner(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "frob_inner");
  return (a.array().conjugate() * b.array()).sum();
}

inline CMatrix hermitian_part(const CMatrix& a) {
  return (a + a.adjoint()) * 0.5;
}

// Rotates v so that its largest-magnitude entry (first one on ties) is real
// and positive. v v^H is unchanged.
inline void canonicalize_phase(CVector& v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  double best_abs = std::abs(v(0));
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > best_abs) {
      best_abs = m;
      best = i;
    }
  }
  if (best_abs == 0.0) return;
  const cplx phase = std::conj(v(best)) / best_abs;
  v *= phase;
  v(best) = cplx(v(best).real(), 0.0);
}

// The k largest eigenpairs of the Hermitian part of A, descending by value.
// Equal eigenvalues keep ascending index order.
inline std::vector<EigPair> hermitian_eig(const CMatrix& a, Eigen::Index k) {
  require_square(a, "hermitian_eig");
  if (k < 0 || k > a.rows()) {
    throw ArgumentError("hermitian_eig: k=" + std::to_string(k) +
                        " exceeds dimension " + std::to_string(a.rows()));
  }
  std::vector<EigPair> out;
  if (k == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("hermitian_eig: eigensolver failed", 0.0);
  }
  const auto& vals = es.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(vals.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return vals(i) > vals(j);
                   });
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index idx = order[static_cast<std::size_t>(i)];
    EigPair p;
    p.value = vals(idx);
    p.vector = es.eigenvectors().col(idx);
    canonicalize_phase(p.vector);
    out.push_back(std::move(p));
  }
  return out;
}

// Dominant eigenpair by power iteration. The iteration runs on A + s I with
// s = ||A||_F so that a negative eigenvalue of large magnitude cannot take
// over; the returned value is the Rayleigh quotient of A itself.
inline EigPair top_eigpair(const CMatrix& a, double tol = 1e-12,
                           int max_iter = 100000) {
  require_square(a, "top_eigpair");
  const Eigen::Index n = a.rows();
  if (n == 0) throw ArgumentError("top_eigpair: empty matrix");
  const CMatrix h = hermitian_part(a);
  const double scale = std::max(h.norm(), 1e-300);
  const CMatrix shifted = h + scale * CMatrix::Identity(n, n);

  // Deterministic start with weight on every coordinate.
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = cplx(1.0 + 0.01 * static_cast<double>(i),
                0.001 * static_cast<double>(i % 7));
  }
  v.normalize();

  double lambda = 0.0;
  double residual = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    CVector w = shifted * v;
    const double nw = w.norm();
    if (nw == 0.0) break;
    v = w / nw;
    const CVector hv = h * v;
    lambda = v.dot(hv).real();
    residual = (hv - lambda * v).norm();
    if (residual <= tol * std::max(1.0, scale)) {
      canonicalize_phase(v);
      return {lambda, v};
    }
  }
  throw ConvergenceError("top_eigpair: no convergence after " +
                             std::to_string(max_iter) + " iterations",
                         residual);
}

// Moore-Penrose pseudo-inverse; singular values below rcond * s_max are
// treated as zero.
inline CMatrix pinv(const CMatrix& a, double rcond = kDefaultRcond) {
  if (a.size() == 0) throw ArgumentError("pinv: empty matrix");
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = rcond * (s.size() > 0 ? s(0) : 0.0);
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv(i) = (s(i) > cutoff && s(i) > 0.0) ? 1.0 / s(i) : 0.0;
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

// Entries outside the mask are set to zero.
inline CMatrix masked(const CMatrix& a, const Mask& mask) {
  if (a.rows() != mask.rows() || a.cols() != mask.cols()) {
    throw DimensionError("masked: mask shape mismatch");
  }
  return mask.select(a.array(), cplx(0.0, 0.0)).matrix();
}

inline double masked_frob_norm(const CMatrix& a, const Mask& mask) {
  return masked(a, mask).norm();
}

// Count of singular values above rel_tol * s_max.
inline Eigen::Index numerical_rank(const CMatrix& a, double rel_tol = 1e-9) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

inline double nuclear_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues().sum();
}

// Vertically stacks per-AP blocks in AP order.
inline CMatrix vstack(const std::vector<CMatrix>& blocks) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = blocks.empty() ? 0 : blocks.front().cols();
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw DimensionError("vstack: column mismatch");
    rows += b.rows();
  }
  CMatrix out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

}  // namespace dpce
