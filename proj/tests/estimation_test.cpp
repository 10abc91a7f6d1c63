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

#include "dpce/estimation.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace dpce {
namespace {

using testing::random_cmatrix;
using testing::rel_err;

TEST(EstimateChannelTest, Cases) {
  const CMatrix P = gen_pilots(3, 5);
  const CMatrix H = random_cmatrix(4, 3, 1);
  CMatrix X(4, 9);
  X << H * P, random_cmatrix(4, 4, 2);
  EXPECT_LT((estimate_channel(X, P) - H).norm(), 1e-10);
  EXPECT_TRUE(estimate_channel(CMatrix::Zero(4, 9), P).isZero(0.0));
  const CMatrix Xr = random_cmatrix(4, 9, 3);
  EXPECT_LT((estimate_channel(Xr, P) - Xr.leftCols(5) * P.adjoint()).norm(), 1e-12);
  EXPECT_THROW(estimate_channel(CMatrix::Zero(4, 2), P), DimensionError);
}

TEST(DetectLocalTest, ConsistentSystem) {
  const CMatrix H = random_cmatrix(4, 2, 4);
  const CMatrix D = random_cmatrix(2, 7, 5);
  EXPECT_LT((detect_local(H, H * D) - D).norm(), 1e-8 * D.norm());
  EXPECT_TRUE(detect_local(H, CMatrix::Zero(4, 7)).isZero(1e-15));
  EXPECT_EQ(detect_local(H, CMatrix(4, 0)).cols(), 0);
}

TEST(DetectLocalTest, HandLeastSquares) {
  // H = [[1,0],[0,1],[1,1]], x = [1,2,0]: normal equations
  // [[2,1],[1,2]] d = [1,2]  ->  d = [0, 1]
  CMatrix H(3, 2);
  H << 1, 0, 0, 1, 1, 1;
  CMatrix x(3, 1);
  x << 1, 2, 0;
  const CMatrix d = detect_local(H, x);
  EXPECT_NEAR(std::abs(d(0, 0) - cplx(0, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d(1, 0) - cplx(1, 0)), 0.0, 1e-12);
}

TEST(DetectLocalTest, UnderdeterminedMinimumNorm) {
  const CMatrix H = random_cmatrix(2, 5, 6);
  const CMatrix x = random_cmatrix(2, 3, 7);
  const CMatrix d = detect_local(H, x);
  EXPECT_LT((H * d - x).norm(), 1e-10 * x.norm());
  // min-norm solution lies in the row space of H
  const CMatrix proj = H.adjoint() * (H * H.adjoint()).inverse() * H;
  EXPECT_LT((proj * d - d).norm(), 1e-10 * d.norm());
}

TEST(CombineTest, MeanAndCancellation) {
  const CMatrix D = random_cmatrix(2, 6, 8);
  const Detection same = combine_and_slice({D, D, D});
  EXPECT_LT((same.soft - D).norm(), 1e-14);
  const Detection zero = combine_and_slice({D, (-D).eval()});
  EXPECT_TRUE(zero.soft.isZero(0.0));
  const cplx plus = qpsk_point(true, true);
  for (Eigen::Index i = 0; i < zero.symbols.size(); ++i) {
    EXPECT_EQ(zero.symbols.data()[i], plus);
  }
  EXPECT_THROW(combine_and_slice({}), ArgumentError);
}

TEST(CombineTest, SlicerMatchesSignRule) {
  const double s = 1.0 / std::numbers::sqrt2;
  const CMatrix soft = random_cmatrix(4, 50, 9);
  const Detection det = combine_and_slice({soft});
  for (Eigen::Index i = 0; i < soft.size(); ++i) {
    const cplx z = soft.data()[i];
    const cplx want(z.real() >= 0 ? s : -s, z.imag() >= 0 ? s : -s);
    EXPECT_EQ(det.symbols.data()[i], want);
  }
  EXPECT_EQ(qpsk_slice(cplx(0.9, 0.8) * s), cplx(s, s));
  EXPECT_EQ(qpsk_slice(cplx(-0.9, 0.8) * s), cplx(-s, s));
  EXPECT_EQ(qpsk_slice(cplx(0.1, -3.0)), cplx(s, -s));
}

TEST(PilotOnlyTest, LsExactAndMasked) {
  const CMatrix P = gen_pilots(2, 3);
  const CMatrix H = random_cmatrix(4, 2, 10);
  const CMatrix Y = H * P;
  EXPECT_LT((pilot_only_ls(Y, P) - H).norm(), 1e-12);
  const Mask mask = Mask::Constant(4, 3, true);
  Mask partial = mask;
  partial(1, 2) = false;
  const CMatrix Ym = masked(Y, partial);
  CMatrix Ym2 = Ym;
  // off-mask entries are zero in the masked observation, so the estimate sees
  // the same data wherever the unobserved value came from
  CMatrix Yother = Y;
  Yother(1, 2) += cplx(5, 5);
  EXPECT_EQ(pilot_only_ls(masked(Yother, partial), P), pilot_only_ls(Ym2, P));
}

TEST(PilotOnlyTest, LsHand) {
  CMatrix P(1, 1);
  P << 1;
  CMatrix Y(2, 3);
  Y << cplx(1, 2), 9, 9, cplx(-3, 0), 9, 9;
  const CMatrix h = pilot_only_ls(Y, P);
  EXPECT_EQ(h(0, 0), cplx(1, 2));
  EXPECT_EQ(h(1, 0), cplx(-3, 0));
}

TEST(PilotOnlyTest, LmmseCases) {
  CMatrix H(4, 2);
  H << 1, 0, 0, 1, cplx(0, 1), 1, 2, -1;
  Mask mask = Mask::Constant(4, 3, false);
  mask(0, 2) = true;
  mask(1, 2) = true;
  CMatrix Y = CMatrix::Zero(4, 3);
  Y(0, 2) = cplx(0.5, 0);
  Y(1, 2) = cplx(0, -1);
  // F = I_2, sigma2 = 0  ->  d = y
  const CVector d0 = pilot_only_lmmse(H, Y, mask, 0.0, 2);
  EXPECT_LT(std::abs(d0(0) - cplx(0.5, 0)) + std::abs(d0(1) - cplx(0, -1)), 1e-14);
  // F = I_2, sigma2 = 1  ->  d = y / 2
  const CVector d1 = pilot_only_lmmse(H, Y, mask, 1.0, 2);
  EXPECT_LT(std::abs(d1(0) - cplx(0.25, 0)) + std::abs(d1(1) - cplx(0, -0.5)), 1e-14);
  // heavy regularization shrinks to zero
  EXPECT_LT(pilot_only_lmmse(H, Y, mask, 1e12, 2).norm(), 1e-11);
  EXPECT_THROW(pilot_only_lmmse(H, Y, mask, 1.0, 3), ArgumentError);
}

TEST(PilotOnlyTest, LmmseHandTwoByTwo) {
  // observed rows 2 and 3: F = [[i, 1], [2, -1]], y = [1, 0], sigma2 = 1
  CMatrix H(4, 2);
  H << 1, 0, 0, 1, cplx(0, 1), 1, 2, -1;
  Mask mask = Mask::Constant(4, 1, false);
  mask(2, 0) = true;
  mask(3, 0) = true;
  CMatrix Y = CMatrix::Zero(4, 1);
  Y(2, 0) = 1;
  // F^H F + I = [[6, -2 - i], [-2 + i, 3]], F^H y = [-i, 1]
  // det = 18 - 5 = 13; inverse = [[3, 2 + i], [2 - i, 6]] / 13
  const cplx i(0, 1);
  const cplx want0 = (3.0 * -i + (2.0 + i)) / 13.0;
  const cplx want1 = ((2.0 - i) * -i + 6.0) / 13.0;
  const CVector d = pilot_only_lmmse(H, Y, mask, 1.0, 0);
  EXPECT_LT(std::abs(d(0) - want0), 1e-14);
  EXPECT_LT(std::abs(d(1) - want1), 1e-14);
}

TEST(PilotOnlyTest, LmmseApproachesLs) {
  const CMatrix H = random_cmatrix(4, 2, 11);
  const Mask mask = Mask::Constant(4, 1, true);
  const CMatrix Y = random_cmatrix(4, 1, 12);
  const CVector d = pilot_only_lmmse(H, Y, mask, 1e-12, 0);
  const CVector ls = pinv(H) * Y.col(0);
  EXPECT_LT((d - ls).norm(), 1e-6 * ls.norm());
}

TEST(PilotOnlyTest, DetectShape) {
  const CMatrix H = random_cmatrix(4, 2, 13);
  const Mask mask = Mask::Constant(4, 9, true);
  const CMatrix Y = random_cmatrix(4, 9, 14);
  const CMatrix D = pilot_only_detect(H, Y, mask, 0.5, 2);
  EXPECT_EQ(D.rows(), 2);
  EXPECT_EQ(D.cols(), 7);
  EXPECT_EQ(D.col(3), pilot_only_lmmse(H, Y, mask, 0.5, 5));
}

TEST(MetricTest, NmseAndSer) {
  const CMatrix H = random_cmatrix(6, 2, 15);
  EXPECT_EQ(nmse(H, H), 0.0);
  EXPECT_DOUBLE_EQ(nmse(CMatrix::Zero(6, 2), H), 1.0);
  EXPECT_DOUBLE_EQ(nmse(2.0 * H, H), 1.0);
  EXPECT_THROW(nmse(H, CMatrix::Zero(6, 2)), MetricError);
  const CMatrix D = gen_payload(2, 10, SignalModel::qpsk, 1);
  EXPECT_EQ(ser(D, D), 0.0);
  CMatrix wrong = D;
  wrong(0, 0) = -wrong(0, 0);
  wrong(1, 3) = std::conj(wrong(1, 3));
  EXPECT_DOUBLE_EQ(ser(wrong, D), 2.0 / 20.0);
  EXPECT_EQ(ser(CMatrix(2, 0), CMatrix(2, 0)), 0.0);
}

TEST(PipelineTest, ExactCompletionGivesZeroError) {
  const int M = 3, n_a = 4, K = 2, tau_p = 2, tau_d = 12;
  const CMatrix H = random_cmatrix(M * n_a, K, 16);
  const CMatrix P = gen_pilots(K, tau_p);
  const CMatrix D = gen_payload(K, tau_d, SignalModel::qpsk, 17);
  CMatrix S(K, tau_p + tau_d);
  S << P, D;
  const CMatrix X = H * S;
  std::vector<CMatrix> H_hat, D_loc;
  for (int m = 0; m < M; ++m) {
    const CMatrix Xm = X.middleRows(m * n_a, n_a);
    H_hat.push_back(estimate_channel(Xm, P));
    D_loc.push_back(detect_local(H_hat.back(), Xm.rightCols(tau_d)));
  }
  EXPECT_LT(nmse(vstack(H_hat), H), 1e-20);
  const Detection det = combine_and_slice(D_loc);
  EXPECT_EQ(ser(det.symbols, D), 0.0);
  EXPECT_LT((det.soft - D_loc[0]).norm(), 1e-10);
}

}  // namespace
}  // namespace dpce
