// Copyright 2026 The blindtomo Authors
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

#include <gtest/gtest.h>

#include <cmath>

#include "blindtomo/signals.hpp"
#include "test_util.hpp"

namespace blindtomo {
namespace {

using testing::diag;

TEST(RandomPureState, DimensionOneIsOne) {
  RngStream rng(1);
  const DensityMatrix rho = random_pure_state(1, rng);
  ASSERT_EQ(rho.dim(), 1);
  EXPECT_NEAR(std::abs(rho.matrix()(0, 0) - Complex(1.0)), 0.0, 1e-15);
}

TEST(RandomPureState, IsRankOneProjector) {
  RngStream rng(2);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = random_pure_state(6, rng);
    const HermitianEig e = eig_hermitian(rho.matrix());
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_GE(e.eigenvalues.minCoeff(), -1e-12);
    EXPECT_EQ(rho.rank(), 1);
    EXPECT_LT((rho.matrix() * rho.matrix() - rho.matrix()).norm(), 1e-12);
  }
}

TEST(RandomPureState, SeedDeterminism) {
  RngStream a(77), b(77);
  EXPECT_EQ((random_pure_state(4, a).matrix() - random_pure_state(4, b).matrix()).norm(), 0.0);
}

TEST(RandomPureState, MeanApproachesMaximallyMixed) {
  // E|psi><psi| = I/2 by unitary invariance. Entry variances of a Haar
  // qubit projector: 1/12 for the diagonal and for both parts of the off-diagonal.
  RngStream rng(3);
  const int n = 10000;
  ComplexMatrix mean = ComplexMatrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) mean += random_pure_state(2, rng).matrix();
  mean /= static_cast<double>(n);
  const double se = std::sqrt(1.0 / 12.0 / n);
  EXPECT_NEAR(mean(0, 0).real(), 0.5, 5 * se);
  EXPECT_NEAR(mean(1, 1).real(), 0.5, 5 * se);
  EXPECT_NEAR(mean(0, 1).real(), 0.0, 5 * se);
  EXPECT_NEAR(mean(0, 1).imag(), 0.0, 5 * se);
}

TEST(RandomRankRState, FixedEqualSpectrum) {
  RngStream rng(4);
  const DensityMatrix rho = random_rank_r_state(2, 2, rng, RealVector::Constant(2, 1.0));
  const HermitianEig e = eig_hermitian(rho.matrix());
  EXPECT_NEAR(e.eigenvalues(0), 0.5, 1e-12);
  EXPECT_NEAR(e.eigenvalues(1), 0.5, 1e-12);
}

TEST(RandomRankRState, TraceOneAndRankAtMostR) {
  RngStream rng(5);
  for (Eigen::Index r = 1; r <= 4; ++r) {
    const DensityMatrix rho = random_rank_r_state(8, r, rng);
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_EQ(rho.rank(), r);
  }
}

TEST(RandomRankRState, RankOneMatchesPureStateLaw) {
  // Same generator path in law: compare the mean of |<0|rho|0>|^2 (= 1/3 at d=2).
  RngStream a(6), b(7);
  const int n = 20000;
  double sa = 0.0, sb = 0.0;
  for (int i = 0; i < n; ++i) {
    sa += std::norm(random_rank_r_state(2, 1, a).matrix()(0, 0));
    sb += std::norm(random_pure_state(2, b).matrix()(0, 0));
  }
  EXPECT_NEAR(sa / n, 1.0 / 3.0, 0.01);
  EXPECT_NEAR(sb / n, 1.0 / 3.0, 0.01);
}

TEST(DensityMatrix, ValidatesInvariants) {
  EXPECT_THROW(DensityMatrix(diag({0.6, 0.6})), std::invalid_argument);
  EXPECT_THROW(DensityMatrix(diag({1.1, -0.1})), std::invalid_argument);
  ComplexMatrix nonherm = diag({0.5, 0.5});
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{nonherm}, std::invalid_argument);
  EXPECT_NO_THROW(DensityMatrix(diag({0.7, 0.3})));
}

TEST(RandomCalibration, GaussianUnitHasSNonzeros) {
  RngStream rng(8);
  InstanceSpec spec{10, 4, 3, 1, XiModel::gaussian_unit(), 0};
  std::vector<int> hits(10, 0);
  for (int t = 0; t < 2000; ++t) {
    const CalibrationVector xi = random_calibration(spec, rng);
    ASSERT_EQ(xi.nonzero_count(), 3);
    for (Eigen::Index k : xi.support()) ++hits[static_cast<std::size_t>(k)];
  }
  // Uniform supports: each index active with probability 3/10.
  for (int h : hits) EXPECT_NEAR(h / 2000.0, 0.3, 5 * std::sqrt(0.3 * 0.7 / 2000));
}

TEST(RandomCalibration, LeadingOneScaled) {
  RngStream rng(9);
  InstanceSpec spec{10, 4, 3, 1, XiModel::leading_one_scaled(0.1), 0};
  double sq = 0.0;
  int count = 0;
  for (int t = 0; t < 2000; ++t) {
    const CalibrationVector xi = random_calibration(spec, rng);
    ASSERT_EQ(xi[0], 1.0);
    ASSERT_EQ(xi.nonzero_count(), 3);
    for (Eigen::Index k = 1; k < 10; ++k) {
      if (xi[k] != 0.0) sq += xi[k] * xi[k], ++count;
    }
  }
  EXPECT_EQ(count, 4000);
  // E[(0.1 z)^2] = 0.01
  EXPECT_NEAR(sq / count, 0.01, 5 * 0.01 * std::sqrt(2.0 / count));
}

TEST(RandomCalibration, ShiftedNormal) {
  RngStream rng(10);
  InstanceSpec spec{7, 4, 2, 1, XiModel::shifted_normal(0.2, 0.05), 0};
  double sum = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const CalibrationVector xi = random_calibration(spec, rng);
    ASSERT_EQ(xi[0], 1.0);
    ASSERT_EQ(xi.nonzero_count(), 2);
    for (Eigen::Index k = 1; k < 7; ++k) sum += xi[k];
  }
  EXPECT_NEAR(sum / 2000, 0.2, 5 * 0.05 / std::sqrt(2000.0));
}

TEST(InstanceSpec, Validation) {
  EXPECT_THROW((InstanceSpec{3, 4, 4, 1, {}, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((InstanceSpec{3, 4, 0, 1, {}, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((InstanceSpec{3, 4, 2, 5, {}, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((InstanceSpec{3, 4, 3, 4, {}, 0}.validate()));
}

TEST(AssembleSignal, Examples) {
  RngStream rng(11);
  const DensityMatrix rho = random_pure_state(3, rng);
  RealVector e1 = RealVector::Zero(3);
  e1(1) = 1.0;
  const BlockSignal x = assemble_signal(CalibrationVector(e1), rho);
  EXPECT_EQ(x.block(0).norm(), 0.0);
  EXPECT_EQ((x.block(1) - rho.matrix()).norm(), 0.0);
  EXPECT_EQ(x.block(2).norm(), 0.0);

  EXPECT_EQ(assemble_signal(CalibrationVector(RealVector::Zero(3)), rho).frobenius_norm(), 0.0);

  const BlockSignal y = assemble_signal(CalibrationVector(RealVector{{1.0, 0.1}}), rho);
  EXPECT_LT((y.block(0) - rho.matrix()).norm(), 1e-15);
  EXPECT_LT((y.block(1) - 0.1 * rho.matrix()).norm(), 1e-15);
}

TEST(ExtractEstimate, RoundTrip) {
  RngStream rng(12);
  for (int t = 0; t < 100; ++t) {
    InstanceSpec spec{6, 4, 2, 2, XiModel::gaussian_unit(), 0};
    const CalibrationVector xi = random_calibration(spec, rng);
    const DensityMatrix rho = random_rank_r_state(4, 2, rng);
    const BlockSignal x = assemble_signal(xi, rho);
    const StateEstimate est = extract_estimate(x, xi.support()[0]);
    EXPECT_LT((est.state.matrix() - rho.matrix()).norm(), 1e-10);
    EXPECT_LT((est.xi.values() - xi.values()).norm(), 1e-10);
  }
}

TEST(ExtractEstimate, ScaledBlockAndDegenerate) {
  RngStream rng(13);
  const DensityMatrix rho = random_pure_state(2, rng);
  BlockSignal x(2, 2);
  x.block(0) = 2.0 * rho.matrix();
  const StateEstimate est = extract_estimate(x, 0);
  EXPECT_LT((est.state.matrix() - rho.matrix()).norm(), 1e-12);
  EXPECT_NEAR(est.xi[0], 2.0, 1e-12);
  EXPECT_THROW(extract_estimate(BlockSignal(2, 2), 0), DegenerateEstimateError);
}

TEST(ProjectToDensityMatrix, FixedPointAndSimplex) {
  RngStream rng(14);
  const DensityMatrix rho = random_rank_r_state(4, 2, rng);
  EXPECT_LT((project_to_density_matrix(rho.matrix()).matrix() - rho.matrix()).norm(), 1e-12);
  // eigenvalues (0.9, 0.3, -0.2) -> simplex projection (0.8, 0.2, 0)
  const DensityMatrix p = project_to_density_matrix(diag({0.9, 0.3, -0.2}));
  EXPECT_LT((p.matrix() - diag({0.8, 0.2, 0.0})).norm(), 1e-12);
}

TEST(RandomOmegaHatSignal, StructureAndNorm) {
  RngStream rng(15);
  for (int t = 0; t < 100; ++t) {
    const BlockSignal x = random_omega_hat_signal(8, 4, 3, 2, rng);
    EXPECT_NEAR(x.frobenius_norm(), 1.0, 1e-12);
    EXPECT_EQ(x.active_blocks().size(), 3u);
    for (Eigen::Index k : x.active_blocks()) {
      const RealVector ev = eig_hermitian(x.block(k)).eigenvalues;
      int nonzero = 0;
      for (Eigen::Index i = 0; i < ev.size(); ++i) nonzero += std::abs(ev(i)) > 1e-10;
      EXPECT_LE(nonzero, 2);
    }
  }
}

}  // namespace
}  // namespace blindtomo
