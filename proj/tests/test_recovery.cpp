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

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "blindtomo/diagnostics.hpp"
#include "blindtomo/oracles.hpp"
#include "blindtomo/recovery.hpp"
#include "test_util.hpp"

namespace blindtomo {
namespace {

using testing::random_hermitian;
using testing::random_real;

struct Problem {
  CalibrationVector xi;
  DensityMatrix rho;
  BlockSignal x;
  MeasurementEnsemble ens;
  RealVector y;
};

Problem gue_problem(Eigen::Index n, Eigen::Index d, Eigen::Index s, Eigen::Index r, Eigen::Index m,
                    std::uint64_t seed) {
  RngStream rng(seed);
  InstanceSpec spec{n, d, s, r, XiModel::gaussian_unit(), seed};
  Problem p{random_calibration(spec, rng), random_rank_r_state(d, r, rng), {}, gue_ensemble(n, m, d, seed + 1), {}};
  p.x = assemble_signal(p.xi, p.rho);
  p.y = p.ens.apply(p.x);
  return p;
}

/// All 4^q Pauli strings on q qubits as one single-block ensemble.
MeasurementEnsemble complete_pauli_basis(int qubits) {
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<PauliSum> obs;
  const int total = 1 << (2 * qubits);
  for (int code = 0; code < total; ++code) {
    std::string s;
    for (int j = qubits - 1; j >= 0; --j) s += letters[(code >> (2 * j)) & 3];
    obs.push_back({{1.0, PauliString(s)}});
  }
  return MeasurementEnsemble::from_pauli_sums(EnsembleKind::kSubsampledPauli, qubits, {obs});
}

SdtConfig sdt_config(Eigen::Index s, Eigen::Index r) {
  SdtConfig cfg;
  cfg.s = s;
  cfg.r = r;
  return cfg;
}

TEST(Sdt, RecoversNoiselessGueSignal) {
  const Problem p = gue_problem(5, 4, 2, 1, 120, 100);
  const RecoveryReport rep = sdt(p.y, p.ens, sdt_config(2, 1));
  EXPECT_EQ(rep.termination, Termination::kConverged);
  EXPECT_LE(rep.relative_residual, 1e-5);
  EXPECT_LT((rep.signal - p.x).frobenius_norm(), 1e-3);
}

TEST(Sdt, ZeroDataGivesZeroAfterOneIteration) {
  const auto ens = gue_ensemble(3, 10, 2, 1);
  const RecoveryReport rep = sdt(RealVector::Zero(10), ens, sdt_config(2, 1));
  EXPECT_EQ(rep.signal.frobenius_norm(), 0.0);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.termination, Termination::kConverged);
}

TEST(Sdt, CompleteBasisMatchesLeastSquaresThenProject) {
  RngStream rng(2);
  const auto ens = complete_pauli_basis(2);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho = random_pure_state(4, rng);
    RealVector y = ens.apply(BlockSignal(std::vector<ComplexMatrix>{rho.matrix()}));
    y += 1e-3 * random_real(y.size(), rng);

    // Oracle: pseudoinverse solve over all d^2 Hermitian coordinates, then
    // keep the top eigenpair.
    ComplexMatrix ls = ComplexMatrix::Zero(4, 4);
    {
      RealMatrix a(y.size(), 16);
      std::vector<ComplexMatrix> basis;
      for (Eigen::Index c = 0; c < 16; ++c) {
        ComplexMatrix e = ComplexMatrix::Zero(4, 4);
        const Eigen::Index i = c / 4, j = c % 4;
        if (i == j) {
          e(i, i) = 1.0;
        } else if (i < j) {
          e(i, j) = e(j, i) = 1.0;
        } else {
          e(j, i) = Complex(0.0, 1.0);
          e(i, j) = Complex(0.0, -1.0);
        }
        basis.push_back(e);
        for (Eigen::Index row = 0; row < y.size(); ++row) {
          a(row, c) = (ens.observable(0, row) * e).trace().real();
        }
      }
      const RealVector coef = a.completeOrthogonalDecomposition().solve(y);
      for (Eigen::Index c = 0; c < 16; ++c) ls += coef(c) * basis[static_cast<std::size_t>(c)];
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ls);
    const ComplexVector u = es.eigenvectors().col(3);
    const ComplexMatrix oracle = es.eigenvalues()(3) * u * u.adjoint();

    const RecoveryReport rep = standard_tomography(y, ens, sdt_config(1, 1));
    ASSERT_LT((rep.signal.block(0) - oracle).norm(), 1e-8);
  }
}

TEST(Sdt, StandardTomographyOnCompleteBasis) {
  RngStream rng(3);
  const auto ens = complete_pauli_basis(3);
  const DensityMatrix rho = random_pure_state(8, rng);
  const RealVector y = ens.apply(BlockSignal(std::vector<ComplexMatrix>{rho.matrix()}));
  SdtConfig cfg = sdt_config(1, 1);
  cfg.gamma_break = 1e-10;
  const RecoveryReport rep = standard_tomography(y, ens, cfg);
  const StateEstimate est = extract_estimate(rep.signal, 0);
  EXPECT_LT(trace_norm_error(est.state.matrix(), rho.matrix()), 1e-6);
  EXPECT_EQ(standard_tomography(RealVector::Zero(y.size()), ens, cfg).signal.frobenius_norm(), 0.0);
}

TEST(Sdt, StandardTomographyHasCalibrationFloor) {
  // Data from a miscalibrated device (corrections of scale 0.1), analysed as
  // if only the target block were present.
  RngStream rng(4);
  std::vector<double> errors;
  for (int t = 0; t < 10; ++t) {
    InstanceSpec spec{10, 8, 3, 1, XiModel::leading_one_scaled(0.1), 0};
    const CalibrationVector xi = random_calibration(spec, rng);
    const DensityMatrix rho = random_pure_state(8, rng);
    const auto ens = subsampled_pauli_ensemble(10, 300, 3, rng.next_u64());
    const RealVector y = ens.apply(assemble_signal(xi, rho));
    const RecoveryReport rep = standard_tomography(y, ens.select_blocks({0}), sdt_config(1, 1));
    errors.push_back(trace_norm_error(extract_estimate(rep.signal, 0).state.matrix(), rho.matrix()));
  }
  std::sort(errors.begin(), errors.end());
  const double med = 0.5 * (errors[4] + errors[5]);
  EXPECT_GT(med, 1e-2);
  EXPECT_LT(med, 1.0);
}

TEST(Sdt, StandardTomographyNeedsSingleBlock) {
  const auto ens = gue_ensemble(2, 5, 2, 5);
  EXPECT_THROW(standard_tomography(RealVector::Ones(5), ens, sdt_config(1, 1)), DimensionError);
}

TEST(Sdt, DtIsSdtWithFullSparsityAndPlainRank) {
  const Problem p = gue_problem(4, 3, 2, 1, 60, 6);
  SdtConfig cfg = sdt_config(2, 1);
  cfg.record_trace = true;
  const RecoveryReport a = dt(p.y, p.ens, cfg);
  SdtConfig full = cfg;
  full.s = 4;
  full.rank_mode = RankProjectionMode::kPlainRank;
  const RecoveryReport b = sdt(p.y, p.ens, full);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.residual_trace, b.residual_trace);
  EXPECT_EQ((a.signal - b.signal).frobenius_norm(), 0.0);
}

TEST(Sdt, SingleBlockPathsAgreeBitForBit) {
  RngStream rng(7);
  const auto ens = gue_ensemble(1, 30, 4, 8);
  const DensityMatrix rho = random_rank_r_state(4, 1, rng);
  const RealVector y = ens.apply(BlockSignal(std::vector<ComplexMatrix>{rho.matrix()}));
  SdtConfig cfg = sdt_config(1, 1);
  cfg.rank_mode = RankProjectionMode::kPsd;
  cfg.max_iters = 40;
  const RecoveryReport a = sdt(y, ens, cfg);
  const RecoveryReport b = standard_tomography(y, ens, cfg);
  LowRankIhtOptions opts;
  opts.gamma_break = cfg.gamma_break;
  const ComplexMatrix c = iht_low_rank(y, ens, 1, RankProjectionMode::kPsd, cfg.max_iters, opts);
  EXPECT_EQ((a.signal.block(0) - b.signal.block(0)).norm(), 0.0);
  EXPECT_EQ((a.signal.block(0) - c).norm(), 0.0);
}

TEST(Sdt, TrueSignalIsAFixedPoint) {
  const Problem p = gue_problem(5, 4, 2, 1, 80, 9);
  SdtConfig cfg = sdt_config(2, 1);
  cfg.max_iters = 1;
  for (bool tangent : {true, false}) {
    cfg.use_tangent_projection = tangent;
    BlockSignal after;
    SdtOptions opts;
    opts.initial = p.x;
    opts.observer = [&](int, const BlockSignal& x) { after = x; };
    sdt(p.y, p.ens, cfg, opts);
    EXPECT_LT((after - p.x).frobenius_norm(), 1e-10);
  }
}

TEST(Sdt, InformedRestrictionHoldsEveryIterate) {
  const Problem p = gue_problem(6, 3, 2, 1, 40, 10);
  const std::vector<Eigen::Index> support = p.xi.support();
  std::vector<char> allowed(6, 0);
  for (Eigen::Index k : support) allowed[static_cast<std::size_t>(k)] = 1;
  double off_support = 0.0;
  int calls = 0;
  SdtOptions opts;
  opts.observer = [&](int, const BlockSignal& x) {
    ++calls;
    for (Eigen::Index k = 0; k < 6; ++k) {
      if (!allowed[static_cast<std::size_t>(k)]) off_support += x.block(k).norm();
    }
  };
  const RecoveryReport rep = informed_dt(p.y, p.ens, sdt_config(2, 1), support, opts);
  EXPECT_GT(calls, 0);
  EXPECT_EQ(off_support, 0.0);
  for (Eigen::Index k = 0; k < 6; ++k) {
    if (!allowed[static_cast<std::size_t>(k)]) EXPECT_EQ(rep.signal.block(k).norm(), 0.0);
  }
}

TEST(Sdt, ReturnsBestIterate) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Problem p = gue_problem(6, 4, 3, 1, 50, seed);  // under-sampled: residual trace is not monotone
    SdtConfig cfg = sdt_config(3, 1);
    cfg.record_trace = true;
    cfg.max_iters = 100;
    const RecoveryReport rep = sdt(p.y, p.ens, cfg);
    ASSERT_FALSE(rep.residual_trace.empty());
    const double best = *std::min_element(rep.residual_trace.begin(), rep.residual_trace.end());
    EXPECT_EQ(rep.relative_residual, std::min(best, 1.0));
    EXPECT_NEAR((p.y - p.ens.apply(rep.signal)).norm() / p.y.norm(), rep.relative_residual, 1e-12);
  }
}

TEST(Sdt, ConfigAndInputErrors) {
  const auto ens = gue_ensemble(3, 10, 2, 14);
  SdtConfig cfg = sdt_config(4, 1);
  EXPECT_THROW(sdt(RealVector::Ones(10), ens, cfg), std::invalid_argument);
  cfg = sdt_config(2, 1);
  cfg.gamma_break = 0.0;
  EXPECT_THROW(sdt(RealVector::Ones(10), ens, cfg), std::invalid_argument);
  cfg = sdt_config(2, 1);
  cfg.support_restriction = std::vector<Eigen::Index>{5};
  EXPECT_THROW(sdt(RealVector::Ones(10), ens, cfg), std::invalid_argument);
  RealVector bad = RealVector::Ones(10);
  bad(3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sdt(bad, ens, sdt_config(2, 1)), NumericalFailure);
  EXPECT_THROW(sdt(RealVector::Ones(9), ens, sdt_config(2, 1)), DimensionError);
}

TEST(IhtSparseVector, IdentityMatrix) {
  const RealVector y{{0.0, 2.0, 0.0, -1.0, 0.0}};
  const SparseIhtResult res = iht_sparse_vector(y, RealMatrix::Identity(5, 5), 2, 50);
  EXPECT_LT((res.x - y).norm(), 1e-12);
}

TEST(IhtSparseVector, PlantedGaussianMatchesBruteForce) {
  RngStream rng(15);
  int exact = 0;
  for (int t = 0; t < 20; ++t) {
    RealMatrix a(20, 8);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
    RealVector x = RealVector::Zero(8);
    for (Eigen::Index k : random_support(8, 2, rng)) x(k) = rng.normal() + (rng.uniform() < 0.5 ? -1 : 1);
    const RealVector y = a * x;
    const SparseIhtResult res = iht_sparse_vector(y, a, 2, 500);
    const RealVector best = oracles::sparse_least_squares(y, a, 2);
    EXPECT_LT((best - x).norm(), 1e-8);
    // IHT is local: it may stop at a wrong-support fixed point, never below the optimum.
    EXPECT_GE(res.residual_norm, (y - a * best).norm() - 1e-9);
    exact += (res.x - x).norm() < 1e-8;
  }
  EXPECT_GE(exact, 18);
}

TEST(IhtSparseVector, ZeroData) {
  RngStream rng(16);
  RealMatrix a(10, 4);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
  EXPECT_EQ(iht_sparse_vector(RealVector::Zero(10), a, 2, 10).x, RealVector::Zero(4));
}

TEST(Als, ZeroData) {
  RngStream rng(17);
  const auto ens = coherent_error_pauli_ensemble(10, 2, 18);
  AlsConfig cfg;
  cfg.s = 2;
  const RecoveryReport rep = als_bt(RealVector::Zero(10), ens, cfg, rng);
  ASSERT_TRUE(rep.xi.has_value());
  EXPECT_EQ(rep.xi->values(), RealVector::Zero(7));
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.termination, Termination::kConverged);
}

TEST(Als, SingleKnownBlockMatchesStandardTomography) {
  RngStream rng(19);
  for (int t = 0; t < 5; ++t) {
    const auto ens = gue_ensemble(1, 60, 4, rng.next_u64());
    const DensityMatrix rho = random_pure_state(4, rng);
    const RealVector y = ens.apply(BlockSignal(std::vector<ComplexMatrix>{rho.matrix()}));
    AlsConfig cfg;
    cfg.s = 1;
    cfg.gamma_break = 1e-10;
    const RecoveryReport als = als_bt(y, ens, cfg, rng);
    SdtConfig scfg = sdt_config(1, 1);
    scfg.gamma_break = 1e-10;
    const RecoveryReport st = standard_tomography(y, ens, scfg);
    const StateEstimate est = extract_estimate(st.signal, 0);
    ASSERT_TRUE(als.state.has_value());
    EXPECT_LT(trace_norm_error(als.state->matrix(), est.state.matrix()), 1e-6);
    EXPECT_NEAR((*als.xi)[0], est.xi[0], 1e-6);
  }
}

TEST(Als, RecoversSmallCoherentErrorInstance) {
  RngStream rng(20);
  int recovered = 0;
  for (int t = 0; t < 5; ++t) {
    InstanceSpec spec{7, 4, 2, 1, XiModel::shifted_normal(0.2, 0.05), 0};
    const CalibrationVector xi = random_calibration(spec, rng);
    const DensityMatrix rho = random_pure_state(4, rng);
    const auto ens = coherent_error_pauli_ensemble(60, 2, rng.next_u64());
    const RealVector y = ens.apply(assemble_signal(xi, rho));
    AlsConfig cfg;
    cfg.s = 2;
    const RecoveryReport rep = als_bt(y, ens, cfg, rng);
    recovered += trace_norm_error(rep.state->matrix(), rho.matrix()) < 1e-4 &&
                 calibration_l2_error(rep.xi->values(), xi.values()) < 1e-4;
  }
  EXPECT_GE(recovered, 4);
}

TEST(Als, ReinitsAreBounded) {
  RngStream rng(21);
  // Pure noise data: the solver cannot converge and must stop at the cap.
  const auto ens = coherent_error_pauli_ensemble(30, 2, 22);
  AlsConfig cfg;
  cfg.s = 2;
  cfg.max_iters = 120;
  cfg.reinit_period = 20;
  cfg.max_reinits = 3;
  const RecoveryReport rep = als_bt(random_real(30, rng), ens, cfg, rng);
  EXPECT_EQ(rep.termination, Termination::kIterationCap);
  EXPECT_EQ(rep.iterations, 120);
  EXPECT_EQ(rep.reinits, 3);
  EXPECT_NEAR(rep.state->matrix().trace().real(), 1.0, 1e-10);
}

TEST(Als, ConfigValidation) {
  AlsConfig cfg;
  cfg.max_iters = 10;
  cfg.reinit_period = 20;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace blindtomo
