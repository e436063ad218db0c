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

#include "blindtomo/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace blindtomo::oracles {

namespace {

ComplexMatrix random_hermitian(Eigen::Index d, RngStream& rng) {
  ComplexMatrix b(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) b(i, j) = Complex(rng.normal(), rng.normal());
  }
  return (b + b.adjoint()) / 2.0;
}

RealVector random_real(Eigen::Index len, RngStream& rng) {
  RealVector v(len);
  for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.normal();
  return v;
}

int random_between(int lo, int hi, RngStream& rng) {
  return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

double sparse_projection_distance(const RealVector& v, int s) {
  const int n = static_cast<int>(v.size());
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= std::min(s, n); ++k) {
    for_each_subset(n, k, [&](const std::vector<int>& idx) {
      std::vector<bool> kept(static_cast<std::size_t>(n), false);
      for (int i : idx) kept[static_cast<std::size_t>(i)] = true;
      double dropped = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!kept[static_cast<std::size_t>(i)]) dropped += v(i) * v(i);
      }
      best = std::min(best, dropped);
    });
  }
  return std::sqrt(best);
}

double rank_truncation_distance_sq(const ComplexMatrix& x, int r, RankProjectionMode mode) {
  const ComplexMatrix h = (x + x.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  const RealVector lambda = solver.eigenvalues();
  const int d = static_cast<int>(lambda.size());

  // A kept eigenvalue costs nothing; every other one costs lambda^2.
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= std::min(r, d); ++k) {
    for_each_subset(d, k, [&](const std::vector<int>& idx) {
      bool all_nonneg = true, all_nonpos = true;
      std::vector<bool> kept(static_cast<std::size_t>(d), false);
      for (int i : idx) {
        all_nonneg = all_nonneg && lambda(i) >= 0;
        all_nonpos = all_nonpos && lambda(i) <= 0;
        kept[static_cast<std::size_t>(i)] = true;
      }
      bool admissible = true;
      if (mode == RankProjectionMode::kPsd) admissible = all_nonneg;
      if (mode == RankProjectionMode::kSignedPsd) admissible = all_nonneg || all_nonpos;
      if (!admissible) return;
      double dropped = 0.0;
      for (int i = 0; i < d; ++i) {
        if (!kept[static_cast<std::size_t>(i)]) dropped += lambda(i) * lambda(i);
      }
      best = std::min(best, dropped);
    });
  }
  return best;
}

double omega_hat_distance(const BlockSignal& x, int s, int r, RankProjectionMode mode) {
  const int n = static_cast<int>(x.n());
  std::vector<double> full(static_cast<std::size_t>(n)), trunc(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    full[static_cast<std::size_t>(k)] = x.block(k).squaredNorm();
    trunc[static_cast<std::size_t>(k)] = rank_truncation_distance_sq(x.block(k), r, mode);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int size = 0; size <= std::min(s, n); ++size) {
    for_each_subset(n, size, [&](const std::vector<int>& idx) {
      std::vector<bool> in(static_cast<std::size_t>(n), false);
      for (int k : idx) in[static_cast<std::size_t>(k)] = true;
      double dist = 0.0;
      for (int k = 0; k < n; ++k) {
        dist += in[static_cast<std::size_t>(k)] ? trunc[static_cast<std::size_t>(k)]
                                                 : full[static_cast<std::size_t>(k)];
      }
      best = std::min(best, dist);
    });
  }
  return std::sqrt(best);
}

RealVector sparse_least_squares(const RealVector& y, const RealMatrix& a, int s) {
  const int n = static_cast<int>(a.cols());
  RealVector best_x = RealVector::Zero(n);
  double best_res = y.norm();
  for (int size = 1; size <= std::min(s, n); ++size) {
    for_each_subset(n, size, [&](const std::vector<int>& idx) {
      RealMatrix sub(a.rows(), size);
      for (int j = 0; j < size; ++j) sub.col(j) = a.col(idx[static_cast<std::size_t>(j)]);
      const RealVector coef = sub.colPivHouseholderQr().solve(y);
      const double res = (y - sub * coef).norm();
      if (res < best_res) {
        best_res = res;
        best_x.setZero();
        for (int j = 0; j < size; ++j) best_x(idx[static_cast<std::size_t>(j)]) = coef(j);
      }
    });
  }
  return best_x;
}

double adjoint_identity_gap(const MeasurementEnsemble& ens, RngStream& rng) {
  BlockSignal x(ens.n(), ens.d());
  for (Eigen::Index k = 0; k < ens.n(); ++k) x.block(k) = random_hermitian(ens.d(), rng);
  const RealVector y = random_real(ens.m(), rng);
  const double lhs = ens.apply(x).dot(y);
  // <X, A^dagger y> as a sum of dense traces, independent of the hvec packing.
  const BlockSignal back = ens.adjoint(y);
  double rhs = 0.0;
  for (Eigen::Index k = 0; k < ens.n(); ++k) rhs += (x.block(k).adjoint() * back.block(k)).trace().real();
  return std::abs(lhs - rhs) / (std::abs(lhs) + 1.0);
}

std::vector<OracleCheck> run_oracle_checks(int trials, std::uint64_t seed) {
  constexpr double kProjectionTol = 1e-12;
  constexpr double kAdjointTol = 1e-10;
  const RankProjectionMode modes[] = {RankProjectionMode::kPsd, RankProjectionMode::kSignedPsd,
                                      RankProjectionMode::kPlainRank};
  std::vector<OracleCheck> out;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));

    const RealVector v = random_real(12, rng);
    const int sv = random_between(1, 12, rng);
    out.push_back({"hard-threshold", t,
                   std::abs((v - hard_threshold_vector(v, sv)).norm() - sparse_projection_distance(v, sv)),
                   kProjectionTol});

    for (RankProjectionMode mode : modes) {
      const ComplexMatrix x = random_hermitian(6, rng);
      const int r = random_between(1, 3, rng);
      const double fast = (x - project_rank(x, r, mode)).norm();
      const double slow = std::sqrt(rank_truncation_distance_sq(x, r, mode));
      out.push_back({"rank-" + to_string(mode), t, std::abs(fast - slow), kProjectionTol});
    }

    for (RankProjectionMode mode : modes) {
      BlockSignal x(6, 4);
      for (Eigen::Index k = 0; k < 6; ++k) x.block(k) = random_hermitian(4, rng) * rng.uniform();
      const int s = random_between(1, 3, rng);
      const int r = random_between(1, 2, rng);
      const double fast = (x - project_omega_hat(x, s, r, mode)).frobenius_norm();
      const double slow = omega_hat_distance(x, s, r, mode);
      out.push_back({"omega-hat-" + to_string(mode), t, std::abs(fast - slow), kProjectionTol});
    }

    const std::uint64_t ens_seed = rng.next_u64();
    std::vector<MeasurementEnsemble> ensembles;
    ensembles.push_back(gue_ensemble(3, 20, 4, ens_seed));
    ensembles.push_back(gaussian_ensemble(3, 20, 4, ens_seed));
    ensembles.push_back(subsampled_pauli_ensemble(3, 20, 2, ens_seed));
    ensembles.push_back(coherent_error_pauli_ensemble(20, 2, ens_seed));
    std::vector<std::vector<ComplexMatrix>> obs(2, std::vector<ComplexMatrix>(15));
    for (auto& blk : obs) {
      for (auto& a : blk) a = random_hermitian(3, rng);
    }
    ensembles.push_back(MeasurementEnsemble::from_observables(obs));
    for (const auto& ens : ensembles) {
      out.push_back({"adjoint-" + to_string(ens.kind()), t, adjoint_identity_gap(ens, rng), kAdjointTol});
    }
  }
  return out;
}

}  // namespace blindtomo::oracles
