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

#pragma once

// Brute-force reference computations used to check the fast paths. Nothing
// here calls into the projections or recovery code: supports are enumerated
// exhaustively and spectral truncations are chosen by searching over subsets
// of eigenvalues.

#include <cstdint>
#include <string>
#include <vector>

#include "blindtomo/linalg.hpp"
#include "blindtomo/measurements.hpp"
#include "blindtomo/projections.hpp"
#include "blindtomo/signals.hpp"

namespace blindtomo::oracles {

/// Calls f(indices) for every size-k subset of {0, ..., n-1} in lexicographic order.
template <typename F>
void for_each_subset(int n, int k, F&& f) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

/// min over supports |S| <= s of ||v - v_S||_2.
double sparse_projection_distance(const RealVector& v, int s);

/// Squared distance from Hermitian x to the closest matrix of rank <= r
/// allowed by `mode`, found by trying every admissible subset of eigenvalues.
double rank_truncation_distance_sq(const ComplexMatrix& x, int r, RankProjectionMode mode);

/// Distance from x to the relaxed signal set with parameters (s, r, mode):
/// every support of size <= s combined with per-block truncation.
double omega_hat_distance(const BlockSignal& x, int s, int r, RankProjectionMode mode);

/// min over s-sparse x of ||y - A x||, by least squares on every support.
RealVector sparse_least_squares(const RealVector& y, const RealMatrix& a, int s);

/// | <A(X), y> - <X, A^dagger(y)> | for one random pair, relative to |<A(X), y>| + 1.
double adjoint_identity_gap(const MeasurementEnsemble& ens, RngStream& rng);

struct OracleCheck {
  std::string name;
  int trial = 0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool passed() const { return discrepancy <= tolerance; }
};

/// Randomized projection-optimality and adjoint checks, `trials` of each.
std::vector<OracleCheck> run_oracle_checks(int trials, std::uint64_t seed);

}  // namespace blindtomo::oracles
