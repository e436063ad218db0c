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

// Hard-thresholding projections onto the structured signal sets.

#include <string>
#include <vector>

#include "blindtomo/linalg.hpp"
#include "blindtomo/signals.hpp"

namespace blindtomo {

/// How a Hermitian block is truncated to rank r.
///   kPsd       keep the r largest non-negative eigenvalues (projection onto PSD rank-r)
///   kSignedPsd better of psd(x) and -psd(-x) in Frobenius distance (projection onto
///              {c * x : c real, x PSD rank-r})
///   kPlainRank keep the r eigenvalues of largest magnitude
enum class RankProjectionMode { kPsd, kSignedPsd, kPlainRank };

std::string to_string(RankProjectionMode mode);
RankProjectionMode rank_mode_from_string(const std::string& name);

/// Keeps the s largest-magnitude entries (ties: lowest index), zeroes the rest.
RealVector hard_threshold_vector(const RealVector& v, Eigen::Index s);

/// Indices of the s largest-magnitude entries, ties broken by lowest index,
/// returned in ascending index order.
std::vector<Eigen::Index> top_s_indices(const RealVector& v, Eigen::Index s);

/// Rank-r truncation of a Hermitian matrix according to `mode`.
ComplexMatrix project_rank(const ComplexMatrix& x, Eigen::Index r, RankProjectionMode mode);

/// Same as project_rank but reuses a precomputed eigendecomposition of x.
ComplexMatrix project_rank(const HermitianEig& eig, Eigen::Index r, RankProjectionMode mode);

/// Projection onto the relaxed signal set: every block is rank-projected and
/// the s blocks with the largest projected Frobenius norm are kept (ties:
/// lowest index).
BlockSignal project_omega_hat(const BlockSignal& x, Eigen::Index s, Eigen::Index r,
                              RankProjectionMode mode);

/// Blocks with Frobenius norm at or below this are treated as vanishing by the
/// tangent-space projection.
inline constexpr double kVanishingBlockNorm = 1e-12;

/// Orthonormal basis of the r eigenvectors of x with largest |eigenvalue|.
ComplexMatrix dominant_eigenvectors(const ComplexMatrix& x, Eigen::Index r);

/// Tangent-space projection at x, per block:
///   P(G)_k = g_k - (1 - P_k) g_k (1 - P_k),  P_k = U_k U_k^dagger
/// with U_k the dominant r eigenvectors of x_k; vanishing blocks of x pass g_k
/// through unchanged.
BlockSignal tangent_space_project(const BlockSignal& x, const BlockSignal& g, Eigen::Index r);

}  // namespace blindtomo
