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

#include "blindtomo/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace blindtomo {

std::string to_string(RankProjectionMode mode) {
  switch (mode) {
    case RankProjectionMode::kPsd: return "psd";
    case RankProjectionMode::kSignedPsd: return "signed-psd";
    case RankProjectionMode::kPlainRank: return "plain-rank";
  }
  return "unknown";
}

RankProjectionMode rank_mode_from_string(const std::string& name) {
  if (name == "psd") return RankProjectionMode::kPsd;
  if (name == "signed-psd") return RankProjectionMode::kSignedPsd;
  if (name == "plain-rank") return RankProjectionMode::kPlainRank;
  throw std::invalid_argument("unknown rank projection mode '" + name + "'");
}

std::vector<Eigen::Index> top_s_indices(const RealVector& v, Eigen::Index s) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (s < 0) s = 0;
  if (s >= n) return order;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(v(i)) > std::abs(v(j));
  });
  order.resize(static_cast<std::size_t>(s));
  std::sort(order.begin(), order.end());
  return order;
}

RealVector hard_threshold_vector(const RealVector& v, Eigen::Index s) {
  if (s >= v.size()) return v;
  RealVector out = RealVector::Zero(v.size());
  for (Eigen::Index i : top_s_indices(v, s)) out(i) = v(i);
  return out;
}

namespace {

// Spectrum kept by the psd rule: the first r non-negative eigenvalues of a
// descending spectrum.
RealVector psd_kept(const RealVector& descending, Eigen::Index r) {
  RealVector kept = RealVector::Zero(descending.size());
  for (Eigen::Index k = 0; k < std::min(r, descending.size()); ++k) {
    if (descending(k) <= 0.0) break;
    kept(k) = descending(k);
  }
  return kept;
}

// psd rule applied to -x, expressed on x's (descending) spectrum: the r most
// negative eigenvalues.
RealVector negative_kept(const RealVector& descending, Eigen::Index r) {
  const Eigen::Index d = descending.size();
  RealVector kept = RealVector::Zero(d);
  for (Eigen::Index k = 0; k < std::min(r, d); ++k) {
    const Eigen::Index idx = d - 1 - k;
    if (descending(idx) >= 0.0) break;
    kept(idx) = descending(idx);
  }
  return kept;
}

RealVector magnitude_kept(const RealVector& descending, Eigen::Index r) {
  const Eigen::Index d = descending.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(descending(i)) > std::abs(descending(j));
  });
  RealVector kept = RealVector::Zero(d);
  for (Eigen::Index k = 0; k < std::min(r, d); ++k) {
    kept(order[static_cast<std::size_t>(k)]) = descending(order[static_cast<std::size_t>(k)]);
  }
  return kept;
}

RealVector kept_spectrum(const RealVector& descending, Eigen::Index r, RankProjectionMode mode) {
  switch (mode) {
    case RankProjectionMode::kPsd: return psd_kept(descending, r);
    case RankProjectionMode::kPlainRank: return magnitude_kept(descending, r);
    case RankProjectionMode::kSignedPsd: {
      RealVector pos = psd_kept(descending, r);
      RealVector neg = negative_kept(descending, r);
      // ||x - P(x)||^2 = ||x||^2 - ||kept||^2 for spectral truncations.
      return pos.squaredNorm() >= neg.squaredNorm() ? pos : neg;
    }
  }
  throw std::logic_error("kept_spectrum: unknown mode");
}

}  // namespace

ComplexMatrix project_rank(const HermitianEig& eig, Eigen::Index r, RankProjectionMode mode) {
  const RealVector kept = kept_spectrum(eig.eigenvalues, r, mode);
  const Eigen::Index d = kept.size();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (kept(k) != 0.0) {
      out.noalias() += kept(k) * eig.eigenvectors.col(k) * eig.eigenvectors.col(k).adjoint();
    }
  }
  return hermitian_part(out);
}

ComplexMatrix project_rank(const ComplexMatrix& x, Eigen::Index r, RankProjectionMode mode) {
  if (r < 1 || r > x.rows()) throw DimensionError("project_rank: need 1 <= r <= d");
  return project_rank(eig_hermitian(x), r, mode);
}

BlockSignal project_omega_hat(const BlockSignal& x, Eigen::Index s, Eigen::Index r,
                              RankProjectionMode mode) {
  if (s < 0 || s > x.n()) throw DimensionError("project_omega_hat: need 0 <= s <= n");
  BlockSignal projected(x.n(), x.d());
  RealVector norms(x.n());
  for (Eigen::Index k = 0; k < x.n(); ++k) {
    if (x.block_norm(k) == 0.0) {
      norms(k) = 0.0;
      continue;
    }
    projected.block(k) = project_rank(x.block(k), r, mode);
    norms(k) = projected.block(k).norm();
  }
  if (s == x.n()) return projected;
  BlockSignal out(x.n(), x.d());
  for (Eigen::Index k : top_s_indices(norms, s)) out.block(k) = std::move(projected.block(k));
  return out;
}

ComplexMatrix dominant_eigenvectors(const ComplexMatrix& x, Eigen::Index r) {
  const HermitianEig eig = eig_hermitian(x);
  const Eigen::Index d = eig.eigenvalues.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(eig.eigenvalues(i)) > std::abs(eig.eigenvalues(j));
  });
  const Eigen::Index cols = std::min(r, d);
  ComplexMatrix u(d, cols);
  for (Eigen::Index k = 0; k < cols; ++k) u.col(k) = eig.eigenvectors.col(order[static_cast<std::size_t>(k)]);
  return u;
}

BlockSignal tangent_space_project(const BlockSignal& x, const BlockSignal& g, Eigen::Index r) {
  if (!x.same_shape(g)) throw DimensionError("tangent_space_project: shape mismatch");
  BlockSignal out = g;
  for (Eigen::Index k = 0; k < x.n(); ++k) {
    if (x.block_norm(k) <= kVanishingBlockNorm) continue;
    const ComplexMatrix u = dominant_eigenvectors(x.block(k), r);
    const ComplexMatrix& gk = g.block(k);
    // g - (1-P) g (1-P) = P g + g P - P g P, evaluated through U.
    const ComplexMatrix ug = u.adjoint() * gk;           // r x d
    const ComplexMatrix pg = u * ug;                     // P g
    const ComplexMatrix gp = (gk * u) * u.adjoint();     // g P
    const ComplexMatrix pgp = u * (ug * u) * u.adjoint();
    out.block(k) = pg + gp - pgp;
  }
  return out;
}

}  // namespace blindtomo
