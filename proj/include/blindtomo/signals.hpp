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

// Signal model: calibration vectors, density matrices and the lifted block
// signal X = sum_k xi_k e_k (x) x_k, plus seeded instance generators.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blindtomo/linalg.hpp"
#include "blindtomo/rng.hpp"

namespace blindtomo {

class DegenerateEstimateError : public std::runtime_error {
 public:
  explicit DegenerateEstimateError(const std::string& what) : std::runtime_error(what) {}
};

/// Real calibration coefficients xi, one per measurement block.
class CalibrationVector {
 public:
  CalibrationVector() = default;
  explicit CalibrationVector(RealVector values);

  const RealVector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index k) const { return values_(k); }
  /// Number of entries with |xi_k| > tol.
  Eigen::Index nonzero_count(double tol = 0.0) const;
  std::vector<Eigen::Index> support(double tol = 0.0) const;

 private:
  RealVector values_;
};

/// Hermitian, PSD, unit-trace d x d matrix. Construction validates the type
/// invariants (min eigenvalue >= -1e-10, |trace - 1| <= 1e-10).
class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix matrix);

  const ComplexMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  /// Number of eigenvalues above tol.
  Eigen::Index rank(double tol = kTolerance) const;

 private:
  ComplexMatrix matrix_;
};

/// n stacked d x d Hermitian blocks: the lifted variable in C^{nd x d}.
class BlockSignal {
 public:
  BlockSignal() = default;
  BlockSignal(Eigen::Index n, Eigen::Index d);
  explicit BlockSignal(std::vector<ComplexMatrix> blocks);

  static BlockSignal zero(Eigen::Index n, Eigen::Index d) { return BlockSignal(n, d); }

  Eigen::Index n() const { return static_cast<Eigen::Index>(blocks_.size()); }
  Eigen::Index d() const { return d_; }
  const ComplexMatrix& block(Eigen::Index k) const { return blocks_[static_cast<std::size_t>(k)]; }
  ComplexMatrix& block(Eigen::Index k) { return blocks_[static_cast<std::size_t>(k)]; }
  const std::vector<ComplexMatrix>& blocks() const { return blocks_; }

  double frobenius_norm() const;
  double block_norm(Eigen::Index k) const { return block(k).norm(); }
  /// Indices of blocks with Frobenius norm above tol.
  std::vector<Eigen::Index> active_blocks(double tol = 0.0) const;
  bool same_shape(const BlockSignal& other) const { return n() == other.n() && d_ == other.d_; }

  /// Blockwise Hilbert-Schmidt inner product sum_k Tr(a_k^dagger b_k).
  friend Complex inner(const BlockSignal& a, const BlockSignal& b);
  friend BlockSignal operator+(const BlockSignal& a, const BlockSignal& b);
  friend BlockSignal operator-(const BlockSignal& a, const BlockSignal& b);
  friend BlockSignal operator*(double scale, const BlockSignal& a);

 private:
  Eigen::Index d_ = 0;
  std::vector<ComplexMatrix> blocks_;
};

struct XiModel {
  enum class Kind { kGaussianUnit, kLeadingOneScaled, kShiftedNormal };
  Kind kind = Kind::kGaussianUnit;
  double scale = 0.1;   // leading-one-scaled
  double mean = 0.2;    // shifted-normal
  double stddev = 0.05; // shifted-normal

  static XiModel gaussian_unit() { return {}; }
  static XiModel leading_one_scaled(double scale) { return {Kind::kLeadingOneScaled, scale}; }
  static XiModel shifted_normal(double mean, double stddev) {
    return {Kind::kShiftedNormal, 0.1, mean, stddev};
  }
};

std::string to_string(XiModel::Kind kind);
XiModel::Kind xi_model_kind_from_string(const std::string& name);

struct InstanceSpec {
  Eigen::Index n = 1;
  Eigen::Index d = 2;
  Eigen::Index s = 1;
  Eigen::Index r = 1;
  XiModel xi_model;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless 1 <= s <= n, 1 <= r <= d.
  void validate() const;
};

/// Haar-random unit vector in C^d (normalized complex Gaussian).
ComplexVector random_unit_vector(Eigen::Index d, RngStream& rng);

/// d x r matrix with orthonormal columns, Haar distributed.
ComplexMatrix random_isometry(Eigen::Index d, Eigen::Index r, RngStream& rng);

DensityMatrix random_pure_state(Eigen::Index d, RngStream& rng);

/// Rank-r state V diag(spectrum) V^dagger with a Haar isometry V. The default
/// spectrum is flat (1/r each); a supplied spectrum must be non-negative and
/// is normalized to unit sum.
DensityMatrix random_rank_r_state(Eigen::Index d, Eigen::Index r, RngStream& rng,
                                  const std::optional<RealVector>& spectrum = std::nullopt);

/// Uniformly random s-subset of {first, ..., n-1}, sorted ascending.
std::vector<Eigen::Index> random_support(Eigen::Index n, Eigen::Index s, RngStream& rng,
                                         Eigen::Index first = 0);

CalibrationVector random_calibration(const InstanceSpec& spec, RngStream& rng);

/// Block k = xi_k * rho.
BlockSignal assemble_signal(const CalibrationVector& xi, const DensityMatrix& rho);

/// Euclidean projection of a Hermitian matrix onto the density matrices
/// (eigenvalues projected onto the probability simplex).
DensityMatrix project_to_density_matrix(const ComplexMatrix& a);

struct StateEstimate {
  DensityMatrix state;
  CalibrationVector xi;
};

/// State = block_ref / Tr(block_ref) projected onto density matrices;
/// xi_k = Tr(block_k). Throws DegenerateEstimateError if |Tr(block_ref)| <= 1e-12.
StateEstimate extract_estimate(const BlockSignal& x, Eigen::Index reference_block);

/// Random unit-Frobenius element of the relaxed signal set: uniform s-support,
/// Haar rank-r blocks with flat spectra, signed Gaussian weights.
BlockSignal random_omega_hat_signal(Eigen::Index n, Eigen::Index d, Eigen::Index s,
                                    Eigen::Index r, RngStream& rng);

}  // namespace blindtomo
