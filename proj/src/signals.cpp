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

#include "blindtomo/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blindtomo {

CalibrationVector::CalibrationVector(RealVector values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw std::invalid_argument("CalibrationVector: non-finite entry");
}

Eigen::Index CalibrationVector::nonzero_count(double tol) const {
  return (values_.array().abs() > tol).count();
}

std::vector<Eigen::Index> CalibrationVector::support(double tol) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    if (std::abs(values_(k)) > tol) out.push_back(k);
  }
  return out;
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw DimensionError("DensityMatrix: expected a non-empty square matrix");
  }
  if (!matrix_.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
  if (hermiticity_defect(matrix_) > kTolerance) {
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  }
  const double trace = matrix_.trace().real();
  if (std::abs(trace - 1.0) > kTolerance) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(trace) + " != 1");
  }
  const HermitianEig eig = eig_hermitian(matrix_);
  if (eig.eigenvalues(eig.eigenvalues.size() - 1) < -kTolerance) {
    throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
  }
}

Eigen::Index DensityMatrix::rank(double tol) const {
  return (eig_hermitian(matrix_).eigenvalues.array() > tol).count();
}

BlockSignal::BlockSignal(Eigen::Index n, Eigen::Index d)
    : d_(d), blocks_(static_cast<std::size_t>(n), ComplexMatrix::Zero(d, d)) {}

BlockSignal::BlockSignal(std::vector<ComplexMatrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw DimensionError("BlockSignal: at least one block required");
  d_ = blocks_.front().rows();
  for (const auto& b : blocks_) {
    if (b.rows() != d_ || b.cols() != d_) throw DimensionError("BlockSignal: inconsistent block shapes");
  }
}

double BlockSignal::frobenius_norm() const {
  double sq = 0.0;
  for (const auto& b : blocks_) sq += b.squaredNorm();
  return std::sqrt(sq);
}

std::vector<Eigen::Index> BlockSignal::active_blocks(double tol) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index k = 0; k < n(); ++k) {
    if (block_norm(k) > tol) out.push_back(k);
  }
  return out;
}

Complex inner(const BlockSignal& a, const BlockSignal& b) {
  if (!a.same_shape(b)) throw DimensionError("inner: block signal shapes differ");
  Complex sum = 0.0;
  for (Eigen::Index k = 0; k < a.n(); ++k) sum += frobenius_inner(a.block(k), b.block(k));
  return sum;
}

BlockSignal operator+(const BlockSignal& a, const BlockSignal& b) {
  if (!a.same_shape(b)) throw DimensionError("operator+: block signal shapes differ");
  BlockSignal out = a;
  for (Eigen::Index k = 0; k < a.n(); ++k) out.block(k) += b.block(k);
  return out;
}

BlockSignal operator-(const BlockSignal& a, const BlockSignal& b) {
  if (!a.same_shape(b)) throw DimensionError("operator-: block signal shapes differ");
  BlockSignal out = a;
  for (Eigen::Index k = 0; k < a.n(); ++k) out.block(k) -= b.block(k);
  return out;
}

BlockSignal operator*(double scale, const BlockSignal& a) {
  BlockSignal out = a;
  for (auto& b : out.blocks_) b *= scale;
  return out;
}

std::string to_string(XiModel::Kind kind) {
  switch (kind) {
    case XiModel::Kind::kGaussianUnit: return "gaussian-unit";
    case XiModel::Kind::kLeadingOneScaled: return "leading-one-scaled";
    case XiModel::Kind::kShiftedNormal: return "shifted-normal";
  }
  return "unknown";
}

XiModel::Kind xi_model_kind_from_string(const std::string& name) {
  if (name == "gaussian-unit") return XiModel::Kind::kGaussianUnit;
  if (name == "leading-one-scaled") return XiModel::Kind::kLeadingOneScaled;
  if (name == "shifted-normal") return XiModel::Kind::kShiftedNormal;
  throw std::invalid_argument("unknown xi model '" + name + "'");
}

void InstanceSpec::validate() const {
  if (n < 1 || s < 1 || s > n) throw std::invalid_argument("instance: need 1 <= s <= n");
  if (d < 1 || r < 1 || r > d) throw std::invalid_argument("instance: need 1 <= r <= d");
}

ComplexVector random_unit_vector(Eigen::Index d, RngStream& rng) {
  ComplexVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

ComplexMatrix random_isometry(Eigen::Index d, Eigen::Index r, RngStream& rng) {
  if (r < 1 || r > d) throw DimensionError("random_isometry: need 1 <= r <= d");
  ComplexMatrix g(d, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, r);
  const ComplexMatrix& packed = qr.matrixQR();
  // Fix the phase freedom of QR so the distribution is Haar.
  for (Eigen::Index j = 0; j < r; ++j) {
    const Complex rjj = packed(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

DensityMatrix random_pure_state(Eigen::Index d, RngStream& rng) {
  if (d < 1) throw DimensionError("random_pure_state: d must be positive");
  const ComplexVector psi = random_unit_vector(d, rng);
  ComplexMatrix rho = psi * psi.adjoint();
  rho = hermitian_part(rho);
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

DensityMatrix random_rank_r_state(Eigen::Index d, Eigen::Index r, RngStream& rng,
                                  const std::optional<RealVector>& spectrum) {
  if (r < 1 || r > d) throw DimensionError("random_rank_r_state: need 1 <= r <= d");
  RealVector weights = RealVector::Constant(r, 1.0 / static_cast<double>(r));
  if (spectrum) {
    if (spectrum->size() != r) throw DimensionError("random_rank_r_state: spectrum length != r");
    if ((spectrum->array() < 0.0).any() || spectrum->sum() <= 0.0) {
      throw std::invalid_argument("random_rank_r_state: spectrum must be non-negative");
    }
    weights = *spectrum / spectrum->sum();
  }
  const ComplexMatrix v = random_isometry(d, r, rng);
  ComplexMatrix rho = hermitian_part(v * weights.cast<Complex>().asDiagonal() * v.adjoint());
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

std::vector<Eigen::Index> random_support(Eigen::Index n, Eigen::Index s, RngStream& rng,
                                         Eigen::Index first) {
  const Eigen::Index pool_size = n - first;
  if (s < 0 || s > pool_size) throw std::invalid_argument("random_support: s out of range");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(pool_size));
  std::iota(pool.begin(), pool.end(), first);
  // Partial Fisher-Yates: the first s entries form a uniform s-subset.
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           rng.uniform_index(static_cast<std::uint64_t>(pool_size - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Eigen::Index> out(pool.begin(), pool.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

CalibrationVector random_calibration(const InstanceSpec& spec, RngStream& rng) {
  spec.validate();
  RealVector xi = RealVector::Zero(spec.n);
  const XiModel& model = spec.xi_model;
  if (model.kind == XiModel::Kind::kGaussianUnit) {
    for (Eigen::Index k : random_support(spec.n, spec.s, rng)) xi(k) = rng.normal();
    return CalibrationVector(std::move(xi));
  }
  xi(0) = 1.0;
  for (Eigen::Index k : random_support(spec.n, spec.s - 1, rng, 1)) {
    xi(k) = model.kind == XiModel::Kind::kLeadingOneScaled ? model.scale * rng.normal()
                                                           : rng.normal(model.mean, model.stddev);
  }
  return CalibrationVector(std::move(xi));
}

BlockSignal assemble_signal(const CalibrationVector& xi, const DensityMatrix& rho) {
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(xi.size()));
  for (Eigen::Index k = 0; k < xi.size(); ++k) blocks.push_back(xi[k] * rho.matrix());
  if (blocks.empty()) throw DimensionError("assemble_signal: empty calibration vector");
  return BlockSignal(std::move(blocks));
}

DensityMatrix project_to_density_matrix(const ComplexMatrix& a) {
  const HermitianEig eig = eig_hermitian(a);
  const RealVector& u = eig.eigenvalues;  // descending
  const Eigen::Index d = u.size();
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumulative += u(j);
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u(j) - candidate > 0.0) theta = candidate;
  }
  RealVector w = (u.array() - theta).max(0.0);
  w /= w.sum();
  return DensityMatrix(hermitian_part(eig.reconstruct(w)));
}

StateEstimate extract_estimate(const BlockSignal& x, Eigen::Index reference_block) {
  if (reference_block < 0 || reference_block >= x.n()) {
    throw DimensionError("extract_estimate: reference block out of range");
  }
  const double ref_trace = x.block(reference_block).trace().real();
  if (std::abs(ref_trace) <= 1e-12) {
    throw DegenerateEstimateError("extract_estimate: reference block has vanishing trace");
  }
  RealVector xi(x.n());
  for (Eigen::Index k = 0; k < x.n(); ++k) xi(k) = x.block(k).trace().real();
  return {project_to_density_matrix(x.block(reference_block) / ref_trace),
          CalibrationVector(std::move(xi))};
}

BlockSignal random_omega_hat_signal(Eigen::Index n, Eigen::Index d, Eigen::Index s,
                                    Eigen::Index r, RngStream& rng) {
  BlockSignal x(n, d);
  for (Eigen::Index k : random_support(n, s, rng)) {
    const DensityMatrix state = random_rank_r_state(d, r, rng);
    x.block(k) = rng.normal() * state.matrix();
  }
  const double norm = x.frobenius_norm();
  return norm > 0.0 ? (1.0 / norm) * x : x;
}

}  // namespace blindtomo
