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

// Dense complex linear algebra used throughout the library. Matrices are
// Eigen dense types; everything here is a pure function.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace blindtomo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
/// Column k of `eigenvectors` belongs to `eigenvalues(k)`.
struct HermitianEig {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  /// U diag(values) U^dagger for an arbitrary spectrum on the same basis.
  ComplexMatrix reconstruct(const RealVector& values) const;
  ComplexMatrix reconstruct() const { return reconstruct(eigenvalues); }
};

/// Full-spectrum eigendecomposition. The input is symmetrized as (a + a^dagger)/2
/// first, so small floating-point asymmetry is absorbed.
HermitianEig eig_hermitian(const ComplexMatrix& a);

/// Hilbert-Schmidt inner product Tr(a^dagger b).
Complex frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// (a + a^dagger) / 2
ComplexMatrix hermitian_part(const ComplexMatrix& a);

/// Largest entrywise deviation from Hermiticity, |a - a^dagger|_max.
double hermiticity_defect(const ComplexMatrix& a);

/// Isometric real coordinates of a Hermitian d x d matrix (length d^2):
/// diagonal entries first, then sqrt(2) Re and sqrt(2) Im of the strict upper
/// triangle in row-major order. For Hermitian a, b:
///   hvec(a).dot(hvec(b)) == Re Tr(a^dagger b).
RealVector hvec(const ComplexMatrix& a);
void hvec_into(const ComplexMatrix& a, Eigen::Ref<RealVector> out);

/// Inverse of hvec.
ComplexMatrix hmat(const Eigen::Ref<const RealVector>& v, Eigen::Index d);

}  // namespace blindtomo
