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

#include "blindtomo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace blindtomo {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
}

ComplexMatrix HermitianEig::reconstruct(const RealVector& values) const {
  if (values.size() != eigenvectors.cols()) {
    throw DimensionError("reconstruct: spectrum length does not match basis");
  }
  return eigenvectors * values.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

HermitianEig eig_hermitian(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("eig_hermitian: matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", expected square");
  }
  const Eigen::Index d = a.rows();
  HermitianEig out;
  if (d == 0) {
    out.eigenvalues.resize(0);
    out.eigenvectors.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver did not converge");
  }
  // Eigen returns ascending order; a stable sort keeps the factorization's
  // order among ties.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const RealVector& ascending = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return ascending(i) > ascending(j);
  });
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.eigenvalues(k) = ascending(order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

Complex frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("frobenius_inner: shape mismatch");
  }
  // Tr(a^dagger b) = sum_ij conj(a_ij) b_ij
  return (a.array().conjugate() * b.array()).sum();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermitian_part: matrix not square");
  return (a + a.adjoint()) * 0.5;
}

double hermiticity_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

void hvec_into(const ComplexMatrix& a, Eigen::Ref<RealVector> out) {
  const Eigen::Index d = a.rows();
  if (a.cols() != d || out.size() != d * d) throw DimensionError("hvec: shape mismatch");
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < d; ++i) out(pos++) = a(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      // Average the two triangles so slightly non-Hermitian input maps to its
      // Hermitian part.
      const Complex z = 0.5 * (a(i, j) + std::conj(a(j, i)));
      out(pos++) = kSqrt2 * z.real();
      out(pos++) = kSqrt2 * z.imag();
    }
  }
}

RealVector hvec(const ComplexMatrix& a) {
  RealVector out(a.rows() * a.rows());
  hvec_into(a, out);
  return out;
}

ComplexMatrix hmat(const Eigen::Ref<const RealVector>& v, Eigen::Index d) {
  if (v.size() != d * d) throw DimensionError("hmat: vector length is not d^2");
  ComplexMatrix a(d, d);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < d; ++i) a(i, i) = Complex(v(pos++), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double re = v(pos++) / kSqrt2;
      const double im = v(pos++) / kSqrt2;
      a(i, j) = Complex(re, im);
      a(j, i) = Complex(re, -im);
    }
  }
  return a;
}

}  // namespace blindtomo
