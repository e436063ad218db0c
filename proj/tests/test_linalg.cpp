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

#include "blindtomo/linalg.hpp"
#include "test_util.hpp"

namespace blindtomo {
namespace {

using testing::diag;
using testing::random_hermitian;

const Complex kI(0.0, 1.0);

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix pauli_z() { return diag({1, -1}); }

TEST(EigHermitian, IdentityHasUnitEigenvalues) {
  const HermitianEig e = eig_hermitian(ComplexMatrix::Identity(2, 2));
  EXPECT_NEAR(e.eigenvalues(0), 1.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), 1.0, 1e-14);
  EXPECT_LT((e.eigenvectors.adjoint() * e.eigenvectors - ComplexMatrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(EigHermitian, DiagonalInputSortedDescending) {
  const HermitianEig e = eig_hermitian(diag({-1, 3}));
  EXPECT_NEAR(e.eigenvalues(0), 3.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), -1.0, 1e-14);
  // Eigenvectors are the standard basis up to phase, permuted.
  EXPECT_NEAR(std::abs(e.eigenvectors(1, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(e.eigenvectors(0, 1)), 1.0, 1e-12);
}

TEST(EigHermitian, PauliX) {
  // det(X - t) = t^2 - 1
  const HermitianEig e = eig_hermitian(pauli_x());
  EXPECT_NEAR(e.eigenvalues(0), 1.0, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), -1.0, 1e-14);
}

TEST(EigHermitian, NonSquareThrows) {
  EXPECT_THROW(eig_hermitian(ComplexMatrix::Zero(2, 3)), DimensionError);
}

TEST(EigHermitian, SymmetrizesSmallAsymmetry) {
  ComplexMatrix a = diag({2, 1});
  a(0, 1) = 1e-13;
  const HermitianEig e = eig_hermitian(a);
  EXPECT_LT((e.reconstruct() - hermitian_part(a)).norm(), 1e-12);
}

TEST(EigHermitian, RandomReconstructionProperty) {
  RngStream rng(101);
  for (int t = 0; t < 1000; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.uniform_index(16));
    const ComplexMatrix a = random_hermitian(d, rng);
    const HermitianEig e = eig_hermitian(a);
    ASSERT_LE((e.reconstruct() - a).norm(), 1e-10 * std::max(1.0, a.norm())) << "d=" << d;
    ASSERT_LE((e.eigenvectors.adjoint() * e.eigenvectors - ComplexMatrix::Identity(d, d)).norm(), 1e-10);
    ASSERT_NEAR(e.eigenvalues.sum(), a.trace().real(), 1e-10 * std::max(1.0, a.norm()));
    for (Eigen::Index i = 1; i < d; ++i) ASSERT_GE(e.eigenvalues(i - 1), e.eigenvalues(i));
  }
}

TEST(FrobeniusInner, Examples) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  EXPECT_NEAR(std::abs(frobenius_inner(id, id) - Complex(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(frobenius_inner(pauli_x(), pauli_z())), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(frobenius_inner(pauli_x(), pauli_x()) - Complex(2.0)), 0.0, 1e-15);
}

TEST(FrobeniusInner, ConjugateSymmetricAndAntilinearInFirst) {
  RngStream rng(7);
  for (int t = 0; t < 50; ++t) {
    ComplexMatrix a(3, 4), b(3, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) = Complex(rng.normal(), rng.normal());
      b(i) = Complex(rng.normal(), rng.normal());
    }
    EXPECT_NEAR(std::abs(frobenius_inner(a, b) - std::conj(frobenius_inner(b, a))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(frobenius_inner(kI * a, b) - std::conj(kI) * frobenius_inner(a, b)), 0.0, 1e-12);
    EXPECT_NEAR(frobenius_inner(a, a).imag(), 0.0, 1e-12);
    EXPECT_GE(frobenius_inner(a, a).real(), 0.0);
  }
}

TEST(FrobeniusInner, ShapeMismatchThrows) {
  EXPECT_THROW(frobenius_inner(ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(3, 3)), DimensionError);
}

TEST(Kron, Examples) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  EXPECT_LT((kron(id, pauli_z()) - diag({1, -1, 1, -1})).norm(), 1e-15);
  EXPECT_LT((kron(pauli_z(), pauli_z()) - diag({1, -1, -1, 1})).norm(), 1e-15);
  ComplexMatrix c(1, 1);
  c(0, 0) = Complex(2.0, -1.0);
  EXPECT_LT((kron(pauli_x(), c) - c(0, 0) * pauli_x()).norm(), 1e-15);
}

TEST(Kron, ShapeAndNormMultiply) {
  RngStream rng(9);
  for (int t = 0; t < 50; ++t) {
    ComplexMatrix a(2, 3), b(4, 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = Complex(rng.normal(), rng.normal());
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = Complex(rng.normal(), rng.normal());
    const ComplexMatrix k = kron(a, b);
    EXPECT_EQ(k.rows(), 8);
    EXPECT_EQ(k.cols(), 3);
    EXPECT_NEAR(k.norm(), a.norm() * b.norm(), 1e-12);
  }
}

TEST(Hvec, IsometricAndInvertible) {
  RngStream rng(11);
  for (int t = 0; t < 100; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.uniform_index(6));
    const ComplexMatrix a = random_hermitian(d, rng);
    const ComplexMatrix b = random_hermitian(d, rng);
    const RealVector va = hvec(a);
    ASSERT_EQ(va.size(), d * d);
    EXPECT_NEAR(va.norm(), a.norm(), 1e-12);
    EXPECT_NEAR(va.dot(hvec(b)), frobenius_inner(a, b).real(), 1e-10);
    EXPECT_LT((hmat(va, d) - a).norm(), 1e-12);
  }
}

TEST(Hermiticity, Defect) {
  ComplexMatrix a = diag({1, 2});
  EXPECT_EQ(hermiticity_defect(a), 0.0);
  a(0, 1) = 1.0;
  EXPECT_GT(hermiticity_defect(a), 0.1);
  EXPECT_EQ(hermiticity_defect(hermitian_part(a)), 0.0);
}

}  // namespace
}  // namespace blindtomo
