#include <gtest/gtest.h>

#include <cmath>

#include "cmoe/errors.hpp"
#include "cmoe/fock_linalg.hpp"
#include "oracles.hpp"

using namespace cmoe;

TEST(DensityMatrix, FockStateIsValid) {
  const auto rho = DensityMatrix::fock(2, 5);
  EXPECT_EQ(rho.dim(), 5u);
  EXPECT_DOUBLE_EQ(rho.trace(), 1.0);
  EXPECT_DOUBLE_EQ(rho.trace_deficit(), 0.0);
  EXPECT_NO_THROW(rho.validate());
}

TEST(DensityMatrix, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{m}, InvalidArgument);
}

TEST(DensityMatrix, RejectsNonSquare) { EXPECT_THROW(DensityMatrix(ComplexMatrix::Zero(2, 3)), InvalidDimension); }

TEST(DensityMatrix, RecordsTraceDeficit) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 0.7;
  m(1, 1) = 0.2;
  const DensityMatrix rho(m);
  EXPECT_NEAR(rho.trace_deficit(), 0.1, 1e-15);
}

TEST(DensityMatrix, ValidateFlagsNegativeEigenvalue) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.1;
  m(1, 1) = -0.1;
  const DensityMatrix rho(m);
  EXPECT_THROW(rho.validate(), PositivityError);
}

TEST(DiagonalState, ClampsTinyNegatives) {
  const DiagonalState p({0.5, -1e-16, 0.5});
  EXPECT_EQ(p.probs()[1], 0.0);
  EXPECT_THROW(DiagonalState({0.5, -1e-3}), PositivityError);
}

TEST(Ladder, CommutatorAwayFromEdge) {
  const auto a = ladder(8).matrix;
  const ComplexMatrix c = a * a.adjoint() - a.adjoint() * a;
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(c(i, i).real(), 1.0, 1e-14);
  EXPECT_NEAR(c(7, 7).real(), -7.0, 1e-14);  // truncation artefact at the edge
  EXPECT_THROW(ladder(1), InvalidDimension);
}

TEST(Kron, MixedProductProperty) {
  const auto a = oracle::random_hermitian(3, 1), b = oracle::random_hermitian(4, 2);
  const auto c = oracle::random_hermitian(3, 3), d = oracle::random_hermitian(4, 4);
  const ComplexMatrix lhs = kron(a, b) * kron(c, d);
  const ComplexMatrix rhs = kron(a * c, b * d);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kron, ResourceGuard) {
  const ComplexMatrix a = ComplexMatrix::Identity(200, 200);
  EXPECT_THROW(kron(a, a), ResourceError);
}

TEST(PartialTrace, RecoversFactors) {
  const DensityMatrix a(oracle::random_density(3, 11)), b(oracle::random_density(5, 12));
  const auto ab = tensor(a, b);
  EXPECT_LT((partial_trace(ab.matrix(), 3, 5, Subsystem::A) - a.matrix()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((partial_trace(ab.matrix(), 3, 5, Subsystem::B) - b.matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PartialTrace, DimensionMismatch) {
  EXPECT_THROW(partial_trace(ComplexMatrix::Identity(6, 6), 4, 2, Subsystem::A), InvalidArgument);
}

TEST(Jacobi, TwoByTwoClosedForm) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = oracle::random_hermitian(2, 100 + s);
    const auto ours = hermitian_spectrum(m);
    const auto ref = oracle::eig2(m);
    EXPECT_NEAR(ours[0], ref[0], 1e-13);
    EXPECT_NEAR(ours[1], ref[1], 1e-13);
  }
}

TEST(Jacobi, CharacteristicPolynomialOracle) {
  for (int n = 3; n <= 4; ++n) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto m = oracle::random_hermitian(n, 200 + 10 * n + s);
      const auto ours = hermitian_spectrum(m);
      const auto ref = oracle::charpoly_eigenvalues(m);
      ASSERT_EQ(ref.size(), static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) EXPECT_NEAR(ours[i], ref[i], 1e-9);
    }
  }
}

TEST(Jacobi, EigenpairResidualAndOrthonormality) {
  for (int n : {1, 5, 17, 40}) {
    const auto m = oracle::random_hermitian(n, 300 + n);
    const auto eig = hermitian_eigen(m);
    ASSERT_EQ(eig.vectors.cols(), n);
    for (int i = 0; i < n; ++i) {
      const ComplexVector r = m * eig.vectors.col(i) - eig.values[i] * eig.vectors.col(i);
      EXPECT_LT(r.norm(), 1e-11 * std::max(1.0, m.norm()));
    }
    const ComplexMatrix gram = eig.vectors.adjoint() * eig.vectors;
    EXPECT_LT((gram - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 1; i < n; ++i) EXPECT_GE(eig.values[i - 1], eig.values[i]);
  }
}

TEST(Jacobi, TraceAndFrobeniusInvariants) {
  for (int n : {6, 24}) {
    const auto m = oracle::random_hermitian(n, 400 + n);
    const auto ev = hermitian_spectrum(m);
    double tr = 0.0, f2 = 0.0;
    for (double v : ev) {
      tr += v;
      f2 += v * v;
    }
    EXPECT_NEAR(tr, m.trace().real(), 1e-11);
    EXPECT_NEAR(f2, m.squaredNorm(), 1e-10 * m.squaredNorm());
  }
}

TEST(Jacobi, DegenerateAndDiagonalInputs) {
  ComplexMatrix m = ComplexMatrix::Identity(6, 6) * 0.25;
  const auto ev = hermitian_spectrum(m);
  for (double v : ev) EXPECT_DOUBLE_EQ(v, 0.25);
  EXPECT_TRUE(hermitian_spectrum(ComplexMatrix::Zero(3, 3)) == std::vector<double>(3, 0.0));
}

TEST(Jacobi, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(hermitian_spectrum(m), InvalidArgument);
}
