#include <gtest/gtest.h>

#include <cmath>

#include "cmoe/entropy_norms.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/gaussian_states.hpp"
#include "oracles.hpp"

using namespace cmoe;

namespace {

DensityMatrix flat2() { return DiagonalState({0.5, 0.5}).to_density(); }

}  // namespace

TEST(VonNeumann, Examples) {
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::fock(0, 4)), 0.0, 1e-14);
  EXPECT_NEAR(von_neumann_entropy(flat2()), std::log(2.0), 1e-15);
  EXPECT_NEAR(von_neumann_entropy(thermal_state(1.0, 128)), 2.0 * std::log(2.0), 1e-9);
}

TEST(VonNeumann, NeverNegative) {
  ComplexVector psi = ComplexVector::Ones(6) / std::sqrt(6.0);
  EXPECT_GE(von_neumann_entropy(DensityMatrix::pure(psi)), 0.0);
}

TEST(VonNeumann, AgreesWithCharacteristicPolynomial) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = oracle::random_density(5, seed);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix(m)), oracle::shannon(oracle::charpoly_eigenvalues(m)), 1e-9);
  }
}

TEST(Schatten, Examples) {
  for (double a : {1.1, 2.0, 5.0}) EXPECT_NEAR(schatten_norm(DensityMatrix::fock(2, 5), a), 1.0, 1e-14);
  EXPECT_NEAR(schatten_norm(flat2(), 2.0), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(schatten_norm(flat2(), 1.0), DomainError);
}

TEST(Schatten, ThermalClosedForm) {
  const double z = 0.5, p = 1.2;
  const auto w = thermal_state(E_of_z(z), thermal_cutoff_for(E_of_z(z), 1e-16, 2));
  EXPECT_NEAR(log_schatten_norm(spectrum_of(w), p), std::log(1 - z) - std::log(1 - std::pow(z, p)) / p, 1e-10);
  EXPECT_NEAR(thermal_log_schatten_norm(z, p), std::log(1 - z) - std::log(1 - std::pow(z, p)) / p, 1e-15);
}

TEST(Schatten, MonotoneInAlpha) {
  const auto s = spectrum_of(DensityMatrix(oracle::random_density(6, 11)));
  double prev = 1.0 + 1e-15;
  for (double a : {1.01, 1.3, 2.0, 4.0, 10.0}) {
    const double v = schatten_norm(s, a);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Renyi, Examples) {
  EXPECT_NEAR(renyi_entropy(DensityMatrix::fock(0, 3), 1.5), 0.0, 1e-14);
  EXPECT_NEAR(renyi_entropy(flat2(), 2.0), std::log(2.0), 1e-15);
  const auto w = thermal_state(1.0, 128);
  double prev = 0.0;
  for (double a : {1.5, 1.1, 1.01}) {
    const double s = renyi_entropy(w, a);
    EXPECT_GT(s, prev);
    EXPECT_LE(s, 2.0 * std::log(2.0));
    EXPECT_NEAR(s, thermal_renyi_entropy(1.0, a), 1e-9);
    prev = s;
  }
}

TEST(Distances, Examples) {
  const auto r = DensityMatrix(oracle::random_density(4, 5));
  EXPECT_NEAR(trace_distance(r, r), 0.0, 1e-14);
  EXPECT_NEAR(trace_distance(DensityMatrix::fock(0, 3), DensityMatrix::fock(1, 3)), 1.0, 1e-14);
  EXPECT_NEAR(trace_distance(DiagonalState({1.0, 0.0}).to_density(), flat2()), 0.5, 1e-15);
  EXPECT_THROW(trace_distance(DensityMatrix::fock(0, 3), DensityMatrix::fock(0, 4)), InvalidArgument);
}

TEST(Distances, SpectralBoundsTrace) {
  // Sorted spectra are closer than the states themselves (Lidskii).
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const auto a = DensityMatrix(oracle::random_density(5, seed));
    const auto b = DensityMatrix(oracle::random_density(5, seed + 100));
    EXPECT_LE(0.5 * spectral_distance(spectrum_of(a), spectrum_of(b)), trace_distance(a, b) + 1e-12);
  }
}
