#include <gtest/gtest.h>

#include <cmath>

#include "cmoe/entropy_norms.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/gaussian_states.hpp"
#include "oracles.hpp"

using namespace cmoe;

TEST(G, MatchesDirectFormula) {
  for (double e : {1e-6, 0.01, 0.5, 1.0, 2.0, 10.0, 1e3}) EXPECT_NEAR(g(e), oracle::g_direct(e), 1e-12 * (1 + g(e)));
  EXPECT_EQ(g(0.0), 0.0);
  EXPECT_NEAR(g(1.0), 2.0 * std::log(2.0), 1e-15);
  EXPECT_THROW(g(-0.1), DomainError);
}

TEST(G, LargeEnergyAsymptotics) {
  // g(E) = ln E + 1 + 1/(2E) + O(1/E^2)
  const double e = 1e8;
  EXPECT_NEAR(g(e), std::log(e) + 1.0 + 0.5 / e, 1e-12);
}

TEST(G, DerivativeMatchesFiniteDifference) {
  for (double e : {0.1, 1.0, 5.0}) {
    const double h = 1e-6 * e;
    EXPECT_NEAR(g_prime(e), (g(e + h) - g(e - h)) / (2 * h), 1e-7);
  }
}

TEST(G, InverseRoundTrip) {
  for (double e : {1e-9, 1e-4, 0.3, 1.0, 7.0, 1e4}) EXPECT_NEAR(g_inv(g(e)), e, 1e-10 * std::max(1.0, e));
  for (double s : {0.01, 0.5, 1.3862943611198906, 4.0}) {
    EXPECT_NEAR(g_inv(s), oracle::g_inv_bisect(s), 1e-12 * std::max(1.0, g_inv(s)));
  }
  EXPECT_EQ(g_inv(0.0), 0.0);
  EXPECT_THROW(g_inv(-1.0), DomainError);
}

TEST(Thermal, ZParametrisation) {
  EXPECT_DOUBLE_EQ(z_of_E(1.0), 0.5);
  EXPECT_DOUBLE_EQ(E_of_z(0.5), 1.0);
  EXPECT_THROW(E_of_z(1.0), DomainError);
  const auto t = ThermalParams::from_entropy(g(2.0));
  EXPECT_NEAR(t.energy, 2.0, 1e-12);
  EXPECT_NEAR(t.z, 2.0 / 3.0, 1e-12);
}

TEST(Thermal, StateMomentsAndEntropy) {
  const double e = 1.5;
  const auto w = thermal_state(e, 120);
  double mean = 0.0;
  for (std::size_t n = 0; n < w.cutoff(); ++n) mean += n * w.probs()[n];
  EXPECT_NEAR(mean, e, 1e-9);
  EXPECT_NEAR(w.total() + w.trace_deficit(), 1.0, 1e-14);
  EXPECT_NEAR(von_neumann_entropy(w), g(e), 1e-9);
  EXPECT_NEAR(oracle::shannon(w.probs()), g(e), 1e-9);
}

TEST(Thermal, VacuumAndCutoffRule) {
  const auto w = thermal_state(0.0, 4);
  EXPECT_EQ(w.probs()[0], 1.0);
  EXPECT_EQ(w.trace_deficit(), 0.0);
  const std::size_t k = thermal_cutoff_for(1.0, 1e-9);
  EXPECT_LE(std::pow(0.5, k), 1e-9);
  EXPECT_GT(std::pow(0.5, k - 1), 1e-9);
}
