#include <gtest/gtest.h>

#include <cmath>

#include "cmoe/channels.hpp"
#include "cmoe/entropy_norms.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/lemma_lab.hpp"

using namespace cmoe;

TEST(Phi, Limits) {
  for (double z : {0.2, 0.5, 0.8}) EXPECT_EQ(phi(z, 1.0), 0.0);
  EXPECT_NEAR(phi(1e-12, 1.3), 1.0, 1e-3);
  for (double p : {1.2, 1.4}) EXPECT_NEAR(phi(1.0 - 1e-9, p), 1.0 - 1.0 / p, 1e-6);
  EXPECT_THROW(phi(1.0, 1.2), DomainError);
}

TEST(Psi, SignsAndLimits) {
  for (double z : {0.1, 0.5, 0.9}) EXPECT_NEAR(psi(z, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(psi(1.0 - 1e-6, 1.3), 0.0, 1e-5);
  EXPECT_GT(psi(0.5, 1.4), 0.0);
  EXPECT_LT(psi(0.7, 1.4), psi(0.5, 1.4));
}

TEST(F, Monotonicity) {
  EXPECT_GT(f_func(0.5, 1.2), f_func(0.6, 1.2));
  EXPECT_GT(f_func(0.5, 1.2), f_func(0.5, 1.4));
  EXPECT_GT(f_func(0.5, 1.25), 0.0);
  const double z = 0.3, zp = amplifier_z_map(z, 1.5);
  EXPECT_LT(f_func(zp, 1.4), f_func(z, 1.2));
}

TEST(F, ClosedFormDerivativeMatchesFiniteDifference) {
  for (double z : {0.2, 0.5, 0.8})
    for (double p : {1.1, 1.3}) {
      const double h = 1e-6;
      EXPECT_NEAR(df_dp(z, p), (f_func(z, p + h) - f_func(z, p - h)) / (2 * h), 1e-6);
      EXPECT_LT(df_dp(z, p), df_dp_upper(z, p));
    }
}

TEST(ElementaryInequalities, Examples) {
  EXPECT_NEAR(-0.25 * std::log(0.25) / 0.75, 0.46209812037329684, 1e-15);
  EXPECT_LT(-0.25 * std::log(0.25) / 0.75, std::sqrt(0.25));
  for (double x = 0.01; x < 1.0; x += 0.01) EXPECT_LT(std::log1p(-x), -x - 0.5 * x * x);
}

TEST(ZMap, Examples) {
  EXPECT_DOUBLE_EQ(amplifier_z_map(0.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(amplifier_z_map(0.37, 1.0), 0.37);
  EXPECT_DOUBLE_EQ(amplifier_z_map(0.5, 2.0), 0.75);
}

TEST(ZMap, AmplifierSpectrumHasMappedRatio) {
  const auto w = thermal_state(E_of_z(0.5), 60);
  const auto out = apply_diagonal(ChannelSpec::amplifier(2.0), w);
  for (std::size_t n = 0; n + 1 < 20; ++n) EXPECT_NEAR(out.probs()[n + 1] / out.probs()[n], 0.75, 1e-9);
}

TEST(NormRatio, MatchesPipeline) {
  const double z = 0.4, kappa = 2.0, p = 1.2, q = 1.3;
  const auto w = thermal_state(E_of_z(z), thermal_cutoff_for(E_of_z(z), 1e-13, 2));
  const auto out = apply_channel(ChannelSpec::amplifier(kappa), w.to_density());
  const double pipeline = schatten_norm(spectrum_of(out), q) / schatten_norm(spectrum_of(w), p);
  EXPECT_NEAR(thermal_norm_ratio(z, kappa, p, q), pipeline, 1e-7);
}

TEST(NormRatio, LogDerivativeIdentity) {
  for (double z : {0.1, 0.4, 0.7, 0.95}) {
    const double h = 1e-5 * std::min(z, 1 - z);
    const double fd = (log_thermal_norm_ratio(z + h, 2.0, 1.2, 1.3) - log_thermal_norm_ratio(z - h, 2.0, 1.2, 1.3)) / (2 * h);
    EXPECT_NEAR(fd, dlog_ratio_dz(z, 2.0, 1.2, 1.3), 1e-6);
  }
  double prev = 0.0;
  for (int k = 2; k <= 8; ++k) {
    const double d = dlog_ratio_dz(1.0 - std::pow(10.0, -k), 2.0, 1.2, 1.3);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(PofQ, RootAndMaximiser) {
  const auto c = certify_p_of_q(0.5, 2.0, 1.3);
  EXPECT_NEAR(phi(0.5, c.solution.p), phi(0.75, 1.3), 1e-12);
  EXPECT_TRUE(c.in_interval());
  EXPECT_TRUE(c.maximizer_ok());
  EXPECT_TRUE(c.unique_stationary());
  EXPECT_TRUE(c.prefactor_ok());
}

TEST(PofQ, TendsToOne) {
  double prev = 1.0;
  for (double q : {1.1, 1.01, 1.001}) {
    const double p = solve_p_of_q(0.5, 2.0, q).p;
    EXPECT_GT(p, 1.0);
    EXPECT_LT(p - 1.0, prev);
    prev = p - 1.0;
  }
}

TEST(Grid, SmallGridPasses) {
  LemmaGrid g;
  g.z_points = 39;
  g.pq_points = 6;
  const auto rep = verify_lemma_inequalities(g);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.points, 39u * 15u * g.kappas.size());
}

TEST(Grid, ScopeRule) {
  LemmaGrid g;
  g.pq_hi = 1.6;
  EXPECT_THROW(g.validate(), InvalidArgument);
  g.exploratory = true;
  EXPECT_NO_THROW(g.validate());
}

TEST(Saturation, VacuumAndRandomBelowThermalMax) {
  const auto rep = pq_norm_saturation_probe(2.0, 1.2, 1.35, 12, 40, 17);
  EXPECT_TRUE(rep.passed());
  EXPECT_LE(rep.vacuum_ratio, rep.thermal_max);
  const double zs = rep.z_star;
  const auto w = thermal_state(E_of_z(zs), thermal_cutoff_for(E_of_z(zs), 1e-13, 2));
  const auto t = saturation_ratio(w.to_density(), 2.0, 1.2, 1.35);
  EXPECT_NEAR(t.ratio, rep.thermal_max, 1e-7);
}
