#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "cmoe/channels.hpp"
#include "cmoe/entropy_norms.hpp"
#include "oracles.hpp"

using namespace cmoe;

namespace {

double thermal_gap(const DiagonalState& out, double predicted) {
  const auto ref = thermal_state(predicted, std::max<std::size_t>(out.cutoff(), 400));
  return spectral_distance(spectrum_of(out), spectrum_of(ref));
}

DiagonalState thermal_input(double e) { return thermal_state(e, thermal_cutoff_for(e, 1e-12, 2)); }

}  // namespace

TEST(ChannelSpec, Validation) {
  EXPECT_THROW(ChannelSpec::attenuator(1.2), DomainError);
  EXPECT_THROW(ChannelSpec::amplifier(0.5), DomainError);
  EXPECT_THROW(ChannelSpec::additive_noise(-1.0), DomainError);
  ChannelSpec bad{ChannelKind::Attenuator, std::nullopt, 2.0, 0.0};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_EQ(channel_kind_from_string("contravariant"), ChannelKind::ContravariantAmplifier);
  EXPECT_THROW(channel_kind_from_string("nope"), InvalidArgument);
}

TEST(ThermalLaws, Attenuator) {
  const auto spec = ChannelSpec::attenuator(0.3, 1.0);
  const auto out = apply_diagonal(spec, thermal_input(2.0));
  EXPECT_NEAR(thermal_output_energy(spec, 2.0), 1.3, 1e-15);
  EXPECT_LT(thermal_gap(out, 1.3), 1e-9);
}

TEST(ThermalLaws, AmplifierOnVacuum) {
  const auto spec = ChannelSpec::amplifier(2.0);
  const auto out = apply_diagonal(spec, DiagonalState({1.0}));
  EXPECT_LT(thermal_gap(out, 1.0), 1e-9);
}

TEST(ThermalLaws, AmplifierThermalEnvironment) {
  const auto spec = ChannelSpec::amplifier(1.5, 1.0);
  const auto out = apply_diagonal(spec, thermal_input(0.5));
  EXPECT_LT(thermal_gap(out, thermal_output_energy(spec, 0.5)), 1e-8);
}

TEST(ThermalLaws, AdditiveNoise) {
  const auto spec = ChannelSpec::additive_noise(0.5);
  const auto out = apply_diagonal(spec, thermal_input(1.0));
  EXPECT_LT(thermal_gap(out, 1.5), 1e-8);
}

TEST(ThermalLaws, Contravariant) {
  const auto spec = ChannelSpec::contravariant(2.0, 1.0);
  const auto out = apply_diagonal(spec, thermal_input(0.5));
  EXPECT_NEAR(thermal_output_energy(spec, 0.5), 3.5, 1e-15);
  EXPECT_LT(thermal_gap(out, 3.5), 1e-8);
}

TEST(Channels, BlockRouteMatchesDenseRoute) {
  const DensityMatrix rho(oracle::random_density(4, 7));
  {
    const auto spec = ChannelSpec::attenuator(0.6, 0.4);
    const auto fast = apply_channel(spec, rho, {.d_env = 3, .max_deficit = 0.1});
    const auto slow = apply_channel_dense(spec, rho, {0, 0, 3, 0});
    ASSERT_EQ(fast.dim(), slow.dim());
    EXPECT_LT((fast.matrix() - slow.matrix()).cwiseAbs().maxCoeff(), 1e-13);
  }
  for (bool contra : {false, true}) {
    const auto spec = contra ? ChannelSpec::contravariant(1.5, 0.3) : ChannelSpec::amplifier(1.5, 0.3);
    const std::size_t box = 24, pad = 40;
    ChannelOptions opt;
    opt.d_env = 3;
    opt.d_out = 12;
    opt.pad = pad;
    opt.max_deficit = 0.1;
    const auto fast = apply_channel(spec, rho, opt);
    DenseDilationOptions dopt{box + (contra ? 4 : 0), box + (contra ? 0 : 3), 3, pad};
    const auto slow = apply_channel_dense(spec, rho, dopt);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(std::abs(fast(i, j) - slow(i, j)), 0.0, 1e-12);
  }
}

TEST(Channels, PhaseCovarianceOfMap) {
  // Coherence |0><1| goes to the a - a' = -1 diagonal (covariant) or +1
  // diagonal (contravariant).
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = m(1, 1) = m(0, 1) = m(1, 0) = 0.5;
  const DensityMatrix plus(m);
  const auto amp = apply_channel(ChannelSpec::amplifier(1.5), plus);
  const auto con = apply_channel(ChannelSpec::contravariant(1.5), plus);
  EXPECT_GT(std::abs(amp(0, 1)), 0.1);
  EXPECT_LT(std::abs(amp(1, 0) - std::conj(amp(0, 1))), 1e-15);
  EXPECT_EQ(amp(0, 2), cplx(0.0));
  EXPECT_GT(std::abs(con(1, 0)), 0.05);
}

TEST(Channels, TracePreservedUpToDeficit) {
  const DensityMatrix rho(oracle::random_density(10, 8));
  for (const auto& spec : {ChannelSpec::attenuator(0.4, 1.0), ChannelSpec::amplifier(2.0, 1.0),
                           ChannelSpec::additive_noise(1.0), ChannelSpec::contravariant(1.5, 0.5)}) {
    const auto out = apply_channel(spec, rho);
    EXPECT_LT(out.trace_deficit(), 1e-9) << spec.describe();
    EXPECT_NO_THROW(out.validate());
    EXPECT_NEAR(out.matrix().diagonal().real().dot(Eigen::VectorXd::LinSpaced(out.dim(), 0, out.dim() - 1)),
                thermal_output_energy(spec, rho.matrix().diagonal().real().dot(Eigen::VectorXd::LinSpaced(10, 0, 9))),
                1e-7)
        << spec.describe();
  }
}

TEST(Channels, DecompositionIdentity) {
  const DensityMatrix rho(oracle::random_density(8, 9));
  const auto att = ChannelSpec::attenuator(0.3, 0.5);
  const auto d = decompose(att);
  const auto lhs = apply_channel(att, rho);
  const auto rhs = apply_channel(ChannelSpec::amplifier(d.kappa_prime), apply_channel(ChannelSpec::attenuator(d.lambda_prime), rho));
  const auto n = std::max(lhs.dim(), rhs.dim());
  EXPECT_LT(trace_distance(lhs.embedded(n), rhs.embedded(n)), 1e-8);

  const auto amp = ChannelSpec::amplifier(1.5, 1.0);
  const auto d2 = decompose(amp);
  const auto lhs2 = apply_channel(amp, rho);
  const auto rhs2 =
      apply_channel(ChannelSpec::amplifier(d2.kappa_dprime), apply_channel(ChannelSpec::attenuator(d2.lambda_dprime), rho));
  const auto n2 = std::max(lhs2.dim(), rhs2.dim());
  EXPECT_LT(trace_distance(lhs2.embedded(n2), rhs2.embedded(n2)), 1e-8);
  EXPECT_THROW(decompose(ChannelSpec::additive_noise(1.0)), InvalidArgument);
}

TEST(Channels, AttenuatorSemigroup) {
  const DensityMatrix rho(oracle::random_density(6, 10));
  const auto once = apply_channel(ChannelSpec::attenuator(0.3), rho);
  const auto twice = apply_channel(ChannelSpec::attenuator(0.6), apply_channel(ChannelSpec::attenuator(0.5), rho));
  EXPECT_LT(trace_distance(once, twice), 1e-12);
}

TEST(Channels, TruncationGuard) {
  ChannelOptions opt;
  opt.d_out = 3;
  EXPECT_THROW(apply_channel(ChannelSpec::amplifier(4.0), DensityMatrix::fock(2, 3), opt), TruncationError);
}
