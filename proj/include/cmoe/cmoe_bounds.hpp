#pragma once

// Lower bounds on the output entropy at fixed input entropy, and the verdict
// engine that compares a simulated channel output against them.

#include <cmath>
#include <optional>
#include <string>

#include "cmoe/channels.hpp"
#include "cmoe/entropy_norms.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/gaussian_states.hpp"

namespace cmoe {

inline constexpr double kEqualityTol = 1e-6;
inline constexpr double kViolationSlack = 1e-9;

namespace detail {

inline void require_entropy(double s, const char* who) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError(std::string(who) + ": entropy must be finite and >= 0");
}

inline void require_energy(double e, const char* who) {
  if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError(std::string(who) + ": E must be finite and >= 0");
}

}  // namespace detail

inline double bound_attenuator(double s, double lambda, double e) {
  detail::require_entropy(s, "bound_attenuator");
  detail::require_energy(e, "bound_attenuator");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("bound_attenuator: lambda must lie in [0, 1]");
  return g(lambda * g_inv(s) + (1.0 - lambda) * e);
}

inline double bound_amplifier(double s, double kappa, double e) {
  detail::require_entropy(s, "bound_amplifier");
  detail::require_energy(e, "bound_amplifier");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("bound_amplifier: kappa must be >= 1");
  return g(kappa * g_inv(s) + (kappa - 1.0) * (e + 1.0));
}

inline double bound_additive(double s, double e) {
  detail::require_entropy(s, "bound_additive");
  detail::require_energy(e, "bound_additive");
  return g(g_inv(s) + e);
}

inline double bound_contravariant(double s, double kappa, double e) {
  detail::require_entropy(s, "bound_contravariant");
  detail::require_energy(e, "bound_contravariant");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("bound_contravariant: kappa must be >= 1");
  return g((kappa - 1.0) * (g_inv(s) + 1.0) + kappa * e);
}

inline double cmoe_bound(const ChannelSpec& spec, double s) {
  spec.validate();
  switch (spec.kind) {
    case ChannelKind::Attenuator: return bound_attenuator(s, *spec.transmissivity, spec.env_energy);
    case ChannelKind::Amplifier: return bound_amplifier(s, *spec.gain, spec.env_energy);
    case ChannelKind::AdditiveNoise: return bound_additive(s, spec.env_energy);
    case ChannelKind::ContravariantAmplifier: return bound_contravariant(s, *spec.gain, spec.env_energy);
  }
  return 0.0;
}

// Binary entropy h(d) in nats.
inline double binary_entropy(double d) {
  if (d <= 0.0 || d >= 1.0) return 0.0;
  return -d * std::log(d) - (1.0 - d) * std::log1p(-d);
}

// Continuity slack for the entropy of a state truncated to `dim` levels with
// trace deficit d: d ln(dim) + h(d).
inline double entropy_truncation_margin(double deficit, std::size_t dim) {
  if (deficit <= 0.0) return 0.0;
  return deficit * std::log(static_cast<double>(std::max<std::size_t>(dim, 2))) + binary_entropy(deficit);
}

enum class Verdict { Satisfied, Equality, ViolationCandidate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Equality: return "equality";
    case Verdict::ViolationCandidate: return "violation_candidate";
  }
  return "?";
}

inline Verdict classify(double gap, double margin) {
  if (gap < -margin - kViolationSlack) return Verdict::ViolationCandidate;
  if (std::abs(gap) <= std::max(kEqualityTol, margin)) return Verdict::Equality;
  return Verdict::Satisfied;
}

struct CmoeReport {
  ChannelSpec channel;
  double input_entropy = 0.0;
  double output_entropy = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double truncation_margin = 0.0;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  double input_deficit = 0.0;
  double output_deficit = 0.0;
  std::optional<Verdict> verdict;  // empty when the channel output could not be formed
  std::string error;
};

namespace detail {

inline void require_input_deficit(double deficit) {
  if (deficit > 1e-4) {
    throw InvalidArgument("check_cmoe: input trace deficit " + std::to_string(deficit) + " exceeds 1e-4");
  }
}

template <class State, class Apply>
CmoeReport run_cmoe(const ChannelSpec& spec, const State& rho, std::size_t in_dim, double input_entropy, Apply&& apply) {
  spec.validate();
  detail::require_input_deficit(rho.trace_deficit());
  CmoeReport r;
  r.channel = spec;
  r.input_dim = in_dim;
  r.input_deficit = rho.trace_deficit();
  r.input_entropy = input_entropy;
  r.bound = cmoe_bound(spec, r.input_entropy);
  try {
    const auto out = apply();
    r.output_dim = out.dim_or_cutoff;
    r.output_deficit = out.deficit;
    r.output_entropy = out.entropy;
  } catch (const TruncationError& e) {
    r.error = e.what();
    return r;
  }
  r.gap = r.output_entropy - r.bound;
  r.truncation_margin = entropy_truncation_margin(r.input_deficit, r.input_dim) +
                        entropy_truncation_margin(r.output_deficit, r.output_dim);
  r.verdict = classify(r.gap, r.truncation_margin);
  return r;
}

struct OutputSummary {
  std::size_t dim_or_cutoff;
  double deficit;
  double entropy;
};

}  // namespace detail

// `input_entropy` lets sweeps that push one state through several channels
// diagonalise the input once.
inline CmoeReport check_cmoe(const ChannelSpec& spec, const DensityMatrix& rho, double input_entropy,
                             const ChannelOptions& opt = {}) {
  return detail::run_cmoe(spec, rho, rho.dim(), input_entropy, [&] {
    const auto out = apply_channel(spec, rho, opt);
    return detail::OutputSummary{out.dim(), out.trace_deficit(), von_neumann_entropy(out)};
  });
}

inline CmoeReport check_cmoe(const ChannelSpec& spec, const DensityMatrix& rho, const ChannelOptions& opt = {}) {
  detail::require_input_deficit(rho.trace_deficit());
  return check_cmoe(spec, rho, von_neumann_entropy(rho), opt);
}

inline CmoeReport check_cmoe(const ChannelSpec& spec, const DiagonalState& p, const ChannelOptions& opt = {}) {
  return detail::run_cmoe(spec, p, p.cutoff(), von_neumann_entropy(p), [&] {
    const auto out = apply_diagonal(spec, p, opt);
    return detail::OutputSummary{out.cutoff(), out.trace_deficit(), von_neumann_entropy(out)};
  });
}

// Three-step Renyi chain for the quantum-limited amplifier:
//   S(A(rho)) >= S_q(A(rho)) >= S_q(A(w)) + c (S_p(rho) - S_p(w)),
// c = q/(q-1) * (p-1)/p, w thermal with S(w) = S(rho). Thermal quantities are
// evaluated in closed form; only the rho side carries truncation slack.
struct RenyiChain {
  double kappa = 0.0, p = 0.0, q = 0.0;
  double s_out = 0.0;          // S(A(rho))
  double s_q_out = 0.0;        // S_q(A(rho))
  double s_q_thermal_out = 0.0;
  double s_p_in = 0.0;         // S_p(rho)
  double s_p_thermal = 0.0;
  double prefactor = 0.0;
  double rhs = 0.0;            // S_q(A(w)) + c (S_p(rho) - S_p(w))
  double margin_vn = 0.0;      // slack on S(A(rho))
  double margin_q = 0.0;       // slack on S_q(A(rho))
  double step1_gap() const { return s_out - s_q_out; }
  double step2_gap() const { return s_q_out - rhs; }
  bool holds() const {
    return step1_gap() >= -(margin_vn + kViolationSlack) && step2_gap() >= -(margin_q + kViolationSlack);
  }
};

inline RenyiChain renyi_chain(const DensityMatrix& rho, double kappa, double p, double q, const ChannelOptions& opt = {}) {
  if (!(1.0 < p && p < q)) throw DomainError("renyi_chain: need 1 < p < q");
  detail::require_input_deficit(rho.trace_deficit());
  RenyiChain c;
  c.kappa = kappa;
  c.p = p;
  c.q = q;
  const auto spec = ChannelSpec::amplifier(kappa);
  const auto out = apply_channel(spec, rho, opt);
  const auto s_out = spectrum_of(out);
  const auto s_in = spectrum_of(rho);
  c.s_out = von_neumann_entropy(s_out);
  c.s_q_out = renyi_entropy(s_out, q);
  c.s_p_in = renyi_entropy(s_in, p);
  const double e = g_inv(von_neumann_entropy(s_in));
  c.s_p_thermal = thermal_renyi_entropy(e, p);
  c.s_q_thermal_out = thermal_renyi_entropy(thermal_output_energy(spec, e), q);
  c.prefactor = q / (q - 1.0) * (p - 1.0) / p;
  c.rhs = c.s_q_thermal_out + c.prefactor * (c.s_p_in - c.s_p_thermal);
  const double d = out.trace_deficit();
  c.margin_vn = entropy_truncation_margin(d, out.dim()) + entropy_truncation_margin(rho.trace_deficit(), rho.dim());
  // ||X||_q <= ||P X P||_q + d for the untruncated output X.
  c.margin_q = q / (q - 1.0) * std::log1p(d / schatten_norm(s_out, q));
  return c;
}

}  // namespace cmoe
