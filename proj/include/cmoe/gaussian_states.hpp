#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cmoe/errors.hpp"
#include "cmoe/fock_linalg.hpp"

namespace cmoe {

// Entropy (nats) of the thermal state with mean photon number E:
// g(E) = (E+1) ln(E+1) - E ln E.
inline double g(double energy) {
  if (!(energy >= 0.0)) throw DomainError("g: energy must be >= 0, got " + std::to_string(energy));
  if (energy == 0.0) return 0.0;
  if (energy < 1e-12) return energy * (1.0 - std::log(energy));
  // log1p forms avoid the cancellation between the two terms at large E.
  return std::log1p(energy) + energy * std::log1p(1.0 / energy);
}

// g'(E) = ln(1 + 1/E); diverges at E = 0.
inline double g_prime(double energy) {
  if (!(energy > 0.0)) throw DomainError("g_prime: energy must be > 0");
  return std::log1p(1.0 / energy);
}

// Inverse of g: bracket by doubling from E = 1, bisect, then polish with two
// Newton steps (Newton alone is unsafe near E = 0 where g' blows up).
inline double g_inv(double entropy) {
  if (!(entropy >= 0.0)) throw DomainError("g_inv: entropy must be >= 0, got " + std::to_string(entropy));
  if (std::isinf(entropy)) throw DomainError("g_inv: infinite entropy");
  if (entropy == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) < entropy) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 4000 && hi - lo > 1e-15 * std::max(hi, 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < entropy ? lo : hi) = mid;
  }
  double e = 0.5 * (lo + hi);
  for (int k = 0; k < 2 && e > 0.0; ++k) {
    const double next = e - (g(e) - entropy) / g_prime(e);
    if (next > 0.0 && std::isfinite(next)) e = next;
  }
  return e;
}

inline double z_of_E(double energy) {
  if (!(energy >= 0.0)) throw DomainError("z_of_E: energy must be >= 0");
  if (std::isinf(energy)) return 1.0;
  return energy / (energy + 1.0);
}

inline double E_of_z(double z) {
  if (!(z >= 0.0) || !(z < 1.0)) throw DomainError("E_of_z: z must lie in [0, 1), got " + std::to_string(z));
  return z / (1.0 - z);
}

// Thermal state described either by its mean photon number or by the
// geometric ratio z of its Fock spectrum.
struct ThermalParams {
  double energy = 0.0;
  double z = 0.0;

  static ThermalParams from_energy(double e) { return {e, z_of_E(e)}; }
  static ThermalParams from_z(double zz) { return {E_of_z(zz), zz}; }
  static ThermalParams from_entropy(double s) { return from_energy(g_inv(s)); }

  double entropy() const { return g(energy); }
};

// omega_E truncated to `cutoff` Fock levels. The lost tail mass z^cutoff is
// recorded as the trace deficit.
inline DiagonalState thermal_state(double energy, std::size_t cutoff) {
  if (cutoff < 1) throw InvalidDimension("thermal_state: cutoff must be >= 1");
  const double z = z_of_E(energy);
  std::vector<double> probs(cutoff, 0.0);
  double p = 1.0 / (energy + 1.0);
  for (std::size_t n = 0; n < cutoff; ++n) {
    probs[n] = p;
    p *= z;
  }
  return DiagonalState(std::move(probs), std::pow(z, static_cast<double>(cutoff)));
}

// Smallest cutoff whose thermal tail z^cutoff does not exceed `deficit`.
inline std::size_t thermal_cutoff_for(double energy, double deficit, std::size_t minimum = 1) {
  if (!(deficit > 0.0 && deficit < 1.0)) throw DomainError("thermal_cutoff_for: deficit must lie in (0, 1)");
  if (energy == 0.0) return minimum;
  const double z = z_of_E(energy);
  const double n = std::ceil(std::log(deficit) / std::log(z));
  return std::max(minimum, static_cast<std::size_t>(n));
}

// ln ||omega_z||_alpha = ln(1 - z) - ln(1 - z^alpha) / alpha, exact (no cutoff).
inline double thermal_log_schatten_norm(double z, double alpha) {
  if (!(z >= 0.0 && z < 1.0)) throw DomainError("thermal_log_schatten_norm: z must lie in [0, 1)");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw DomainError("thermal_log_schatten_norm: alpha must be > 1");
  if (z == 0.0) return 0.0;
  return std::log1p(-z) - std::log(-std::expm1(alpha * std::log(z))) / alpha;
}

// Renyi entropy of the thermal state with mean photon number E, exact.
inline double thermal_renyi_entropy(double energy, double alpha) {
  return alpha / (1.0 - alpha) * thermal_log_schatten_norm(z_of_E(energy), alpha);
}

}  // namespace cmoe
