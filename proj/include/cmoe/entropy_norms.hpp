#pragma once

// Spectral functionals: von Neumann entropy, Schatten norms, Renyi entropies
// and trace distance. All of them go through the Jacobi kernel.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cmoe/errors.hpp"
#include "cmoe/fock_linalg.hpp"

namespace cmoe {

struct Spectrum {
  std::vector<double> values;  // descending, clamped to >= 0
  double deficit = 0.0;

  double total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

namespace detail {

inline std::vector<double> clamp_spectrum(std::vector<double> values) {
  for (double& v : values) {
    if (v < -kNegativeEigenvalueTol) {
      throw PositivityError("negative eigenvalue " + std::to_string(v) + " below tolerance", v);
    }
    v = std::max(v, 0.0);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

inline void require_alpha(double alpha, const char* who) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw DomainError(std::string(who) + ": alpha must be a finite value > 1, got " + std::to_string(alpha));
  }
}

}  // namespace detail

inline Spectrum spectrum_of(const DensityMatrix& rho) {
  return {detail::clamp_spectrum(hermitian_spectrum(rho.matrix())), rho.trace_deficit()};
}

inline Spectrum spectrum_of(const DiagonalState& p) {
  return {detail::clamp_spectrum(p.probs()), p.trace_deficit()};
}

inline double von_neumann_entropy(const Spectrum& s) {
  double h = 0.0;
  for (double v : s.values)
    if (v >= 1e-300) h -= v * std::log(v);
  return std::max(h, 0.0);  // a pure state can round to -1e-16
}

inline double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(spectrum_of(rho)); }
inline double von_neumann_entropy(const DiagonalState& p) { return von_neumann_entropy(spectrum_of(p)); }

// ln(Tr X^alpha) for X >= 0.
inline double log_power_trace(const Spectrum& s, double alpha) {
  detail::require_alpha(alpha, "log_power_trace");
  const double top = s.values.empty() ? 0.0 : s.values.front();
  if (top <= 0.0) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double v : s.values)
    if (v > 0.0) acc += std::pow(v / top, alpha);
  return alpha * std::log(top) + std::log(acc);
}

inline double log_schatten_norm(const Spectrum& s, double alpha) { return log_power_trace(s, alpha) / alpha; }

inline double schatten_norm(const Spectrum& s, double alpha) { return std::exp(log_schatten_norm(s, alpha)); }
inline double schatten_norm(const DensityMatrix& x, double alpha) {
  detail::require_alpha(alpha, "schatten_norm");
  return schatten_norm(spectrum_of(x), alpha);
}
inline double schatten_norm(const DiagonalState& x, double alpha) {
  detail::require_alpha(alpha, "schatten_norm");
  return schatten_norm(spectrum_of(x), alpha);
}

// S_alpha = alpha/(1-alpha) * ln ||rho||_alpha.
inline double renyi_entropy(const Spectrum& s, double alpha) { return log_power_trace(s, alpha) / (1.0 - alpha); }
inline double renyi_entropy(const DensityMatrix& rho, double alpha) {
  detail::require_alpha(alpha, "renyi_entropy");
  return renyi_entropy(spectrum_of(rho), alpha);
}
inline double renyi_entropy(const DiagonalState& p, double alpha) {
  detail::require_alpha(alpha, "renyi_entropy");
  return renyi_entropy(spectrum_of(p), alpha);
}

inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("trace_distance: dimension mismatch (" + std::to_string(a.rows()) + " vs " +
                          std::to_string(b.rows()) + ")");
  }
  const auto eig = hermitian_spectrum(a - b);
  double s = 0.0;
  for (double v : eig) s += std::abs(v);
  return 0.5 * s;
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

// l1 distance between descending spectra, zero-padding the shorter one.
inline double spectral_distance(const Spectrum& a, const Spectrum& b) {
  const std::size_t n = std::max(a.values.size(), b.values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.values.size() ? a.values[i] : 0.0;
    const double y = i < b.values.size() ? b.values[i] : 0.0;
    d += std::abs(x - y);
  }
  return d;
}

}  // namespace cmoe
