#pragma once

// Independent test-only reference computations. Nothing here calls into the
// code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

inline Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cplx(nd(rng), nd(rng));
  return (g + g.adjoint()) * 0.5;
}

inline Eigen::MatrixXcd random_density(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cplx(nd(rng), nd(rng));
  Eigen::MatrixXcd r = g * g.adjoint();
  return r / r.trace().real();
}

// Eigenvalues of a 2x2 Hermitian matrix in closed form, descending.
inline std::vector<double> eig2(const Eigen::MatrixXcd& m) {
  const double a = m(0, 0).real(), d = m(1, 1).real();
  const double b = std::abs(m(0, 1));
  const double mid = 0.5 * (a + d), rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return {mid + rad, mid - rad};
}

// Characteristic polynomial coefficients via Faddeev-LeVerrier, then real
// roots by bisection between sign changes on a fine scan. For small Hermitian
// matrices only (all roots real, inside the Gershgorin disc radius).
inline std::vector<double> charpoly_eigenvalues(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> c(n + 1, 0.0);  // det(xI - A) = sum c[k] x^(n-k), c[0] = 1
  c[0] = 1.0;
  Eigen::MatrixXcd mk = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    mk = a * mk + c[k - 1] * Eigen::MatrixXcd::Identity(n, n);
    c[k] = -(a * mk).trace().real() / k;
  }
  auto p = [&](double x) {
    double v = 0.0;
    for (int k = 0; k <= n; ++k) v = v * x + c[k];
    return v;
  };
  double radius = 0.0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, a.row(i).cwiseAbs().sum());
  radius += 1.0;
  std::vector<double> roots;
  const int steps = 200000;
  double x0 = -radius, p0 = p(x0);
  for (int s = 1; s <= steps; ++s) {
    const double x1 = -radius + 2.0 * radius * s / steps;
    const double p1 = p(x1);
    if (p0 == 0.0) roots.push_back(x0);
    else if (p0 * p1 < 0.0) {
      double lo = x0, hi = x1, plo = p0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi), pm = p(mid);
        if ((pm < 0.0) == (plo < 0.0)) { lo = mid; plo = pm; } else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    p0 = p1;
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

// exp(A) by plain Taylor series with many terms and repeated halving; kept
// deliberately different from the production Horner/16 scheme.
inline Eigen::MatrixXcd expm_series(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.25) ++s;
  const Eigen::MatrixXcd x = a / std::ldexp(1.0, s);
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k < 40; ++k) {
    term = (term * x / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  return sum;
}

// -sum p ln p over a probability vector.
inline double shannon(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

// Closed-form g(E) written independently of the library.
inline double g_direct(double e) {
  if (e == 0.0) return 0.0;
  return (e + 1.0) * std::log(e + 1.0) - e * std::log(e);
}

// Bisection inverse of g_direct to width 1e-15.
inline double g_inv_bisect(double s) {
  double lo = 0.0, hi = 1.0;
  while (g_direct(hi) < s) hi *= 2.0;
  while (hi - lo > 1e-15 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g_direct(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
