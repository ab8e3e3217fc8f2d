#pragma once

// Scalar machinery behind the p -> q norm saturation of the quantum-limited
// amplifier on thermal inputs:
//
//   phi(z, p) = (1 - z^(p-1)) / (1 - z^p)
//   psi(z, p) = p (1 - z) / (1 - z^p) - 1
//   f(z, p)   = z^(p-2) (1 - z) / (1 - z^(p-1)) * psi(z, p)
//   z'        = (z + kappa - 1) / kappa
//
// and the thermal norm ratio R(z) = ||A_kappa(w_z)||_q / ||w_z||_p with
// d/dz ln R = (phi(z, p) - phi(z', q)) / (1 - z).
//
// Powers z^a are handled as 1 - z^a = -expm1(a ln z) so the z -> 0 and
// z -> 1 limits keep their digits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cmoe/channels.hpp"
#include "cmoe/entropy_norms.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/gaussian_states.hpp"
#include "cmoe/sampler.hpp"

namespace cmoe {

namespace detail {

inline void require_open_z(double z, const char* who) {
  if (!(z > 0.0 && z < 1.0)) throw DomainError(std::string(who) + ": z must lie in (0, 1), got " + std::to_string(z));
}

// 1 - z^a
inline double one_minus_pow(double z, double a) { return -std::expm1(a * std::log(z)); }

}  // namespace detail

inline double phi(double z, double p) {
  detail::require_open_z(z, "phi");
  if (!(p >= 1.0)) throw DomainError("phi: p must be >= 1");
  if (p == 1.0) return 0.0;
  return detail::one_minus_pow(z, p - 1.0) / detail::one_minus_pow(z, p);
}

inline double psi(double z, double p) {
  detail::require_open_z(z, "psi");
  if (!(p >= 1.0)) throw DomainError("psi: p must be >= 1");
  if (p == 1.0) return 0.0;
  return p * (1.0 - z) / detail::one_minus_pow(z, p) - 1.0;
}

// Defined for every p > 1; the monotonicity statements it serves need p < 3/2.
inline double f_func(double z, double p) {
  detail::require_open_z(z, "f_func");
  if (!(p > 1.0)) throw DomainError("f_func: p must be > 1");
  return std::pow(z, p - 2.0) * (1.0 - z) / detail::one_minus_pow(z, p - 1.0) * psi(z, p);
}

inline double amplifier_z_map(double z, double kappa) {
  if (!(z >= 0.0 && z < 1.0)) throw DomainError("amplifier_z_map: z must lie in [0, 1)");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw DomainError("amplifier_z_map: kappa must be >= 1");
  return (z + kappa - 1.0) / kappa;
}

// d/dz ln phi(z, p), closed form.
inline double dlog_phi_dz(double z, double p) {
  detail::require_open_z(z, "dlog_phi_dz");
  const double num = 1.0 + p * (z - 1.0) - std::pow(z, p);
  return std::pow(z, p - 2.0) / detail::one_minus_pow(z, p - 1.0) * num / detail::one_minus_pow(z, p);
}

// d/dp f(z, p), closed form.
inline double df_dp(double z, double p) {
  detail::require_open_z(z, "df_dp");
  const double a = detail::one_minus_pow(z, p - 1.0);
  const double b = detail::one_minus_pow(z, p);
  const double c = detail::one_minus_pow(z, 2.0 * p - 1.0);
  const double lz = std::log(z);
  const double pre = std::pow(z, p - 2.0) * (1.0 - z) * (1.0 - z) / (b * b * a * a);
  return pre * (a * b + c * (p - 1.0) * lz - z * lz / (1.0 - z) * a * a);
}

// Upper estimate of df/dp obtained from the two elementary inequalities
// -z ln z / (1 - z) < sqrt(z) and ln(1 - x) < -x - x^2/2.
inline double df_dp_upper(double z, double p) {
  detail::require_open_z(z, "df_dp_upper");
  const double b = detail::one_minus_pow(z, p);
  const double zh = std::pow(z, p - 0.5);
  return -std::pow(z, p - 2.0) * (1.0 - z) * (1.0 - z) * (1.0 - zh) * (1.0 - 2.0 * std::sqrt(z) + zh) / (2.0 * b * b);
}

// ln(||A_kappa(w_z)||_q / ||w_z||_p) in closed form.
inline double log_thermal_norm_ratio(double z, double kappa, double p, double q) {
  if (!(p > 1.0 && q > 1.0)) throw DomainError("thermal_norm_ratio: need p, q > 1");
  if (!(kappa >= 1.0)) throw DomainError("thermal_norm_ratio: kappa must be >= 1");
  return thermal_log_schatten_norm(amplifier_z_map(z, kappa), q) - thermal_log_schatten_norm(z, p);
}

inline double thermal_norm_ratio(double z, double kappa, double p, double q) {
  return std::exp(log_thermal_norm_ratio(z, kappa, p, q));
}

inline double dlog_ratio_dz(double z, double kappa, double p, double q) {
  return (phi(z, p) - phi(amplifier_z_map(z, kappa), q)) / (1.0 - z);
}

// ---------------------------------------------------------------------------
// p(q)

struct PSolution {
  double p = 0.0;
  double residual = 0.0;  // phi(z, p) - phi(z', q)
  int iterations = 0;
};

inline PSolution solve_p_of_q(double z_bar, double kappa, double q) {
  detail::require_open_z(z_bar, "solve_p_of_q");
  if (!(kappa > 1.0) || !std::isfinite(kappa)) throw DomainError("solve_p_of_q: kappa must be > 1");
  if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("solve_p_of_q: q must be > 1");
  const double target = phi(amplifier_z_map(z_bar, kappa), q);
  auto F = [&](double p) { return phi(z_bar, p) - target; };
  double lo = 1.0 + 1e-9, hi = q - 1e-9;
  double flo = F(lo), fhi = F(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_p_of_q: root not bracketed at z=" << z_bar << " kappa=" << kappa << " q=" << q << " (F(lo)=" << flo
       << ", F(hi)=" << fhi << ")";
    throw LemmaViolation(os.str());
  }
  PSolution s;
  while (hi - lo > 1e-14 && s.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    const double fm = F(mid);
    if (fm < 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    ++s.iterations;
  }
  s.p = std::abs(flo) < std::abs(fhi) ? lo : hi;
  s.residual = F(s.p);
  if (fhi != flo) {
    const double sec = lo - flo * (hi - lo) / (fhi - flo);
    if (sec >= lo && sec <= hi) {
      const double fs = F(sec);
      if (std::abs(fs) <= std::abs(s.residual)) {
        s.p = sec;
        s.residual = fs;
      }
    }
  }
  return s;
}

// Grid scan of ln R over z in (0, 1) followed by golden-section refinement
// around the best grid point.
struct RatioScan {
  double z_star = 0.0;
  double log_ratio_max = 0.0;
  double grid_step = 0.0;
  std::size_t grid_argmax = 0;
  int derivative_sign_changes = 0;
};

inline RatioScan scan_thermal_ratio(double kappa, double p, double q, std::size_t points = 2000) {
  if (points < 3) throw InvalidArgument("scan_thermal_ratio: need at least 3 points");
  RatioScan r;
  r.grid_step = 1.0 / static_cast<double>(points + 1);
  std::vector<double> vals(points);
  std::size_t best = 0;
  for (std::size_t i = 0; i < points; ++i) {
    vals[i] = log_thermal_norm_ratio(static_cast<double>(i + 1) * r.grid_step, kappa, p, q);
    if (vals[i] > vals[best]) best = i;
  }
  int prev = 0;
  for (std::size_t i = 1; i < points; ++i) {
    const double d = vals[i] - vals[i - 1];
    const int sgn = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sgn != 0 && prev != 0 && sgn != prev) ++r.derivative_sign_changes;
    if (sgn != 0) prev = sgn;
  }
  r.grid_argmax = best;
  double a = static_cast<double>(best) * r.grid_step;
  double b = static_cast<double>(best + 2) * r.grid_step;
  a = std::max(a, 1e-12);
  b = std::min(b, 1.0 - 1e-12);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = log_thermal_norm_ratio(c, kappa, p, q), fd = log_thermal_norm_ratio(d, kappa, p, q);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = log_thermal_norm_ratio(c, kappa, p, q);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = log_thermal_norm_ratio(d, kappa, p, q);
    }
  }
  r.z_star = 0.5 * (a + b);
  r.log_ratio_max = std::max(log_thermal_norm_ratio(r.z_star, kappa, p, q), vals[best]);
  return r;
}

struct PCertificate {
  double z_bar = 0.0, kappa = 0.0, q = 0.0;
  PSolution solution;
  RatioScan scan;
  double prefactor = 0.0;  // q/(q-1) * (p-1)/p
  bool in_interval() const { return solution.p > 1.0 && solution.p < q; }
  bool maximizer_ok() const { return std::abs(scan.z_star - z_bar) <= scan.grid_step; }
  bool unique_stationary() const { return scan.derivative_sign_changes == 1; }
  bool prefactor_ok() const { return prefactor >= 0.0 && prefactor <= 1.0; }
};

inline PCertificate certify_p_of_q(double z_bar, double kappa, double q, std::size_t points = 2000) {
  PCertificate c;
  c.z_bar = z_bar;
  c.kappa = kappa;
  c.q = q;
  c.solution = solve_p_of_q(z_bar, kappa, q);
  c.scan = scan_thermal_ratio(kappa, c.solution.p, q, points);
  c.prefactor = q / (q - 1.0) * (c.solution.p - 1.0) / c.solution.p;
  return c;
}

// ---------------------------------------------------------------------------
// Grid verification of the inequalities behind the monotonicity argument.

struct LemmaGrid {
  std::size_t z_points = 199;  // z = i / (z_points + 1)
  double pq_lo = 1.01;
  double pq_hi = 1.49;
  std::size_t pq_points = 25;
  std::vector<double> kappas{1.25, 1.5, 2.0, 4.0};
  double derivative_tol = 1e-6;
  bool exploratory = false;  // allow p, q >= 3/2
  bool throw_on_violation = true;

  std::vector<double> z_values() const {
    std::vector<double> v(z_points);
    for (std::size_t i = 0; i < z_points; ++i) v[i] = static_cast<double>(i + 1) / static_cast<double>(z_points + 1);
    return v;
  }
  std::vector<double> pq_values() const {
    std::vector<double> v(pq_points);
    for (std::size_t i = 0; i < pq_points; ++i) {
      v[i] = pq_points == 1 ? pq_lo
                            : pq_lo + (pq_hi - pq_lo) * static_cast<double>(i) / static_cast<double>(pq_points - 1);
    }
    return v;
  }
  void validate() const {
    if (z_points < 2 || pq_points < 2 || kappas.empty()) throw InvalidArgument("LemmaGrid: empty grid");
    if (!(pq_lo > 1.0) || !(pq_hi > pq_lo)) throw InvalidArgument("LemmaGrid: need 1 < pq_lo < pq_hi");
    if (!exploratory && pq_hi >= 1.5) throw InvalidArgument("LemmaGrid: p, q >= 3/2 requires exploratory mode");
    for (double k : kappas)
      if (!(k > 1.0)) throw InvalidArgument("LemmaGrid: kappa values must be > 1");
    if (!(derivative_tol > 0.0)) throw InvalidArgument("LemmaGrid: derivative_tol must be > 0");
  }
};

struct GridPoint {
  double z = 0.0, p = 0.0, q = 0.0, kappa = 0.0;
};

// Minimum of one margin family over the grid. Margins are oriented so that
// the claim holds iff margin > 0; residual families hold iff value <= tol.
struct MarginStat {
  std::string name;
  bool is_residual = false;
  double tol = 0.0;
  double worst = std::numeric_limits<double>::infinity();  // min margin, or max residual
  GridPoint at;
  std::size_t count = 0;
  std::size_t failures = 0;

  void add(double v, const GridPoint& pt) {
    ++count;
    if (!std::isfinite(v)) {
      ++failures;
      worst = std::numeric_limits<double>::quiet_NaN();
      at = pt;
      return;
    }
    const bool bad = is_residual ? !(v <= tol) : !(v > 0.0);
    if (bad) ++failures;
    const bool worse = is_residual ? (count == 1 || v > worst) : v < worst;
    if (worse && !std::isnan(worst)) {
      worst = v;
      at = pt;
    }
  }
  bool passed() const { return count > 0 && failures == 0; }
};

// Worst margins for one (kappa, p, q) triple over the z grid.
struct LemmaRow {
  double kappa = 0.0, p = 0.0, q = 0.0;
  double min_fpq = 0.0;
  double min_phi_ratio_decreasing = 0.0;
  double max_derphi_residual = 0.0;
  double max_dlogphi_ratio_residual = 0.0;
};

struct LemmaGridReport {
  LemmaGrid grid;
  std::vector<MarginStat> margins;
  std::vector<LemmaRow> rows;
  std::size_t points = 0;

  bool passed() const {
    return std::all_of(margins.begin(), margins.end(), [](const MarginStat& m) { return m.passed(); });
  }
  const MarginStat* first_failure() const {
    for (const auto& m : margins)
      if (!m.passed()) return &m;
    return nullptr;
  }
};

namespace detail {

// Central difference with a step scaled to the distance from the boundary.
template <class F>
double central_difference(F&& fn, double z) {
  const double h = 1e-4 * std::min(z, 1.0 - z);
  return (fn(z + h) - fn(z - h)) / (2.0 * h);
}

}  // namespace detail

inline LemmaGridReport verify_lemma_inequalities(const LemmaGrid& grid) {
  grid.validate();
  LemmaGridReport rep;
  rep.grid = grid;
  enum Id { In1, In2, PhiDecreasing, PhiDecreasingDiscrete, PsiPositive, PsiDecreasing, DfDp, DfDpBound,
            DfDpFiniteDiff, PhiPqLower, PhiPqUpper, Fpq, PhiRatioDecreasing, DerPhi, DerLogPhiRatio, NumIds };
  const char* names[NumIds] = {"in1",         "in2",       "phi_decreasing", "phi_decreasing_discrete",
                               "psi_positive", "psi_decreasing", "dfdp_negative", "dfdp_below_estimate",
                               "dfdp_fd_negative", "phipq_lower", "phipq_upper", "fpq",
                               "phi_ratio_decreasing", "derphi_residual", "dlogphi_ratio_residual"};
  rep.margins.resize(NumIds);
  for (int i = 0; i < NumIds; ++i) rep.margins[static_cast<std::size_t>(i)].name = names[i];
  for (int i : {DerPhi, DerLogPhiRatio}) {
    rep.margins[static_cast<std::size_t>(i)].is_residual = true;
    rep.margins[static_cast<std::size_t>(i)].tol = grid.derivative_tol;
  }
  auto M = [&](Id id) -> MarginStat& { return rep.margins[static_cast<std::size_t>(id)]; };

  const auto zs = grid.z_values();
  const auto ps = grid.pq_values();

  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double z = zs[i];
    M(In1).add(std::sqrt(z) + z * std::log(z) / (1.0 - z), {z, 0, 0, 0});
    for (double p : ps) {
      const GridPoint pt{z, p, 0, 0};
      const double x = detail::one_minus_pow(z, p - 1.0);
      M(In2).add((-x - 0.5 * x * x) - std::log1p(-x), pt);
      M(PhiDecreasing).add(-dlog_phi_dz(z, p), pt);
      if (i + 1 < zs.size()) {
        M(PhiDecreasingDiscrete).add(phi(z, p) - phi(zs[i + 1], p), pt);
        M(PsiDecreasing).add(psi(z, p) - psi(zs[i + 1], p), pt);
      }
      M(PsiPositive).add(psi(z, p), pt);
      const double dfdp = df_dp(z, p);
      M(DfDp).add(-dfdp, pt);
      M(DfDpBound).add(df_dp_upper(z, p) - dfdp, pt);
      if (std::abs(p - 1.5) > 0.01) {
        const double h = 1e-6;
        M(DfDpFiniteDiff).add(-(f_func(z, p + h) - f_func(z, p - h)) / (2.0 * h), pt);
      }
    }
  }

  for (double kappa : grid.kappas) {
    for (double q : ps) {
      for (double z : zs) {
        const double zp = amplifier_z_map(z, kappa);
        const double phq = phi(zp, q);
        M(PhiPqLower).add(phq - phi(z, 1.0), {z, 0, q, kappa});
        M(PhiPqUpper).add(phi(z, q) - phq, {z, 0, q, kappa});
      }
    }
    for (std::size_t ip = 0; ip < ps.size(); ++ip) {
      for (std::size_t iq = ip + 1; iq < ps.size(); ++iq) {
        const double p = ps[ip], q = ps[iq];
        LemmaRow row{kappa, p, q, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0,
                     0.0};
        for (std::size_t i = 0; i < zs.size(); ++i) {
          const double z = zs[i];
          const GridPoint pt{z, p, q, kappa};
          const double zp = amplifier_z_map(z, kappa);
          const double fpq = f_func(z, p) - f_func(zp, q);
          M(Fpq).add(fpq, pt);
          row.min_fpq = std::min(row.min_fpq, fpq);
          if (i + 1 < zs.size()) {
            const double z2 = zs[i + 1];
            const double dec = phi(z, p) / phi(zp, q) - phi(z2, p) / phi(amplifier_z_map(z2, kappa), q);
            M(PhiRatioDecreasing).add(dec, pt);
            row.min_phi_ratio_decreasing = std::min(row.min_phi_ratio_decreasing, dec);
          }
          const double fd = detail::central_difference(
              [&](double t) { return log_thermal_norm_ratio(t, kappa, p, q); }, z);
          const double r1 = std::abs(fd - dlog_ratio_dz(z, kappa, p, q));
          M(DerPhi).add(r1, pt);
          row.max_derphi_residual = std::max(row.max_derphi_residual, r1);
          const double fd2 = detail::central_difference(
              [&](double t) { return std::log(phi(t, p) / phi(amplifier_z_map(t, kappa), q)); }, z);
          const double r2 = std::abs(fd2 - (f_func(zp, q) - f_func(z, p)) / (1.0 - z));
          M(DerLogPhiRatio).add(r2, pt);
          row.max_dlogphi_ratio_residual = std::max(row.max_dlogphi_ratio_residual, r2);
          ++rep.points;
        }
        rep.rows.push_back(row);
      }
    }
  }

  if (grid.throw_on_violation) {
    if (const auto* bad = rep.first_failure()) {
      std::ostringstream os;
      os.precision(17);
      os << "lemma check '" << bad->name << "' failed at z=" << bad->at.z << " p=" << bad->at.p << " q=" << bad->at.q
         << " kappa=" << bad->at.kappa << " (worst " << bad->worst << ")";
      throw LemmaViolation(os.str());
    }
  }
  return rep;
}

// Limits at the ends of the z interval.
struct BoundaryTrends {
  double phi_near_zero = 0.0;      // phi(1e-12, p), expect -> 1
  double phi_near_one = 0.0;       // phi(1 - 1e-9, p), expect -> 1 - 1/p
  double psi_near_one = 0.0;       // psi(1 - 1e-6, p), expect -> 0
  double dlog_ratio_at_zero = 0.0; // expect > 0
  std::vector<double> dlog_ratio_toward_one;  // at 1 - 10^-k, expect decreasing to -inf
};

inline BoundaryTrends boundary_trends(double kappa, double p, double q) {
  BoundaryTrends t;
  t.phi_near_zero = phi(1e-12, p);
  t.phi_near_one = phi(1.0 - 1e-9, p);
  t.psi_near_one = psi(1.0 - 1e-6, p);
  // At z = 0: phi(0, p) = 1 and z' = 1 - 1/kappa.
  t.dlog_ratio_at_zero = 1.0 - phi(amplifier_z_map(0.0, kappa), q);
  for (int k = 2; k <= 8; ++k) t.dlog_ratio_toward_one.push_back(dlog_ratio_dz(1.0 - std::pow(10.0, -k), kappa, p, q));
  return t;
}

// ---------------------------------------------------------------------------
// Random probe of ||A_kappa(rho)||_q / ||rho||_p against the thermal maximum.

struct SaturationTrial {
  std::size_t rank = 0;
  double ratio = 0.0;
  double margin = 0.0;   // d_out / ||rho||_p
  double excess = 0.0;   // ratio - (thermal max + margin)
  std::size_t output_dim = 0;
  double output_deficit = 0.0;
};

struct SaturationReport {
  double kappa = 0.0, p = 0.0, q = 0.0;
  std::size_t cutoff = 0;
  double z_star = 0.0;
  double thermal_max = 0.0;
  double vacuum_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t argmax = 0;
  std::vector<SaturationTrial> trials;
  std::size_t exceedances = 0;
  bool passed() const { return exceedances == 0 && vacuum_ratio <= thermal_max + kViolationSlack; }
};

inline SaturationTrial saturation_ratio(const DensityMatrix& rho, double kappa, double p, double q,
                                        const ChannelOptions& opt = {}) {
  SaturationTrial t;
  const auto out = apply_channel(ChannelSpec::amplifier(kappa), rho, opt);
  const double num = schatten_norm(spectrum_of(out), q);
  const double den = schatten_norm(spectrum_of(rho), p);
  t.ratio = num / den;
  t.margin = out.trace_deficit() / den;
  t.output_dim = out.dim();
  t.output_deficit = out.trace_deficit();
  return t;
}

inline SaturationReport pq_norm_saturation_probe(double kappa, double p, double q, std::size_t cutoff,
                                                 std::size_t trials, std::uint64_t seed,
                                                 const ChannelOptions& opt = {}) {
  if (!(1.0 < p && p < q)) throw DomainError("pq_norm_saturation_probe: need 1 < p < q");
  if (!(kappa > 1.0)) throw DomainError("pq_norm_saturation_probe: kappa must be > 1");
  SaturationReport rep;
  rep.kappa = kappa;
  rep.p = p;
  rep.q = q;
  rep.cutoff = cutoff;
  const auto scan = scan_thermal_ratio(kappa, p, q);
  rep.z_star = scan.z_star;
  rep.thermal_max = std::exp(scan.log_ratio_max);
  rep.vacuum_ratio = saturation_ratio(DensityMatrix::fock(0, 1), kappa, p, q, opt).ratio;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = Rng::substream(seed, i);
    const std::size_t rank = rng.uniform_int(1, cutoff);
    auto t = saturation_ratio(random_mixed(rng, cutoff, rank), kappa, p, q, opt);
    t.rank = rank;
    t.excess = t.ratio - (rep.thermal_max + t.margin);
    if (t.excess > kViolationSlack) ++rep.exceedances;
    if (t.ratio > rep.max_ratio) {
      rep.max_ratio = t.ratio;
      rep.argmax = i;
    }
    rep.trials.push_back(t);
  }
  return rep;
}

}  // namespace cmoe
