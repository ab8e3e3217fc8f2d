#pragma once

// verify-lemma: scalar inequalities over the (z, p, q, kappa) grid, the p(q)
// root, p->q norm saturation and closed-form thermal norms.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "cmoe/gaussian_states.hpp"
#include "cmoe/lemma_lab.hpp"
#include "suite_common.hpp"

namespace cmoe::cli {

struct LemmaConfig {
  LemmaGrid grid;

  std::vector<double> solver_z_bars{0.25, 0.5, 0.75};
  std::vector<double> solver_kappas{1.5, 2.0};
  std::vector<double> solver_qs{1.1, 1.3, 1.49};
  double solver_residual_tol = 1e-12;
  std::size_t scan_points = 2000;
  std::vector<double> trend_qs{1.1, 1.01, 1.001};

  double saturation_kappa = 2.0;
  double saturation_p = 1.2;
  double saturation_q = 1.35;
  std::size_t saturation_cutoff = 24;
  std::size_t saturation_trials = 500;

  double norms_deficit = 1e-13;
  std::size_t norms_max_cutoff = 20000;
  double norms_tolerance = 1e-10;

  void read(const json& j, bool exploratory) {
    Section s(j, "lemma");
    s.get("z_points", grid.z_points);
    s.get("pq_lo", grid.pq_lo);
    s.get("pq_hi", grid.pq_hi);
    s.get("pq_points", grid.pq_points);
    s.get("kappas", grid.kappas);
    s.get("derivative_tol", grid.derivative_tol);
    s.get("solver_z_bars", solver_z_bars);
    s.get("solver_kappas", solver_kappas);
    s.get("solver_qs", solver_qs);
    s.get("solver_residual_tol", solver_residual_tol);
    s.get("scan_points", scan_points);
    s.get("trend_qs", trend_qs);
    s.get("saturation_kappa", saturation_kappa);
    s.get("saturation_p", saturation_p);
    s.get("saturation_q", saturation_q);
    s.get("saturation_cutoff", saturation_cutoff);
    s.get("saturation_trials", saturation_trials);
    s.get("norms_deficit", norms_deficit);
    s.get("norms_max_cutoff", norms_max_cutoff);
    s.get("norms_tolerance", norms_tolerance);
    s.finish();
    grid.exploratory = exploratory;
    grid.throw_on_violation = false;
    try {
      grid.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("lemma: ") + e.what() + (exploratory ? "" : " (pass --exploratory)"));
    }
    auto in_scope = [&](double v, const char* what) {
      require(v > 1.0, std::string("lemma: ") + what + " must be > 1");
      require(exploratory || v < 1.5,
              std::string("lemma: ") + what + " = " + fmt(v) + " is outside (1, 3/2); pass --exploratory");
    };
    for (double q : solver_qs) in_scope(q, "solver q");
    for (double q : trend_qs) in_scope(q, "trend q");
    in_scope(saturation_p, "saturation p");
    in_scope(saturation_q, "saturation q");
    require(saturation_p < saturation_q, "lemma: need saturation_p < saturation_q");
    require(saturation_kappa > 1.0, "lemma: saturation_kappa must be > 1");
    for (double k : solver_kappas) require(k > 1.0, "lemma: solver kappas must be > 1");
    for (double z : solver_z_bars) require(z > 0.0 && z < 1.0, "lemma: solver z_bar must lie in (0, 1)");
    require(!solver_z_bars.empty() && !solver_kappas.empty() && !solver_qs.empty(), "lemma: empty solver grid");
    require(saturation_cutoff >= 2 && saturation_trials >= 1, "lemma: saturation cutoff >= 2 and trials >= 1");
    require(scan_points >= 10, "lemma: scan_points must be >= 10");
    require(solver_residual_tol > 0.0 && norms_tolerance > 0.0 && norms_deficit > 0.0 && norms_deficit < 1.0,
            "lemma: tolerances must be > 0");
  }

  json to_json() const {
    json j;
    j["z_points"] = grid.z_points;
    j["pq_lo"] = grid.pq_lo;
    j["pq_hi"] = grid.pq_hi;
    j["pq_points"] = grid.pq_points;
    j["kappas"] = grid.kappas;
    j["derivative_tol"] = grid.derivative_tol;
    j["solver_z_bars"] = solver_z_bars;
    j["solver_kappas"] = solver_kappas;
    j["solver_qs"] = solver_qs;
    j["solver_residual_tol"] = solver_residual_tol;
    j["scan_points"] = scan_points;
    j["trend_qs"] = trend_qs;
    j["saturation_kappa"] = saturation_kappa;
    j["saturation_p"] = saturation_p;
    j["saturation_q"] = saturation_q;
    j["saturation_cutoff"] = saturation_cutoff;
    j["saturation_trials"] = saturation_trials;
    j["norms_deficit"] = norms_deficit;
    j["norms_max_cutoff"] = norms_max_cutoff;
    j["norms_tolerance"] = norms_tolerance;
    return j;
  }
};

namespace detail {

inline json point_json(const GridPoint& pt) {
  json j;
  j["z"] = pt.z;
  j["p"] = pt.p;
  j["q"] = pt.q;
  j["kappa"] = pt.kappa;
  return j;
}

inline std::string point_text(const GridPoint& pt) {
  return "z=" + fmt(pt.z) + " p=" + fmt(pt.p) + " q=" + fmt(pt.q) + " kappa=" + fmt(pt.kappa);
}

}  // namespace detail

inline int run_verify_lemma(const json& root, const RunContext& ctx) {
  LemmaConfig cfg;
  cfg.read(section_of(root, "lemma"), ctx.exploratory);
  json resolved;
  resolved["lemma"] = cfg.to_json();
  prepare_out_dir(ctx.out);
  bool passed = true;
  json doc = document("verify-lemma", ctx, resolved);
  doc["exploratory"] = ctx.exploratory;

  // Inequality grid. Rows are aggregated over z per (kappa, p, q).
  const auto rep = verify_lemma_inequalities(cfg.grid);
  CsvWriter gcsv(ctx.out / "lemma_grid.csv", {"kappa", "p", "q", "min_fpq", "min_phi_ratio_decreasing",
                                              "max_derphi_residual", "max_dlogphi_ratio_residual"});
  for (const auto& r : rep.rows)
    gcsv.row(r.kappa, r.p, r.q, r.min_fpq, r.min_phi_ratio_decreasing, r.max_derphi_residual,
             r.max_dlogphi_ratio_residual);
  gcsv.close();
  CsvWriter mcsv(ctx.out / "lemma_margins.csv",
                 {"family", "kind", "worst", "tolerance", "z", "p", "q", "kappa", "count", "failures"});
  json margins = json::array();
  for (const auto& m : rep.margins) {
    mcsv.row(m.name, m.is_residual ? "residual" : "margin", m.worst, m.tol, m.at.z, m.at.p, m.at.q, m.at.kappa,
             m.count, m.failures);
    json j;
    j["family"] = m.name;
    j["kind"] = m.is_residual ? "residual" : "margin";
    j[m.is_residual ? "max_residual" : "min_margin"] = std::isfinite(m.worst) ? json(m.worst) : json();
    if (m.is_residual) j["tolerance"] = m.tol;
    j["at"] = detail::point_json(m.at);
    j["count"] = m.count;
    j["failures"] = m.failures;
    j["passed"] = m.passed();
    margins.push_back(j);
    if (!m.passed())
      std::cerr << "lemma check '" << m.name << "' failed at " << detail::point_text(m.at) << " (worst "
                << fmt(m.worst) << ")\n";
  }
  mcsv.close();
  json grid;
  grid["points"] = rep.points;
  grid["z_points"] = cfg.grid.z_points;
  grid["pq_points"] = cfg.grid.pq_points;
  grid["families"] = margins;
  grid["passed"] = rep.passed();
  doc["grid"] = grid;
  passed = passed && rep.passed();

  // p(q) root and maximizer certificate.
  struct Cell {
    double z_bar, kappa, q;
  };
  std::vector<Cell> cells;
  for (double z : cfg.solver_z_bars)
    for (double k : cfg.solver_kappas)
      for (double q : cfg.solver_qs) cells.push_back({z, k, q});
  std::vector<PCertificate> certs(cells.size());
  std::vector<std::string> errors(cells.size());
  parallel_for(cells.size(), ctx.jobs, [&](std::size_t i) {
    try {
      certs[i] = certify_p_of_q(cells[i].z_bar, cells[i].kappa, cells[i].q, cfg.scan_points);
    } catch (const LemmaViolation& e) {
      errors[i] = e.what();
    }
  });
  CsvWriter pcsv(ctx.out / "lemma_pq.csv",
                 {"z_bar", "kappa", "q", "p", "residual", "iterations", "z_star", "grid_step", "log_ratio_max",
                  "sign_changes", "prefactor", "status"});
  std::size_t pq_fail = 0;
  double max_residual = 0.0;
  json pq_failures = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = certs[i];
    const bool ok = errors[i].empty() && std::abs(c.solution.residual) <= cfg.solver_residual_tol &&
                    c.in_interval() && c.maximizer_ok() && c.unique_stationary() && c.prefactor_ok();
    pcsv.row(cells[i].z_bar, cells[i].kappa, cells[i].q, c.solution.p, c.solution.residual, c.solution.iterations,
             c.scan.z_star, c.scan.grid_step, c.scan.log_ratio_max, c.scan.derivative_sign_changes, c.prefactor,
             ok ? "ok" : "fail");
    max_residual = std::max(max_residual, std::abs(c.solution.residual));
    if (!ok) {
      ++pq_fail;
      json f;
      f["z_bar"] = cells[i].z_bar;
      f["kappa"] = cells[i].kappa;
      f["q"] = cells[i].q;
      if (!errors[i].empty()) f["error"] = errors[i];
      pq_failures.push_back(f);
      std::cerr << "p(q) certificate failed at z_bar=" << fmt(cells[i].z_bar) << " kappa=" << fmt(cells[i].kappa)
                << " q=" << fmt(cells[i].q) << (errors[i].empty() ? "" : ": " + errors[i]) << '\n';
    }
  }
  pcsv.close();

  // p(q) -> 1 as q -> 1: check p - 1 shrinks along trend_qs at each (z_bar, kappa).
  CsvWriter tcsv(ctx.out / "lemma_pq_trend.csv", {"z_bar", "kappa", "q", "p", "p_minus_1", "status"});
  std::size_t trend_fail = 0;
  for (double z : cfg.solver_z_bars) {
    for (double k : cfg.solver_kappas) {
      double prev = std::numeric_limits<double>::infinity();
      for (double q : cfg.trend_qs) {
        double p = std::numeric_limits<double>::quiet_NaN();
        bool ok = false;
        try {
          p = solve_p_of_q(z, k, q).p;
          ok = p > 1.0 && p < q && (p - 1.0) < prev;
          prev = p - 1.0;
        } catch (const LemmaViolation&) {
        }
        tcsv.row(z, k, q, p, p - 1.0, ok ? "ok" : "fail");
        if (!ok) ++trend_fail;
      }
    }
  }
  tcsv.close();
  json pq;
  pq["cells"] = cells.size();
  pq["max_abs_residual"] = max_residual;
  pq["residual_tolerance"] = cfg.solver_residual_tol;
  pq["failures"] = pq_fail;
  pq["failed_cells"] = pq_failures;
  pq["trend_failures"] = trend_fail;
  pq["passed"] = pq_fail == 0 && trend_fail == 0;
  doc["p_of_q"] = pq;
  passed = passed && pq_fail == 0 && trend_fail == 0;

  // Boundary behaviour, reported for inspection.
  json trends = json::array();
  for (double k : cfg.grid.kappas) {
    const double p = cfg.grid.pq_lo, q = cfg.grid.pq_hi;
    const auto t = boundary_trends(k, p, q);
    json j;
    j["kappa"] = k;
    j["p"] = p;
    j["q"] = q;
    j["phi_near_zero"] = t.phi_near_zero;
    j["phi_near_one"] = t.phi_near_one;
    j["phi_limit_at_one"] = 1.0 - 1.0 / p;
    j["psi_near_one"] = t.psi_near_one;
    j["dlog_ratio_at_zero"] = t.dlog_ratio_at_zero;
    j["dlog_ratio_toward_one"] = t.dlog_ratio_toward_one;
    trends.push_back(j);
  }
  doc["boundary_trends"] = trends;

  // Norm saturation.
  ChannelOptions copt;
  const auto sat = pq_norm_saturation_probe(cfg.saturation_kappa, cfg.saturation_p, cfg.saturation_q,
                                            cfg.saturation_cutoff, cfg.saturation_trials,
                                            stream_seed(ctx.seed, 0x5a7), copt);
  CsvWriter scsv(ctx.out / "lemma_saturation.csv", {"kappa", "p", "q", "cutoff", "trial", "rank", "ratio",
                                                    "thermal_max", "margin", "excess", "output_dim",
                                                    "output_deficit", "status"});
  for (std::size_t i = 0; i < sat.trials.size(); ++i) {
    const auto& t = sat.trials[i];
    scsv.row(sat.kappa, sat.p, sat.q, sat.cutoff, i, t.rank, t.ratio, sat.thermal_max, t.margin, t.excess, t.output_dim,
             t.output_deficit, t.excess > kViolationSlack ? "exceeds" : "ok");
  }
  scsv.close();
  json saturation;
  saturation["kappa"] = sat.kappa;
  saturation["p"] = sat.p;
  saturation["q"] = sat.q;
  saturation["cutoff"] = sat.cutoff;
  saturation["trials"] = sat.trials.size();
  saturation["z_star"] = sat.z_star;
  saturation["thermal_max"] = sat.thermal_max;
  saturation["vacuum_ratio"] = sat.vacuum_ratio;
  saturation["max_ratio"] = sat.max_ratio;
  saturation["argmax_trial"] = sat.argmax;
  saturation["exceedances"] = sat.exceedances;
  saturation["passed"] = sat.passed();
  doc["saturation"] = saturation;
  if (!sat.passed())
    std::cerr << "norm saturation exceeded: " << sat.exceedances << " trials above thermal max " << fmt(sat.thermal_max)
              << " (kappa=" << fmt(sat.kappa) << " p=" << fmt(sat.p) << " q=" << fmt(sat.q) << ")\n";
  passed = passed && sat.passed();

  // Closed-form ln||w_z||_alpha against the spectrum of a truncated thermal state.
  const auto zs = cfg.grid.z_values();
  const auto alphas = cfg.grid.pq_values();
  struct NormRow {
    std::size_t cutoff = 0;
    std::vector<double> closed, spectral;
    bool capped = false;
  };
  std::vector<NormRow> nrows(zs.size());
  parallel_for(zs.size(), ctx.jobs, [&](std::size_t i) {
    const double e = E_of_z(zs[i]);
    NormRow r;
    r.cutoff = thermal_cutoff_for(e, cfg.norms_deficit, 2);
    if (r.cutoff > cfg.norms_max_cutoff) {
      r.cutoff = cfg.norms_max_cutoff;
      r.capped = true;
    }
    const auto spec = spectrum_of(thermal_state(e, r.cutoff));
    for (double a : alphas) {
      r.closed.push_back(thermal_log_schatten_norm(zs[i], a));
      r.spectral.push_back(log_schatten_norm(spec, a));
    }
    nrows[i] = std::move(r);
  });
  CsvWriter ncsv(ctx.out / "lemma_norms.csv",
                 {"z", "alpha", "cutoff", "closed_form", "spectral", "abs_diff", "tail_bound", "status"});
  std::size_t norm_fail = 0;
  double worst_excess = -std::numeric_limits<double>::infinity(), max_diff = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double tail = std::pow(zs[i], static_cast<double>(nrows[i].cutoff));
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      const double diff = std::abs(nrows[i].closed[k] - nrows[i].spectral[k]);
      const bool ok = diff <= cfg.norms_tolerance + tail;
      ncsv.row(zs[i], alphas[k], nrows[i].cutoff, nrows[i].closed[k], nrows[i].spectral[k], diff, tail,
               ok ? "ok" : "fail");
      max_diff = std::max(max_diff, diff);
      worst_excess = std::max(worst_excess, diff - (cfg.norms_tolerance + tail));
      if (!ok) ++norm_fail;
    }
  }
  ncsv.close();
  json norms;
  norms["points"] = zs.size() * alphas.size();
  norms["max_abs_diff"] = max_diff;
  norms["tolerance"] = cfg.norms_tolerance;
  norms["worst_excess_over_bound"] = worst_excess;
  norms["failures"] = norm_fail;
  norms["passed"] = norm_fail == 0;
  doc["thermal_norms"] = norms;
  passed = passed && norm_fail == 0;

  doc["passed"] = passed;
  write_json(ctx.out / "lemma_summary.json", doc);
  return passed ? kPass : kClaimFailure;
}

}  // namespace cmoe::cli
