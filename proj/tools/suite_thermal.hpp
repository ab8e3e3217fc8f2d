#pragma once

// verify-thermal-laws: thermal fixed points of the four channel families and
// the quantum-limited decompositions of the thermal-noise channels.

#include <iostream>
#include <string>
#include <vector>

#include "cmoe/channels.hpp"
#include "cmoe/entropy_norms.hpp"
#include "cmoe/sampler.hpp"
#include "suite_common.hpp"

namespace cmoe::cli {

struct ThermalConfig {
  std::vector<double> input_energies{0.0, 0.5, 1.0, 2.0};
  std::vector<double> transmissivities{0.3, 0.7};
  std::vector<double> gains{1.5, 2.0};
  std::vector<double> env_energies{0.0, 1.0};
  double input_deficit = 1e-9;
  double output_deficit = 1e-10;
  double tolerance = 1e-7;
  std::size_t input_cutoff = 0;  // 0: smallest cutoff meeting input_deficit
  std::size_t max_cutoff = 400;

  void read(const json& j) {
    Section s(j, "thermal");
    s.get("input_energies", input_energies);
    s.get("transmissivities", transmissivities);
    s.get("gains", gains);
    s.get("env_energies", env_energies);
    s.get("input_deficit", input_deficit);
    s.get("output_deficit", output_deficit);
    s.get("tolerance", tolerance);
    s.get("input_cutoff", input_cutoff);
    s.get("max_cutoff", max_cutoff);
    s.finish();
    require(!input_energies.empty() && !env_energies.empty() && !(transmissivities.empty() && gains.empty()),
            "thermal: empty grid");
    require(input_deficit > 0.0 && output_deficit > 0.0 && tolerance > 0.0, "thermal: tolerances must be > 0");
    require(max_cutoff >= 2, "thermal: max_cutoff must be >= 2");
    for (double e : input_energies) require(e >= 0.0, "thermal: input energies must be >= 0");
  }

  json to_json() const {
    json j;
    j["input_energies"] = input_energies;
    j["transmissivities"] = transmissivities;
    j["gains"] = gains;
    j["env_energies"] = env_energies;
    j["input_deficit"] = input_deficit;
    j["output_deficit"] = output_deficit;
    j["tolerance"] = tolerance;
    j["input_cutoff"] = input_cutoff;
    j["max_cutoff"] = max_cutoff;
    return j;
  }

  std::vector<ChannelSpec> channels() const {
    std::vector<ChannelSpec> out;
    try {
      for (double e : env_energies) {
        for (double l : transmissivities) out.push_back(ChannelSpec::attenuator(l, e));
        for (double k : gains) out.push_back(ChannelSpec::amplifier(k, e));
        out.push_back(ChannelSpec::additive_noise(e));
        for (double k : gains) out.push_back(ChannelSpec::contravariant(k, e));
      }
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("thermal: ") + ex.what());
    }
    return out;
  }
};

struct DecompositionConfig {
  std::size_t trials = 50;
  std::size_t dim = 12;
  std::vector<double> transmissivities{0.3, 0.7};
  std::vector<double> gains{1.5, 2.0};
  std::vector<double> env_energies{0.5, 1.0};
  double tolerance = 1e-7;

  void read(const json& j) {
    Section s(j, "decomposition");
    s.get("trials", trials);
    s.get("dim", dim);
    s.get("transmissivities", transmissivities);
    s.get("gains", gains);
    s.get("env_energies", env_energies);
    s.get("tolerance", tolerance);
    s.finish();
    require(trials >= 1 && dim >= 2, "decomposition: trials must be >= 1 and dim >= 2");
    require(tolerance > 0.0, "decomposition: tolerance must be > 0");
  }

  json to_json() const {
    json j;
    j["trials"] = trials;
    j["dim"] = dim;
    j["transmissivities"] = transmissivities;
    j["gains"] = gains;
    j["env_energies"] = env_energies;
    j["tolerance"] = tolerance;
    return j;
  }
};

struct ThermalRow {
  ChannelSpec spec;
  double input_energy = 0.0, predicted_energy = 0.0;
  std::size_t input_cutoff = 0, output_cutoff = 0;
  double input_deficit = 0.0, output_deficit = 0.0;
  double distance = 0.0;
  std::string status;  // ok | fail | truncation_error
  std::string message;
};

inline ThermalRow thermal_row(const ChannelSpec& spec, double e_in, const ThermalConfig& cfg) {
  ThermalRow r;
  r.spec = spec;
  r.input_energy = e_in;
  r.predicted_energy = thermal_output_energy(spec, e_in);
  r.input_cutoff = cfg.input_cutoff > 0 ? cfg.input_cutoff : thermal_cutoff_for(e_in, cfg.input_deficit, 2);
  const auto input = thermal_state(e_in, r.input_cutoff);
  r.input_deficit = input.trace_deficit();
  ChannelOptions opt;
  opt.target_deficit = cfg.output_deficit;
  opt.max_cutoff = cfg.max_cutoff;
  try {
    const auto out = apply_channel(spec, input.to_density(), opt);
    r.output_cutoff = out.dim();
    r.output_deficit = out.trace_deficit();
    const std::size_t ref_cut = std::max(out.dim(), thermal_cutoff_for(r.predicted_energy, 1e-16, 2));
    r.distance = spectral_distance(spectrum_of(out), spectrum_of(thermal_state(r.predicted_energy, ref_cut)));
  } catch (const TruncationError& e) {
    r.status = "truncation_error";
    r.message = e.what();
    return r;
  }
  if (r.input_deficit > cfg.input_deficit) {
    r.status = "truncation_error";
    r.message = "input cutoff " + std::to_string(r.input_cutoff) + " leaves trace deficit " + fmt(r.input_deficit);
  } else {
    r.status = r.distance <= cfg.tolerance ? "ok" : "fail";
  }
  return r;
}

struct DecompositionRow {
  ChannelSpec spec;
  std::size_t trial = 0;
  double lambda_q = 0.0, kappa_q = 0.0;  // quantum-limited factors
  std::size_t dim = 0;
  double distance = 0.0;
  bool ok = false;
};

inline int run_verify_thermal_laws(const json& root, const RunContext& ctx) {
  ThermalConfig tc;
  tc.read(section_of(root, "thermal"));
  DecompositionConfig dc;
  dc.read(section_of(root, "decomposition"));
  json resolved;
  resolved["thermal"] = tc.to_json();
  resolved["decomposition"] = dc.to_json();
  prepare_out_dir(ctx.out);

  // Thermal fixed points.
  const auto specs = tc.channels();
  std::vector<std::pair<ChannelSpec, double>> grid;
  for (const auto& s : specs)
    for (double e : tc.input_energies) grid.emplace_back(s, e);
  std::vector<ThermalRow> rows(grid.size());
  parallel_for(grid.size(), ctx.jobs, [&](std::size_t i) { rows[i] = thermal_row(grid[i].first, grid[i].second, tc); });

  CsvWriter csv(ctx.out / "thermal_laws.csv",
                {"channel", "lambda", "kappa", "env_energy", "input_energy", "predicted_energy", "input_cutoff",
                 "input_deficit", "output_cutoff", "output_deficit", "spectral_distance", "status"});
  json thermal;
  double worst = 0.0;
  std::size_t failures = 0;
  json failed = json::array();
  for (const auto& r : rows) {
    csv.row(to_string(r.spec.kind), r.spec.transmissivity.value_or(0.0), r.spec.gain.value_or(0.0), r.spec.env_energy,
            r.input_energy, r.predicted_energy, r.input_cutoff, r.input_deficit, r.output_cutoff, r.output_deficit,
            r.distance, r.status);
    worst = std::max(worst, r.distance);
    if (r.status != "ok") {
      ++failures;
      json f;
      f["channel"] = spec_json(r.spec);
      f["input_energy"] = r.input_energy;
      f["status"] = r.status;
      f["input_deficit"] = r.input_deficit;
      f["output_deficit"] = r.output_deficit;
      f["spectral_distance"] = r.distance;
      if (!r.message.empty()) f["message"] = r.message;
      failed.push_back(f);
      std::cerr << "thermal law " << r.status << ": " << r.spec.describe() << " E'=" << fmt(r.input_energy)
                << " input_deficit=" << fmt(r.input_deficit) << " spectral_distance=" << fmt(r.distance)
                << (r.message.empty() ? "" : " (" + r.message + ")") << '\n';
    }
  }
  csv.close();
  thermal["points"] = rows.size();
  thermal["max_spectral_distance"] = worst;
  thermal["tolerance"] = tc.tolerance;
  thermal["failures"] = failures;
  thermal["failed_points"] = failed;
  thermal["passed"] = failures == 0;

  // Decompositions into quantum-limited attenuator followed by amplifier.
  std::vector<ChannelSpec> dspecs;
  try {
    for (double e : dc.env_energies) {
      for (double l : dc.transmissivities) dspecs.push_back(ChannelSpec::attenuator(l, e));
      for (double k : dc.gains) dspecs.push_back(ChannelSpec::amplifier(k, e));
    }
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("decomposition: ") + ex.what());
  }
  const std::uint64_t dseed = stream_seed(ctx.seed, 0xdec0);
  std::vector<DensityMatrix> states(dc.trials);
  for (std::size_t t = 0; t < dc.trials; ++t) {
    Rng rng = Rng::substream(dseed, t);
    states[t] = random_mixed(rng, dc.dim, rng.uniform_int(1, dc.dim));
  }
  std::vector<DecompositionRow> drows(dspecs.size() * dc.trials);
  parallel_for(drows.size(), ctx.jobs, [&](std::size_t i) {
    const auto& spec = dspecs[i / dc.trials];
    const auto& rho = states[i % dc.trials];
    const auto d = decompose(spec);
    DecompositionRow r;
    r.spec = spec;
    r.trial = i % dc.trials;
    const bool att = spec.kind == ChannelKind::Attenuator;
    r.lambda_q = att ? d.lambda_prime : d.lambda_dprime;
    r.kappa_q = att ? d.kappa_prime : d.kappa_dprime;
    const auto lhs = apply_channel(spec, rho);
    const auto rhs = apply_channel(ChannelSpec::amplifier(r.kappa_q), apply_channel(ChannelSpec::attenuator(r.lambda_q), rho));
    r.dim = std::max(lhs.dim(), rhs.dim());
    r.distance = trace_distance(lhs.embedded(r.dim), rhs.embedded(r.dim));
    r.ok = r.distance <= dc.tolerance;
    drows[i] = r;
  });
  CsvWriter dcsv(ctx.out / "decomposition.csv", {"channel", "lambda", "kappa", "env_energy", "trial", "lambda_q",
                                                 "kappa_q", "output_dim", "trace_distance", "status"});
  double worst_att = 0.0, worst_amp = 0.0;
  std::size_t dfail = 0;
  for (const auto& r : drows) {
    dcsv.row(to_string(r.spec.kind), r.spec.transmissivity.value_or(0.0), r.spec.gain.value_or(0.0), r.spec.env_energy,
             r.trial, r.lambda_q, r.kappa_q, r.dim, r.distance, r.ok ? "ok" : "fail");
    (r.spec.kind == ChannelKind::Attenuator ? worst_att : worst_amp) =
        std::max(r.spec.kind == ChannelKind::Attenuator ? worst_att : worst_amp, r.distance);
    if (!r.ok) ++dfail;
  }
  dcsv.close();
  json decomposition;
  decomposition["trials"] = drows.size();
  decomposition["max_trace_distance_attenuator"] = worst_att;
  decomposition["max_trace_distance_amplifier"] = worst_amp;
  decomposition["tolerance"] = dc.tolerance;
  decomposition["failures"] = dfail;
  decomposition["passed"] = dfail == 0;

  json doc = document("verify-thermal-laws", ctx, resolved);
  doc["thermal_laws"] = thermal;
  doc["decomposition"] = decomposition;
  const bool passed = failures == 0 && dfail == 0;
  doc["passed"] = passed;
  write_json(ctx.out / "thermal_summary.json", doc);
  return passed ? kPass : kClaimFailure;
}

}  // namespace cmoe::cli
