#pragma once

// verify-cmoe: output entropy versus the thermal lower bound on random,
// entropy-pinned, thermal and adversarially searched inputs, plus the Renyi
// chain for the quantum-limited amplifier.

#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "cmoe/cmoe_bounds.hpp"
#include "cmoe/lemma_lab.hpp"
#include "cmoe/sampler.hpp"
#include "suite_common.hpp"
#include "suite_thermal.hpp"

namespace cmoe::cli {

struct CmoeConfig {
  std::vector<std::size_t> cutoffs{16, 24};
  std::size_t trials_per_cutoff = 10000;
  std::vector<ChannelSpec> channels{ChannelSpec::attenuator(0.7, 0.5), ChannelSpec::amplifier(1.5, 0.0),
                                    ChannelSpec::additive_noise(0.5), ChannelSpec::contravariant(1.5, 0.0)};
  double output_deficit = 1e-10;
  bool thermal_only = false;

  // Thermal-input equality grid.
  std::vector<double> thermal_energies{0.0, 0.5, 1.0, 2.0};
  std::vector<double> thermal_transmissivities{0.3, 0.7};
  std::vector<double> thermal_gains{1.5, 2.0};
  std::vector<double> thermal_env_energies{0.0, 1.0};
  double thermal_input_deficit = 1e-12;

  std::size_t searches = 10;
  std::size_t search_iterations = 200;
  std::size_t search_cutoff = 16;
  double search_step = 0.05;

  std::size_t chain_trials = 100;
  double chain_kappa = 2.0;
  std::vector<double> chain_qs{1.3, 1.1};
  std::size_t chain_cutoff = 16;

  void read(const json& j) {
    Section s(j, "cmoe");
    s.get("cutoffs", cutoffs);
    s.get("trials_per_cutoff", trials_per_cutoff);
    json chans;
    s.get("channels", chans);
    if (!chans.is_null()) {
      require(chans.is_array() && !chans.empty(), "cmoe.channels must be a non-empty array");
      channels.clear();
      for (const auto& c : chans) channels.push_back(spec_from_json(c));
    }
    s.get("output_deficit", output_deficit);
    s.get("thermal_only", thermal_only);
    s.get("thermal_energies", thermal_energies);
    s.get("thermal_transmissivities", thermal_transmissivities);
    s.get("thermal_gains", thermal_gains);
    s.get("thermal_env_energies", thermal_env_energies);
    s.get("thermal_input_deficit", thermal_input_deficit);
    s.get("searches", searches);
    s.get("search_iterations", search_iterations);
    s.get("search_cutoff", search_cutoff);
    s.get("search_step", search_step);
    s.get("chain_trials", chain_trials);
    s.get("chain_kappa", chain_kappa);
    s.get("chain_qs", chain_qs);
    s.get("chain_cutoff", chain_cutoff);
    s.finish();
    require(!cutoffs.empty(), "cmoe: cutoffs must be non-empty");
    for (auto c : cutoffs) require(c >= 2 && c <= 64, "cmoe: cutoffs must lie in [2, 64]");
    require(trials_per_cutoff >= 1 && search_iterations >= 1 && chain_trials >= 1, "cmoe: trial counts must be >= 1");
    require(output_deficit > 0.0 && thermal_input_deficit > 0.0 && thermal_input_deficit <= 1e-4,
            "cmoe: deficits must lie in (0, 1e-4]");
    require(!thermal_energies.empty(), "cmoe: thermal grid must be non-empty");
    require(search_cutoff >= 2 && chain_cutoff >= 2, "cmoe: search/chain cutoffs must be >= 2");
    require(search_step > 0.0, "cmoe: search_step must be > 0");
    require(chain_kappa > 1.0, "cmoe: chain_kappa must be > 1");
    for (double q : chain_qs) require(q > 1.0 && q < 1.5, "cmoe: chain q values must lie in (1, 3/2)");
  }

  json to_json() const {
    json j;
    j["cutoffs"] = cutoffs;
    j["trials_per_cutoff"] = trials_per_cutoff;
    json chans = json::array();
    for (const auto& c : channels) chans.push_back(spec_json(c));
    j["channels"] = chans;
    j["output_deficit"] = output_deficit;
    j["thermal_only"] = thermal_only;
    j["thermal_energies"] = thermal_energies;
    j["thermal_transmissivities"] = thermal_transmissivities;
    j["thermal_gains"] = thermal_gains;
    j["thermal_env_energies"] = thermal_env_energies;
    j["thermal_input_deficit"] = thermal_input_deficit;
    j["searches"] = searches;
    j["search_iterations"] = search_iterations;
    j["search_cutoff"] = search_cutoff;
    j["search_step"] = search_step;
    j["chain_trials"] = chain_trials;
    j["chain_kappa"] = chain_kappa;
    j["chain_qs"] = chain_qs;
    j["chain_cutoff"] = chain_cutoff;
    return j;
  }

  ChannelOptions channel_options() const {
    ChannelOptions o;
    o.target_deficit = output_deficit;
    return o;
  }
};

inline json counterexample_json(const DensityMatrix& rho, std::uint64_t seed, const CmoeReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["dimension"] = rho.dim();
  json re = json::array(), im = json::array();
  for (std::size_t r = 0; r < rho.dim(); ++r)
    for (std::size_t c = 0; c < rho.dim(); ++c) {
      re.push_back(rho(r, c).real());
      im.push_back(rho(r, c).imag());
    }
  j["real"] = re;  // row-major
  j["imag"] = im;
  j["seed"] = seed;
  j["channel"] = spec_json(rep.channel);
  j["input_entropy"] = rep.input_entropy;
  j["output_entropy"] = rep.output_entropy;
  j["bound"] = rep.bound;
  j["gap"] = rep.gap;
  j["truncation_margin"] = rep.truncation_margin;
  return j;
}

namespace detail {

inline std::string verdict_text(const CmoeReport& r) { return r.verdict ? to_string(*r.verdict) : "suppressed"; }

struct ChannelTally {
  std::size_t trials = 0, violations = 0, suppressed = 0, equalities = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_margin = 0.0;
  json argmin;

  void add(const CmoeReport& r, const json& where) {
    ++trials;
    if (!r.verdict) {
      ++suppressed;
      return;
    }
    if (*r.verdict == Verdict::ViolationCandidate) ++violations;
    if (*r.verdict == Verdict::Equality) ++equalities;
    max_margin = std::max(max_margin, r.truncation_margin);
    if (r.gap < min_gap) {
      min_gap = r.gap;
      argmin = where;
    }
  }

  json to_json() const {
    json j;
    j["trials"] = trials;
    j["min_gap"] = trials > suppressed ? json(min_gap) : json();
    j["argmin"] = argmin;
    j["max_truncation_margin"] = max_margin;
    j["equalities"] = equalities;
    j["violations"] = violations;
    j["suppressed"] = suppressed;
    return j;
  }
};

}  // namespace detail

inline int run_verify_cmoe(const json& root, const RunContext& ctx) {
  CmoeConfig cfg;
  cfg.read(section_of(root, "cmoe"));
  json resolved;
  resolved["cmoe"] = cfg.to_json();
  prepare_out_dir(ctx.out);
  const ChannelOptions copt = cfg.channel_options();
  bool passed = true;
  json counterexamples = json::array();

  auto emit_counterexample = [&](const std::string& name, const DensityMatrix& rho, std::uint64_t seed,
                                 const CmoeReport& rep) {
    write_json(ctx.out / name, counterexample_json(rho, seed, rep));
    counterexamples.push_back(name);
    std::cerr << "violation candidate: " << rep.channel.describe() << " gap=" << fmt(rep.gap)
              << " margin=" << fmt(rep.truncation_margin) << " state written to " << (ctx.out / name).string() << '\n';
  };

  // Thermal inputs: every report must be an equality.
  ThermalConfig grid;
  grid.transmissivities = cfg.thermal_transmissivities;
  grid.gains = cfg.thermal_gains;
  grid.env_energies = cfg.thermal_env_energies;
  const auto tspecs = grid.channels();
  std::vector<std::pair<ChannelSpec, double>> tpoints;
  for (const auto& s : tspecs)
    for (double e : cfg.thermal_energies) tpoints.emplace_back(s, e);
  std::vector<CmoeReport> treps(tpoints.size());
  parallel_for(tpoints.size(), ctx.jobs, [&](std::size_t i) {
    const double e = tpoints[i].second;
    treps[i] = check_cmoe(tpoints[i].first, thermal_state(e, thermal_cutoff_for(e, cfg.thermal_input_deficit, 2)), copt);
  });
  CsvWriter tcsv(ctx.out / "cmoe_thermal.csv", {"channel", "lambda", "kappa", "env_energy", "input_energy",
                                                "input_entropy", "output_entropy", "bound", "gap",
                                                "truncation_margin", "output_dim", "output_deficit", "verdict"});
  double max_abs_gap = 0.0;
  std::size_t non_equal = 0;
  for (std::size_t i = 0; i < treps.size(); ++i) {
    const auto& r = treps[i];
    tcsv.row(to_string(r.channel.kind), r.channel.transmissivity.value_or(0.0), r.channel.gain.value_or(0.0),
             r.channel.env_energy, tpoints[i].second, r.input_entropy, r.output_entropy, r.bound, r.gap,
             r.truncation_margin, r.output_dim, r.output_deficit, detail::verdict_text(r));
    max_abs_gap = std::max(max_abs_gap, std::abs(r.gap));
    if (!r.verdict || *r.verdict != Verdict::Equality) ++non_equal;
  }
  tcsv.close();
  json thermal;
  thermal["points"] = treps.size();
  thermal["max_abs_gap"] = max_abs_gap;
  thermal["non_equality"] = non_equal;
  thermal["passed"] = non_equal == 0;
  passed = passed && non_equal == 0;

  json doc = document("verify-cmoe", ctx, resolved);
  doc["thermal_equality"] = thermal;

  if (!cfg.thermal_only) {
    // Random and entropy-pinned inputs. Trial t at cutoff d draws one state
    // (kind cycling pure / mixed / diagonal / pinned) and sends it through
    // every channel.
    const std::uint64_t rseed = stream_seed(ctx.seed, 0xc40e);
    const std::size_t nch = cfg.channels.size();
    struct Trial {
      std::size_t cutoff = 0, trial = 0, rank = 0;
      SampleKind kind = SampleKind::Pure;
      std::uint64_t seed = 0;
      std::vector<CmoeReport> reports;
    };
    std::vector<Trial> trials(cfg.cutoffs.size() * cfg.trials_per_cutoff);
    parallel_for(trials.size(), ctx.jobs, [&](std::size_t i) {
      Trial t;
      t.cutoff = cfg.cutoffs[i / cfg.trials_per_cutoff];
      t.trial = i % cfg.trials_per_cutoff;
      t.kind = static_cast<SampleKind>(t.trial % 4);
      t.seed = stream_seed(rseed, t.cutoff) ^ splitmix64(t.trial);
      Rng rng(t.seed);
      const std::size_t d = t.cutoff;
      if (t.kind == SampleKind::RandomDiagonal) {
        const auto p = random_diagonal(rng, d);
        t.rank = d;
        for (const auto& spec : cfg.channels) t.reports.push_back(check_cmoe(spec, p, copt));
      } else {
        DensityMatrix rho;
        if (t.kind == SampleKind::Pure) {
          rho = random_pure(rng, d);
          t.rank = 1;
        } else if (t.kind == SampleKind::GinibreMixed) {
          t.rank = rng.uniform_int(1, d);
          rho = random_mixed(rng, d, t.rank);
        } else {
          const double target = rng.uniform() * (std::log(static_cast<double>(d)) - 1e-6);
          rho = entropy_pinned_state(rng, d, target).state;
          t.rank = d;
        }
        const double s_in = von_neumann_entropy(rho);
        for (const auto& spec : cfg.channels) t.reports.push_back(check_cmoe(spec, rho, s_in, copt));
      }
      trials[i] = std::move(t);
    });

    CsvWriter csv(ctx.out / "cmoe_trials.csv",
                  {"cutoff", "trial", "sample", "rank", "channel", "lambda", "kappa", "env_energy", "input_entropy",
                   "output_entropy", "bound", "gap", "truncation_margin", "output_dim", "output_deficit", "verdict"});
    std::vector<detail::ChannelTally> tally(nch);
    for (const auto& t : trials) {
      for (std::size_t c = 0; c < nch; ++c) {
        const auto& r = t.reports[c];
        csv.row(t.cutoff, t.trial, to_string(t.kind), t.rank, to_string(r.channel.kind),
                r.channel.transmissivity.value_or(0.0), r.channel.gain.value_or(0.0), r.channel.env_energy,
                r.input_entropy, r.output_entropy, r.bound, r.gap, r.truncation_margin, r.output_dim, r.output_deficit,
                detail::verdict_text(r));
        json where;
        where["cutoff"] = t.cutoff;
        where["trial"] = t.trial;
        where["sample"] = to_string(t.kind);
        tally[c].add(r, where);
        if (r.verdict == Verdict::ViolationCandidate) {
          // Regenerate the input from its recorded seed for the post-mortem file.
          Rng rng(t.seed);
          DensityMatrix rho;
          if (t.kind == SampleKind::RandomDiagonal) rho = random_diagonal(rng, t.cutoff).to_density();
          else if (t.kind == SampleKind::Pure) rho = random_pure(rng, t.cutoff);
          else if (t.kind == SampleKind::GinibreMixed) rho = random_mixed(rng, t.cutoff, rng.uniform_int(1, t.cutoff));
          else rho = entropy_pinned_state(rng, t.cutoff, rng.uniform() * (std::log(static_cast<double>(t.cutoff)) - 1e-6)).state;
          emit_counterexample("counterexample_" + std::string(to_string(r.channel.kind)) + "_d" +
                                  std::to_string(t.cutoff) + "_t" + std::to_string(t.trial) + ".json",
                              rho, t.seed, r);
        }
      }
    }
    csv.close();
    json random = json::array();
    for (std::size_t c = 0; c < nch; ++c) {
      json j = tally[c].to_json();
      j["channel"] = spec_json(cfg.channels[c]);
      random.push_back(j);
      passed = passed && tally[c].violations == 0 && tally[c].suppressed == 0;
    }
    doc["random"] = random;

    // Adversarial local search.
    const std::uint64_t aseed = stream_seed(ctx.seed, 0xad5);
    std::vector<SearchResult> results(nch * cfg.searches);
    std::vector<double> targets(results.size());
    parallel_for(results.size(), ctx.jobs, [&](std::size_t i) {
      const std::size_t c = i / cfg.searches, j = i % cfg.searches;
      Rng rng = Rng::substream(aseed, i);
      targets[i] = static_cast<double>(j + 1) / static_cast<double>(cfg.searches + 1) *
                   std::log(static_cast<double>(cfg.search_cutoff));
      SearchOptions so;
      so.iterations = cfg.search_iterations;
      so.step = cfg.search_step;
      so.channel = copt;
      results[i] = adversarial_search(cfg.channels[c], targets[i], cfg.search_cutoff, rng, so);
    });
    CsvWriter acsv(ctx.out / "cmoe_adversarial.csv",
                   {"channel", "lambda", "kappa", "env_energy", "search", "target_entropy", "initial_gap", "best_gap",
                    "truncation_margin", "accepted", "final_step", "max_pin_error", "verdict"});
    json adversarial = json::array();
    for (std::size_t c = 0; c < nch; ++c) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t violations = 0;
      for (std::size_t j = 0; j < cfg.searches; ++j) {
        const std::size_t i = c * cfg.searches + j;
        const auto& r = results[i];
        acsv.row(to_string(r.best.channel.kind), r.best.channel.transmissivity.value_or(0.0),
                 r.best.channel.gain.value_or(0.0), r.best.channel.env_energy, j, targets[i], r.initial.gap, r.best.gap,
                 r.best.truncation_margin, r.accepted, r.final_step, r.max_pin_error, detail::verdict_text(r.best));
        best = std::min(best, r.best.gap);
        if (r.best.verdict == Verdict::ViolationCandidate) {
          ++violations;
          emit_counterexample("counterexample_" + std::string(to_string(r.best.channel.kind)) + "_search" +
                                  std::to_string(j) + ".json",
                              r.best_state, aseed ^ splitmix64(i), r.best);
        }
      }
      json a;
      a["channel"] = spec_json(cfg.channels[c]);
      a["searches"] = cfg.searches;
      a["iterations"] = cfg.search_iterations;
      a["min_best_gap"] = best;
      a["violations"] = violations;
      adversarial.push_back(a);
      passed = passed && violations == 0;
    }
    acsv.close();
    doc["adversarial"] = adversarial;

    // Renyi chain for the quantum-limited amplifier.
    const std::uint64_t cseed = stream_seed(ctx.seed, 0xc4a1);
    const std::size_t nq = cfg.chain_qs.size();
    std::vector<RenyiChain> chains(cfg.chain_trials * nq);
    std::vector<double> zbars(chains.size());
    parallel_for(cfg.chain_trials, ctx.jobs, [&](std::size_t t) {
      Rng rng = Rng::substream(cseed, t);
      const auto rho = random_mixed(rng, cfg.chain_cutoff, rng.uniform_int(2, cfg.chain_cutoff));
      const double zbar = z_of_E(g_inv(von_neumann_entropy(rho)));
      for (std::size_t k = 0; k < nq; ++k) {
        const double p = solve_p_of_q(zbar, cfg.chain_kappa, cfg.chain_qs[k]).p;
        chains[t * nq + k] = renyi_chain(rho, cfg.chain_kappa, p, cfg.chain_qs[k], copt);
        zbars[t * nq + k] = zbar;
      }
    });
    CsvWriter ccsv(ctx.out / "cmoe_renyi_chain.csv",
                   {"trial", "kappa", "q", "p", "z_bar", "entropy_out", "renyi_q_out", "renyi_q_thermal_out",
                    "renyi_p_in", "renyi_p_thermal", "prefactor", "rhs", "step1_gap", "step2_gap", "margin_vn",
                    "margin_q", "holds"});
    std::size_t chain_fail = 0;
    double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
    for (std::size_t i = 0; i < chains.size(); ++i) {
      const auto& c = chains[i];
      ccsv.row(i / nq, c.kappa, c.q, c.p, zbars[i], c.s_out, c.s_q_out, c.s_q_thermal_out, c.s_p_in, c.s_p_thermal,
               c.prefactor, c.rhs, c.step1_gap(), c.step2_gap(), c.margin_vn, c.margin_q, c.holds() ? "yes" : "no");
      min1 = std::min(min1, c.step1_gap());
      min2 = std::min(min2, c.step2_gap());
      if (!c.holds()) ++chain_fail;
    }
    ccsv.close();
    json chain;
    chain["trials"] = chains.size();
    chain["min_step1_gap"] = min1;
    chain["min_step2_gap"] = min2;
    chain["failures"] = chain_fail;
    chain["passed"] = chain_fail == 0;
    doc["renyi_chain"] = chain;
    passed = passed && chain_fail == 0;
  }

  doc["counterexamples"] = counterexamples;
  doc["passed"] = passed;
  write_json(ctx.out / "cmoe_summary.json", doc);
  return passed ? kPass : kClaimFailure;
}

}  // namespace cmoe::cli
