#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cmoe/errors.hpp"
#include "suite_cmoe.hpp"
#include "suite_common.hpp"
#include "suite_lemma.hpp"
#include "suite_report.hpp"
#include "suite_thermal.hpp"

namespace {

using namespace cmoe::cli;

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out;
  bool exploratory = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--seed", f.seed, "master seed (overrides config)");
  sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  sub->add_option("--out", f.out, "output directory");
}

RunContext resolve(const json& root, const Flags& f, const CLI::App* sub) {
  RunContext ctx;
  Section s(root, "config");
  int schema = kSchemaVersion;
  s.get("schema_version", schema);
  s.get("seed", ctx.seed);
  for (const char* k : {"thermal", "decomposition", "cmoe", "lemma", "report"}) {
    json ignored;
    s.get(k, ignored);
  }
  s.finish();
  if (sub->count("--seed")) ctx.seed = f.seed;
  ctx.jobs = f.jobs;
  if (!f.out.empty()) ctx.out = f.out;
  ctx.exploratory = f.exploratory;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for phase-covariant Gaussian channels in truncated Fock space"};
  app.require_subcommand(1);
  Flags f;
  auto* thermal = app.add_subcommand("verify-thermal-laws", "thermal fixed points and channel decompositions");
  auto* cmoe = app.add_subcommand("verify-cmoe", "output entropy versus the thermal bound");
  auto* lemma = app.add_subcommand("verify-lemma", "scalar inequalities, p(q) root and norm saturation");
  auto* report = app.add_subcommand("report", "merge suite summaries into report.json and report.md");
  for (auto* sub : {thermal, cmoe, lemma, report}) add_common(sub, f);
  lemma->add_flag("--exploratory", f.exploratory, "allow p, q >= 3/2; flagged in the output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfigError;
  }

  try {
    const json root = load_config(f.config);
    if (thermal->parsed()) return run_verify_thermal_laws(root, resolve(root, f, thermal));
    if (cmoe->parsed()) return run_verify_cmoe(root, resolve(root, f, cmoe));
    if (lemma->parsed()) return run_verify_lemma(root, resolve(root, f, lemma));
    return run_report(root, resolve(root, f, report));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const cmoe::LemmaViolation& e) {
    std::cerr << "claim failure: " << e.what() << '\n';
    return kClaimFailure;
  } catch (const cmoe::SaturationViolation& e) {
    std::cerr << "claim failure: " << e.what() << '\n';
    return kClaimFailure;
  } catch (const cmoe::TruncationError& e) {
    std::cerr << "claim failure: " << e.what() << '\n';
    return kClaimFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
