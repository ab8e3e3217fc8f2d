// Runs the CLI end to end twice with the same seed and checks the ten
// acceptance criteria from the written CSV/JSON files. One PASS/FAIL line per
// criterion; exit status 0 iff all pass.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#ifndef CMOE_CLI_PATH
#error "CMOE_CLI_PATH must name the cmoe_cli binary"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20261015;
constexpr double kSlack = 1e-9;

struct Run {
  int code = -1;
  double seconds = 0.0;
};

Run run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CMOE_CLI_PATH) + " " + args + " >>" + log.string() + " 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  Run r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

// Header-indexed CSV table.
struct Table {
  std::map<std::string, std::size_t> col;
  std::vector<std::vector<std::string>> rows;

  double num(std::size_t r, const std::string& c) const { return std::stod(rows[r].at(col.at(c))); }
  const std::string& str(std::size_t r, const std::string& c) const { return rows[r].at(col.at(c)); }
  std::size_t size() const { return rows.size(); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  Table t;
  std::string line;
  std::getline(in, line);
  const auto head = split(line);
  for (std::size_t i = 0; i < head.size(); ++i) t.col[head[i]] = i;
  while (std::getline(in, line)) {
    auto cells = split(line);
    if (cells.size() != head.size()) throw std::runtime_error("ragged row in " + p.string());
    t.rows.push_back(std::move(cells));
  }
  return t;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

template <class F>
void criterion(int id, const char* name, F&& f) {
  try {
    report(id, name, f());
  } catch (const std::exception& e) {
    report(id, name, {false, std::string("error: ") + e.what()});
  }
}

// Mean output photon number of each family on a thermal input of mean n.
double predicted_energy(const std::string& kind, double lambda, double kappa, double e, double n) {
  if (kind == "attenuator") return lambda * n + (1 - lambda) * e;
  if (kind == "amplifier") return kappa * n + (kappa - 1) * (e + 1);
  if (kind == "additive_noise") return n + e;
  if (kind == "contravariant") return (kappa - 1) * (n + 1) + kappa * e;
  throw std::runtime_error("unknown channel " + kind);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "cmoe_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path a = work / "run_a", b = work / "run_b", log = work / "cli.log";
  const std::string common = " --seed " + std::to_string(kSeed) + " --jobs 4 --out ";

  std::map<std::string, Run> timing;
  for (const auto& [dir, tag] : {std::pair{a, std::string("a")}, std::pair{b, std::string("b")}}) {
    for (const char* cmd : {"verify-thermal-laws", "verify-cmoe", "verify-lemma", "report"}) {
      const Run r = run_cli(std::string(cmd) + common + dir.string(), log);
      timing[tag + ":" + cmd] = r;
      std::cout << "run " << tag << " " << cmd << ": exit " << r.code << ", " << num(r.seconds) << " s" << std::endl;
    }
  }
  auto exit_ok = [&](const char* cmd) { return timing["a:" + std::string(cmd)].code == 0; };
  auto secs = [&](const char* cmd) { return timing["a:" + std::string(cmd)].seconds; };

  criterion(1, "thermal transformation laws", [&]() -> Outcome {
    const auto t = read_csv(a / "thermal_laws.csv");
    const std::set<double> energies{0.0, 0.5, 1.0, 2.0};
    double worst = 0.0;
    bool ok = t.size() == 56 && exit_ok("verify-thermal-laws");
    for (std::size_t r = 0; r < t.size(); ++r) {
      const double n = t.num(r, "input_energy");
      ok = ok && energies.count(n) && t.num(r, "input_deficit") <= 1e-9 && t.str(r, "status") == "ok";
      ok = ok && close(t.num(r, "predicted_energy"),
                       predicted_energy(t.str(r, "channel"), t.num(r, "lambda"), t.num(r, "kappa"),
                                        t.num(r, "env_energy"), n),
                       1e-12);
      worst = std::max(worst, t.num(r, "spectral_distance"));
    }
    // The command also runs the decomposition, so its total time is an upper bound.
    ok = ok && worst <= 1e-7 && secs("verify-thermal-laws") <= 60.0;
    return {ok, std::to_string(t.size()) + " points, max spectral distance " + num(worst) + ", command " +
                    num(secs("verify-thermal-laws")) + " s (budget 60 s)"};
  });

  criterion(2, "decomposition into quantum-limited channels", [&]() -> Outcome {
    const auto t = read_csv(a / "decomposition.csv");
    const auto cfg = read_json(a / "thermal_summary.json")["config"]["decomposition"];
    std::map<std::string, std::set<std::size_t>> trials;
    double worst = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) {
      trials[t.str(r, "channel")].insert(static_cast<std::size_t>(t.num(r, "trial")));
      worst = std::max(worst, t.num(r, "trace_distance"));
    }
    const bool ok = cfg["dim"] == 12 && trials["attenuator"].size() == 50 && trials["amplifier"].size() == 50 &&
                    t.size() == 400 && worst <= 1e-7 && secs("verify-thermal-laws") <= 120.0;
    return {ok, std::to_string(t.size()) + " rows, max trace distance " + num(worst)};
  });

  criterion(3, "thermal inputs attain the entropy bound", [&]() -> Outcome {
    const auto t = read_csv(a / "cmoe_thermal.csv");
    double worst = 0.0;
    bool ok = t.size() == 56;
    for (std::size_t r = 0; r < t.size(); ++r) {
      worst = std::max(worst, std::abs(t.num(r, "gap")));
      ok = ok && t.str(r, "verdict") == "equality";
    }
    ok = ok && worst <= 1e-6;
    return {ok, std::to_string(t.size()) + " thermal inputs, max |gap| " + num(worst)};
  });

  criterion(4, "no input beats the entropy bound", [&]() -> Outcome {
    const auto t = read_csv(a / "cmoe_trials.csv");
    std::map<std::string, std::size_t> per_kind;
    std::set<double> cutoffs;
    double worst = std::numeric_limits<double>::infinity();
    bool ok = exit_ok("verify-cmoe");
    for (std::size_t r = 0; r < t.size(); ++r) {
      ++per_kind[t.str(r, "channel")];
      cutoffs.insert(t.num(r, "cutoff"));
      const double excess = t.num(r, "gap") + t.num(r, "truncation_margin");
      ok = ok && t.str(r, "verdict") != "suppressed" && excess >= -kSlack;
      worst = std::min(worst, t.num(r, "gap"));
    }
    ok = ok && cutoffs == std::set<double>{16.0, 24.0} && per_kind.size() == 4;
    for (const auto& [k, n] : per_kind) ok = ok && n >= 10000;
    const auto adv = read_csv(a / "cmoe_adversarial.csv");
    std::map<std::string, std::size_t> searches;
    double adv_worst = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < adv.size(); ++r) {
      ++searches[adv.str(r, "channel")];
      ok = ok && adv.num(r, "best_gap") + adv.num(r, "truncation_margin") >= -kSlack;
      adv_worst = std::min(adv_worst, adv.num(r, "best_gap"));
    }
    for (const auto& [k, n] : searches) ok = ok && n == 10;
    ok = ok && searches.size() == 4 && read_json(a / "cmoe_summary.json")["config"]["cmoe"]["search_iterations"] == 200;
    ok = ok && secs("verify-cmoe") <= 360.0;
    std::size_t fewest = SIZE_MAX;
    for (const auto& [k, n] : per_kind) fewest = std::min(fewest, n);
    return {ok, std::to_string(fewest) + "+ states per channel, min gap " + num(worst) + ", adversarial min gap " +
                    num(adv_worst) + ", command " + num(secs("verify-cmoe")) + " s (budget 360 s)"};
  });

  criterion(5, "Renyi chain for the amplifier", [&]() -> Outcome {
    const auto t = read_csv(a / "cmoe_renyi_chain.csv");
    std::map<double, std::size_t> per_q;
    bool ok = true;
    double w1 = 1e300, w2 = 1e300;
    for (std::size_t r = 0; r < t.size(); ++r) {
      const double q = t.num(r, "q"), p = t.num(r, "p");
      ++per_q[q];
      ok = ok && t.num(r, "kappa") == 2.0 && p > 1.0 && p < q;
      const double s1 = t.num(r, "entropy_out") - t.num(r, "renyi_q_out");
      const double rhs = t.num(r, "renyi_q_thermal_out") +
                         q / (q - 1) * (p - 1) / p * (t.num(r, "renyi_p_in") - t.num(r, "renyi_p_thermal"));
      const double s2 = t.num(r, "renyi_q_out") - rhs;
      ok = ok && s1 >= -(t.num(r, "margin_vn") + kSlack) && s2 >= -(t.num(r, "margin_q") + kSlack);
      w1 = std::min(w1, s1);
      w2 = std::min(w2, s2);
    }
    ok = ok && per_q.size() == 2 && per_q[1.3] == 100 && per_q[1.1] == 100;
    return {ok, std::to_string(t.size()) + " chains, min step gaps " + num(w1) + " / " + num(w2)};
  });

  criterion(6, "scalar inequality grid", [&]() -> Outcome {
    const auto m = read_csv(a / "lemma_margins.csv");
    const auto sum = read_json(a / "lemma_summary.json");
    bool ok = exit_ok("verify-lemma") && sum["grid"]["z_points"] == 199 && sum["grid"]["pq_points"] == 25;
    double min_margin = 1e300, max_res = 0.0;
    for (std::size_t r = 0; r < m.size(); ++r) {
      ok = ok && m.num(r, "failures") == 0;
      if (m.str(r, "kind") == "residual") {
        ok = ok && m.num(r, "worst") <= 1e-6;
        max_res = std::max(max_res, m.num(r, "worst"));
      } else {
        ok = ok && m.num(r, "worst") > 0.0;
        min_margin = std::min(min_margin, m.num(r, "worst"));
      }
    }
    const auto g = read_csv(a / "lemma_grid.csv");
    for (std::size_t r = 0; r < g.size(); ++r) ok = ok && g.num(r, "min_fpq") > 0.0 && g.num(r, "max_derphi_residual") <= 1e-6;
    ok = ok && m.size() == 15 && g.size() == 4 * 300 && secs("verify-lemma") <= 60.0;
    return {ok, std::to_string(m.size()) + " families, min margin " + num(min_margin) + ", max derivative residual " +
                    num(max_res) + ", command " + num(secs("verify-lemma")) + " s (budget 60 s)"};
  });

  criterion(7, "p(q) solver", [&]() -> Outcome {
    const auto t = read_csv(a / "lemma_pq.csv");
    bool ok = t.size() == 18;
    double worst = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) {
      const double p = t.num(r, "p"), q = t.num(r, "q");
      worst = std::max(worst, std::abs(t.num(r, "residual")));
      ok = ok && std::abs(t.num(r, "residual")) <= 1e-12 && p > 1.0 && p < q &&
           std::abs(t.num(r, "z_star") - t.num(r, "z_bar")) <= t.num(r, "grid_step");
    }
    const auto tr = read_csv(a / "lemma_pq_trend.csv");
    for (std::size_t r = 0; r < tr.size(); ++r) {
      ok = ok && tr.str(r, "status") == "ok";
      if (r % 3) ok = ok && tr.num(r, "p_minus_1") < tr.num(r - 1, "p_minus_1");
    }
    ok = ok && tr.size() == 18;
    return {ok, std::to_string(t.size()) + " roots, max residual " + num(worst) + ", trend rows " + std::to_string(tr.size())};
  });

  criterion(8, "p->q norm saturation", [&]() -> Outcome {
    const auto t = read_csv(a / "lemma_saturation.csv");
    bool ok = t.size() == 500;
    double worst = 0.0, tmax = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) {
      ok = ok && t.num(r, "kappa") == 2.0 && t.num(r, "p") == 1.2 && t.num(r, "q") == 1.35 && t.num(r, "cutoff") == 24;
      tmax = t.num(r, "thermal_max");
      ok = ok && t.num(r, "ratio") <= tmax + t.num(r, "margin") + kSlack;
      worst = std::max(worst, t.num(r, "ratio"));
    }
    return {ok, "max ratio " + num(worst) + " vs thermal max " + num(tmax)};
  });

  criterion(9, "closed-form vs spectral thermal norms", [&]() -> Outcome {
    const auto t = read_csv(a / "lemma_norms.csv");
    bool ok = t.size() == 199 * 25;
    double worst = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) {
      const double z = t.num(r, "z"), al = t.num(r, "alpha");
      // Independent closed form, evaluated here rather than read back.
      const double closed = std::log1p(-z) - std::log1p(-std::pow(z, al)) / al;
      const double d = std::abs(closed - t.num(r, "spectral"));
      ok = ok && d <= 1e-10 + t.num(r, "tail_bound") + 1e-14;
      worst = std::max(worst, d);
    }
    return {ok, std::to_string(t.size()) + " (z, alpha) points, max difference " + num(worst)};
  });

  criterion(10, "determinism", [&]() -> Outcome {
    std::size_t files = 0, differ = 0;
    std::string first;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      const auto other = b / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        ++differ;
        if (first.empty()) first = e.path().filename().string();
      }
    }
    std::size_t files_b = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++files_b;
    const bool ok = files > 0 && differ == 0 && files == files_b;
    return {ok, std::to_string(files) + " files compared" + (first.empty() ? "" : ", first difference in " + first)};
  });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
