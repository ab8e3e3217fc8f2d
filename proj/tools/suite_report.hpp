#pragma once

// report: merge the suite summaries in one output directory into report.json
// and report.md, after checking every CSV row against its header.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "suite_common.hpp"

namespace cmoe::cli {

struct CsvCheck {
  std::size_t rows = 0;
};

// Every row must have the header's width and no empty cell; a cell is either
// a number or a lower-case token.
inline CsvCheck validate_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  auto token_ok = [](const std::string& c) {
    if (c.empty()) return false;
    char* end = nullptr;
    std::strtod(c.c_str(), &end);
    if (end == c.c_str() + c.size()) return true;
    for (char ch : c)
      if (!((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_')) return false;
    return true;
  };
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ConfigError(path.string() + ":1: missing CSV header");
  const std::size_t width = split(line).size();
  CsvCheck out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cells = split(line);
    if (cells.size() != width) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                        " fields, found " + std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!token_ok(cells[i])) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed field " + std::to_string(i + 1) +
                          " '" + cells[i] + "'");
      }
    }
    ++out.rows;
  }
  return out;
}

inline json read_summary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

struct SuiteSpec {
  const char* name;
  const char* verifies;
  const char* summary_file;
  std::vector<const char*> csv_files;
};

inline const std::vector<SuiteSpec>& report_suites() {
  static const std::vector<SuiteSpec> suites{
      {"verify-thermal-laws", "thermal states map to thermal states; thermal-noise channels factor into quantum-limited ones",
       "thermal_summary.json", {"thermal_laws.csv", "decomposition.csv"}},
      {"verify-cmoe", "thermal inputs minimise output entropy at fixed input entropy",
       "cmoe_summary.json", {"cmoe_thermal.csv", "cmoe_trials.csv", "cmoe_adversarial.csv", "cmoe_renyi_chain.csv"}},
      {"verify-lemma", "scalar inequalities, p(q) root and p->q norm saturation by thermal states",
       "lemma_summary.json",
       {"lemma_grid.csv", "lemma_margins.csv", "lemma_pq.csv", "lemma_pq_trend.csv", "lemma_saturation.csv",
        "lemma_norms.csv"}},
  };
  return suites;
}

namespace detail {

inline const char* verdict_of(const json& j) {
  if (!j.is_object() || !j.contains("passed")) return "SKIPPED";
  return j["passed"].get<bool>() ? "PASS" : "FAIL";
}

// One line per check: name, what it verifies, verdict and the headline number.
inline json check(const char* name, const char* verifies, const json& section, const char* metric_key) {
  json j;
  j["check"] = name;
  j["verifies"] = verifies;
  j["status"] = verdict_of(section);
  if (section.is_object() && section.contains(metric_key)) {
    j["metric"] = metric_key;
    j["value"] = section[metric_key];
  }
  return j;
}

inline json cmoe_inequality(const json& s) {
  json sec;
  if (!s.contains("random")) return sec;
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : s["random"]) {
    ok = ok && r["violations"] == 0 && r["suppressed"] == 0;
    if (!r["min_gap"].is_null()) worst = std::min(worst, r["min_gap"].get<double>());
  }
  for (const auto& a : s["adversarial"]) ok = ok && a["violations"] == 0;
  sec["passed"] = ok;
  sec["min_gap"] = worst;
  return sec;
}

}  // namespace detail

inline int run_report(const json& root, const RunContext& ctx) {
  std::filesystem::path input = ctx.out;
  {
    Section s(section_of(root, "report"), "report");
    std::string dir;
    s.get("input_dir", dir);
    s.finish();
    if (!dir.empty()) input = dir;
  }
  if (!std::filesystem::is_directory(input)) throw ConfigError("report: input directory '" + input.string() + "' does not exist");

  json suites = json::array(), checks = json::array();
  std::size_t present = 0;
  bool any_fail = false;
  for (const auto& s : report_suites()) {
    const auto summary_path = input / s.summary_file;
    json entry;
    entry["suite"] = s.name;
    entry["verifies"] = s.verifies;
    if (!std::filesystem::exists(summary_path)) {
      entry["status"] = "SKIPPED";
      suites.push_back(entry);
      continue;
    }
    ++present;
    const json sum = read_summary(summary_path);
    json rows;
    for (const char* f : s.csv_files) {
      const auto p = input / f;
      if (std::filesystem::exists(p)) rows[f] = validate_csv(p).rows;
    }
    entry["status"] = sum.value("passed", false) ? "PASS" : "FAIL";
    entry["seed"] = sum.value("seed", json());
    entry["csv_rows"] = rows;
    if (sum.contains("exploratory")) entry["exploratory"] = sum["exploratory"];
    suites.push_back(entry);
    any_fail = any_fail || entry["status"] == "FAIL";

    const std::string name = s.name;
    if (name == "verify-thermal-laws") {
      checks.push_back(detail::check("thermal_laws", "channel output of a thermal input equals the predicted thermal state",
                                     sum.value("thermal_laws", json()), "max_spectral_distance"));
      checks.push_back(detail::check("decomposition", "thermal attenuator/amplifier equal quantum-limited compositions",
                                     sum.value("decomposition", json()), "max_trace_distance_attenuator"));
    } else if (name == "verify-cmoe") {
      checks.push_back(detail::check("cmoe_equality", "thermal inputs attain the output-entropy bound",
                                     sum.value("thermal_equality", json()), "max_abs_gap"));
      checks.push_back(detail::check("cmoe_inequality", "no input beats the thermal output-entropy bound",
                                     detail::cmoe_inequality(sum), "min_gap"));
      checks.push_back(detail::check("renyi_chain", "von Neumann to Renyi chain for the quantum-limited amplifier",
                                     sum.value("renyi_chain", json()), "min_step2_gap"));
    } else {
      checks.push_back(detail::check("lemma_grid", "scalar inequalities and derivative identities on the grid",
                                     sum.value("grid", json()), "points"));
      checks.push_back(detail::check("p_of_q", "p(q) root, its interval and the thermal ratio maximiser",
                                     sum.value("p_of_q", json()), "max_abs_residual"));
      checks.push_back(detail::check("norm_saturation", "random p->q ratios stay below the thermal maximum",
                                     sum.value("saturation", json()), "max_ratio"));
      checks.push_back(detail::check("thermal_norms", "closed-form thermal Schatten norms match spectra",
                                     sum.value("thermal_norms", json()), "max_abs_diff"));
    }
  }
  if (present == 0) throw ConfigError("report: no suite summaries found in '" + input.string() + "'");

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "report";
  doc["suites"] = suites;
  doc["checks"] = checks;
  doc["passed"] = !any_fail;
  prepare_out_dir(ctx.out);
  write_json(ctx.out / "report.json", doc);

  std::ofstream md(ctx.out / "report.md", std::ios::binary);
  if (!md) throw ConfigError("cannot write '" + (ctx.out / "report.md").string() + "'");
  md << "# Verification report\n\n| suite | verifies | status |\n|---|---|---|\n";
  for (const auto& s : suites)
    md << "| " << s["suite"].get<std::string>() << " | " << s["verifies"].get<std::string>() << " | "
       << s["status"].get<std::string>() << " |\n";
  md << "\n| check | verifies | status | metric | value |\n|---|---|---|---|---|\n";
  for (const auto& c : checks) {
    md << "| " << c["check"].get<std::string>() << " | " << c["verifies"].get<std::string>() << " | "
       << c["status"].get<std::string>() << " | " << c.value("metric", std::string()) << " | "
       << (c.contains("value") ? c["value"].dump() : std::string()) << " |\n";
  }
  if (!md) throw ConfigError("failed writing report.md");
  return any_fail ? kClaimFailure : kPass;
}

}  // namespace cmoe::cli
