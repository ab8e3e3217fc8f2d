#pragma once

// Plumbing shared by the verification suites: config reading, CSV/JSON
// emission, deterministic worker pool and exit codes.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmoe/channels.hpp"
#include "cmoe/sampler.hpp"

namespace cmoe::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kPass = 0, kClaimFailure = 1, kConfigError = 2 };

// Bad configuration or unusable input/output paths (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunContext {
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::filesystem::path out = "cmoe-out";
  bool exploratory = false;
};

// Seed of a named sub-suite, so suites draw from disjoint streams.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed ^ splitmix64(tag)); }

// ---------------------------------------------------------------------------
// Config reading. Unknown keys are errors so typos cannot silently fall back
// to defaults.

class Section {
 public:
  Section(const json& j, std::string name) : name_(std::move(name)) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
    j_ = &j;
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_ || !j_->contains(key)) return;
    try {
      out = (*j_)[key].template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + name_ + "." + key + "': " + e.what());
    }
  }

  void finish() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) throw ConfigError("config '" + name_ + "': unknown key '" + k + "'");
    }
  }

 private:
  std::string name_;
  const json* j_ = nullptr;
  std::set<std::string> seen_;
};

inline json section_of(const json& root, const char* name) {
  if (root.is_object() && root.contains(name)) return root[name];
  return json();
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

inline json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion) {
    throw ConfigError("config schema_version must be " + std::to_string(kSchemaVersion));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Output.

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary), width_(header.size()) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    write_line(header);
  }

  template <class... Ts>
  void row(const Ts&... fields) {
    static_assert(sizeof...(Ts) > 0);
    std::vector<std::string> cells{fmt(fields)...};
    if (cells.size() != width_) throw std::logic_error("CsvWriter: row width mismatch in " + path_.string());
    write_line(cells);
  }

  void close() {
    out_.close();
    if (!out_) throw ConfigError("failed writing '" + path_.string() + "'");
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

inline void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

// Common header of every JSON document a suite writes.
inline json document(const char* command, const RunContext& ctx, const json& resolved) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["seed"] = ctx.seed;
  j["config"] = resolved;
  return j;
}

inline json spec_json(const ChannelSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  if (s.transmissivity) j["lambda"] = *s.transmissivity;
  if (s.gain) j["kappa"] = *s.gain;
  j["env_energy"] = s.env_energy;
  return j;
}

inline ChannelSpec spec_from_json(const json& j) {
  Section sec(j, "channel");
  std::string kind;
  double lambda = -1.0, kappa = -1.0, e = 0.0;
  sec.get("kind", kind);
  sec.get("lambda", lambda);
  sec.get("kappa", kappa);
  sec.get("env_energy", e);
  sec.finish();
  try {
    switch (channel_kind_from_string(kind)) {
      case ChannelKind::Attenuator: return ChannelSpec::attenuator(lambda, e);
      case ChannelKind::Amplifier: return ChannelSpec::amplifier(kappa, e);
      case ChannelKind::AdditiveNoise: return ChannelSpec::additive_noise(e);
      case ChannelKind::ContravariantAmplifier: return ChannelSpec::contravariant(kappa, e);
    }
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("invalid channel: ") + ex.what());
  }
  throw ConfigError("invalid channel");
}

// ---------------------------------------------------------------------------

// Runs fn(i) for i in [0, n) on `jobs` threads. Results must be written to
// slot i by the callee, so the merge order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cmoe::cli
