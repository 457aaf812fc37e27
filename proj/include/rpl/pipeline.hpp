#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpl/nonlinearity.hpp"
#include "rpl/status.hpp"

namespace rpl {

struct SimulationBlock {
  double dt = 0.05;
  double T = 100.0;
  int stride = 10;
  bool sponge = true;
  double sponge_onset = -1.0;  // negative: 0.8 R
  double sponge_strength = 1.0;
  int mode = 0;                // zero-based internal mode to excite
  double amplitude = 0.01;
  double phase = 0.0;
  double transient = 0.25;
  int windows = 16;
  double comfort = 0.5;
};

struct PipelineConfig {
  Nonlinearity nl;
  int dimension = 3;
  double R = 0.0;
  double h = 0.0;
  int order = 4;
  double omega = 0.0;
  std::vector<double> sweep;
  Tolerances tol;
  std::optional<int> K_max;
  std::vector<std::string> stages;  // closed under dependencies, in execution order
  SimulationBlock sim;
  std::string output_dir;
  std::string cache_dir;  // empty: <output_dir>/cache
  std::uint64_t seed = 0;

  // canonical form of every input that can change a number
  nlohmann::json canonical() const;
};

// INI-style text with [sections] and key = value; '#' and ';' start comments.
// Relative paths are resolved against base_dir.
PipelineConfig parse_config(const std::string& text, const std::string& base_dir = ".");
PipelineConfig load_config(const std::string& path);

const std::vector<std::string>& stage_names();

// SHA-256 of the compact dump of a json value (objects are key-sorted)
std::string cache_key(const nlohmann::json& inputs);

struct PipelineResult {
  int exit_code = 0;
  nlohmann::json report;   // deterministic content of report.json
  nlohmann::json timings;  // wall times and cache counters
  int cache_hits = 0;
  int cache_misses = 0;
};

// runs all configured stages and writes report.json, timings.json and stage CSVs
PipelineResult run_pipeline(const PipelineConfig& cfg);
int run_pipeline(const std::string& config_path);

// every double printed with 17 significant digits
std::string dump_json(const nlohmann::json& j);

// human-readable summary of <dir>/report.json
std::string summarize_report(const std::string& dir);

// removes cache entries and stray temporaries; returns the number of files removed
int clean_cache(const std::string& dir);

}  // namespace rpl
