#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnpmed/io.hpp"

namespace bnpmed::io {

// Fully resolved run configuration: config-file values overlaid by CLI flags
// (CLI wins; overrides are recorded for provenance).
struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string schema_path;
  std::optional<SchemaSpec> inline_schema;
  std::string truth_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  SamplerConfig sampler;
  std::vector<std::string> effects{"TE", "NDE", "JNIE"};
  int gcomp_draws = 200;
  scenario::ScenarioSpec scen = scenario::ScenarioSpec::canonical(1, 1000);
  std::string method = "bnp";
  int reps = 1;
  long truth_reps = 1000000;
  int lsem_bootstrap = 200;
  int workers = 0;  // 0 = BNPMED_WORKERS env var, else 1
  std::vector<std::string> cli_overrides;

  int resolved_workers() const;
  json canonical() const;
  std::string hash() const;
};

RunConfig config_from_json(const json& j);

// argv-style parsing (without the program name).
RunConfig parse_config(const std::vector<std::string>& args);

int run(const RunConfig& cfg);

// Parse + run + machine-readable error reporting; the CLI main body.
int main_entry(int argc, char** argv);

}  // namespace bnpmed::io
