#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnpmed/gcomp.hpp"
#include "bnpmed/sampler.hpp"
#include "bnpmed/scenario.hpp"

namespace bnpmed::scenario {

struct EffectSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct RepRow {
  int rep = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, EffectSummary> est;
};

struct AggregateRow {
  std::string effect;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double avg_ci_width = 0.0;
  double coverage = 0.0;
  int ok_reps = 0;
};

struct ReplicateTable {
  TruthRecord truth;
  std::vector<RepRow> rows;
  std::vector<AggregateRow> aggregate;
};

struct MethodOptions {
  SamplerConfig sampler;
  int gcomp_draws = 200;
  int lsem_bootstrap = 200;
  int workers = 1;
};

// Runs `method` ("bnp" or "lsem") end-to-end on independent datasets drawn
// from the scenario; per-replicate failures are recorded, not fatal.
// Deterministic for a given seed regardless of worker count.
ReplicateTable replicate(const ScenarioSpec& spec, const std::string& method,
                         const std::vector<Effect>& effects, int reps,
                         std::uint64_t seed, const TruthRecord& truth,
                         const MethodOptions& opts);

}  // namespace bnpmed::scenario
