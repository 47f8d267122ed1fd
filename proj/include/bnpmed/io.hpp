#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnpmed/data.hpp"
#include "bnpmed/gcomp.hpp"
#include "bnpmed/replicate.hpp"
#include "bnpmed/sampler.hpp"
#include "bnpmed/scenario.hpp"

namespace bnpmed::io {

using json = nlohmann::ordered_json;

// ---- column schema ----------------------------------------------------

// Maps CSV columns onto model roles. Confounders keep their given order:
// binary ones land in l_disc, continuous ones in l_cont.
struct SchemaSpec {
  std::string outcome = "y";
  ColKind outcome_kind = ColKind::Continuous;
  std::string treatment = "a";
  std::vector<std::pair<std::string, ColKind>> mediators;
  std::vector<std::pair<std::string, ColKind>> confounders;

  json to_json() const;
  static SchemaSpec from_json(const json& j);
  static SchemaSpec for_dataset(const Dataset& d);
};

Dataset read_csv(const std::string& path, const SchemaSpec& schema);
void write_csv(const std::string& path, const Dataset& d);

// Exact round-trip double formatting (%.17g).
std::string format_double(double v);

// ---- json converters ---------------------------------------------------

json hyper_to_json(const Hyperparams& h);
Hyperparams hyper_from_json(const json& j);
json sampler_config_to_json(const SamplerConfig& c);
SamplerConfig sampler_config_from_json(const json& j);
json scenario_to_json(const scenario::ScenarioSpec& s);
scenario::ScenarioSpec scenario_from_json(const json& j);
json draw_to_json(const PosteriorDraw& d);
PosteriorDraw draw_from_json(const json& j);
json truth_to_json(const scenario::TruthRecord& t);

// ---- draw log ----------------------------------------------------------

// Binary, versioned, length-prefixed record stream:
//   8-byte magic "BNPMDLG1", u32 meta length, MessagePack(meta),
//   then per draw: u32 record length, MessagePack(draw).
// All integers little-endian. Byte-identical for identical (seed, config,
// input).
inline constexpr char kDrawLogMagic[8] = {'B', 'N', 'P', 'M', 'D', 'L', 'G', '1'};

struct DrawLogMeta {
  int version = 1;
  int n = 0, Q = 0, p1 = 0, p2 = 0;
  SchemaSpec schema;
  Hyperparams hyper;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  std::string config_hash;

  json to_json() const;
  static DrawLogMeta from_json(const json& j);
};

class DrawLogWriter {
 public:
  DrawLogWriter(const std::string& path, const DrawLogMeta& meta);
  ~DrawLogWriter();
  void append(const PosteriorDraw& draw);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct DrawLog {
  DrawLogMeta meta;
  std::vector<PosteriorDraw> draws;
};

DrawLog read_draw_log(const std::string& path);

// ---- reports -----------------------------------------------------------

struct EffectsReport {
  std::vector<EffectEstimate> rows;
  json provenance;
};

// Writes <base>.json and <base>.csv.
void write_effects_report(const std::string& base_path, const EffectsReport& rep);

// Writes <base>.reps.csv (one row per replicate x effect) and
// <base>.summary.csv (one row per effect).
void write_replicate_table(const std::string& base_path,
                           const scenario::ReplicateTable& table,
                           const std::vector<Effect>& effects);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace bnpmed::io
