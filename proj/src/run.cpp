#include "bnpmed/run.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bnpmed/lsem.hpp"
#include "bnpmed/urn.hpp"

namespace bnpmed::io {

namespace {

json effects_to_json(const std::vector<std::string>& names) {
  json a = json::array();
  for (const auto& n : names) a.push_back(n);
  return a;
}

}  // namespace

int RunConfig::resolved_workers() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("BNPMED_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

json RunConfig::canonical() const {
  json j;
  j["command"] = command;
  j["input"] = input;
  j["output"] = output;
  j["schema_path"] = schema_path;
  if (inline_schema) j["schema"] = inline_schema->to_json();
  j["truth_path"] = truth_path;
  j["seed"] = seed;
  j["sampler"] = sampler_config_to_json(sampler);
  j["effects"] = effects_to_json(effects);
  j["gcomp_draws"] = gcomp_draws;
  j["scenario"] = scenario_to_json(scen);
  j["method"] = method;
  j["reps"] = reps;
  j["truth_reps"] = truth_reps;
  j["lsem_bootstrap"] = lsem_bootstrap;
  j["workers"] = workers;
  return j;
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical().dump()); }

RunConfig config_from_json(const json& j) {
  static const std::vector<std::string> allowed = {
      "command",    "input",      "output",     "schema_path", "schema",
      "truth_path", "seed",       "sampler",    "effects",     "gcomp_draws",
      "scenario",   "method",     "reps",       "truth_reps",  "lsem_bootstrap",
      "workers"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  }
  RunConfig c;
  if (j.contains("command")) c.command = j.at("command").get<std::string>();
  if (j.contains("input")) c.input = j.at("input").get<std::string>();
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  if (j.contains("schema_path")) c.schema_path = j.at("schema_path").get<std::string>();
  if (j.contains("schema")) c.inline_schema = SchemaSpec::from_json(j.at("schema"));
  if (j.contains("truth_path")) c.truth_path = j.at("truth_path").get<std::string>();
  if (j.contains("seed")) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.seed_given = true;
  }
  if (j.contains("sampler")) c.sampler = sampler_config_from_json(j.at("sampler"));
  if (j.contains("effects")) {
    c.effects.clear();
    for (const auto& e : j.at("effects")) c.effects.push_back(e.get<std::string>());
  }
  if (j.contains("gcomp_draws")) c.gcomp_draws = j.at("gcomp_draws").get<int>();
  if (j.contains("scenario")) c.scen = scenario_from_json(j.at("scenario"));
  if (j.contains("method")) c.method = j.at("method").get<std::string>();
  if (j.contains("reps")) c.reps = j.at("reps").get<int>();
  if (j.contains("truth_reps")) c.truth_reps = j.at("truth_reps").get<long>();
  if (j.contains("lsem_bootstrap")) c.lsem_bootstrap = j.at("lsem_bootstrap").get<int>();
  if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  return c;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"bnpmed: BNP multiple-mediator causal analysis"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, schema_path, truth_path,
      effects_csv, method;
  std::uint64_t seed = 0;
  int iterations = 0, burn_in = -1, thinning = 0, aux = 0, gdraws = 0, reps = 0,
      workers = -1, scen_id = 0, scen_n = 0, lsem_b = 0;
  long truth_reps = 0;
  bool zero_treat = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--out", out_path, "output path (base)");
    sub->add_option("--workers", workers, "worker threads for g-computation/replication");
  };
  auto add_sampler = [&](CLI::App* sub) {
    sub->add_option("--iterations", iterations, "Gibbs iterations");
    sub->add_option("--burn-in", burn_in, "burn-in iterations");
    sub->add_option("--thinning", thinning, "thinning interval");
    sub->add_option("--aux-clusters", aux, "auxiliary clusters per level");
  };
  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("--scenario", scen_id, "scenario id 1-6");
    sub->add_option("--n", scen_n, "sample size");
    sub->add_flag("--zero-treatment-effects", zero_treat,
                  "null-effect generator override");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit the model, write a draw log");
  add_common(fit);
  add_sampler(fit);
  fit->add_option("--data", data_path, "input CSV");
  fit->add_option("--schema", schema_path, "schema JSON for the CSV");

  CLI::App* eff = app.add_subcommand("effects", "posterior causal effects from a draw log");
  add_common(eff);
  eff->add_option("--draws", data_path, "draw log from fit");
  eff->add_option("--effects", effects_csv, "comma list, e.g. TE,NDE,JNIE,INIE_3,PNIE_9_10");
  eff->add_option("--T", gdraws, "Monte Carlo draws per posterior draw");

  CLI::App* sim = app.add_subcommand("simulate", "generate a scenario dataset");
  add_common(sim);
  add_scenario(sim);
  sim->add_option("--truth-out", truth_path, "also write oracle truth JSON here");
  sim->add_option("--truth-reps", truth_reps, "oracle Monte Carlo replicates");
  sim->add_option("--effects", effects_csv, "effects for the truth oracle");

  CLI::App* rep = app.add_subcommand("replicate", "replication study (bias/width/coverage)");
  add_common(rep);
  add_sampler(rep);
  add_scenario(rep);
  rep->add_option("--method", method, "bnp or lsem");
  rep->add_option("--reps", reps, "number of replications");
  rep->add_option("--truth-reps", truth_reps, "oracle Monte Carlo replicates");
  rep->add_option("--effects", effects_csv, "effects to score");
  rep->add_option("--T", gdraws, "Monte Carlo draws per posterior draw");
  rep->add_option("--lsem-bootstrap", lsem_b, "bootstrap resamples for lsem");

  CLI::App* urn = app.add_subcommand("validate-urn", "run the enriched-urn property suite");
  add_common(urn);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  app.parse(rev);

  CLI::App* active = app.get_subcommands().front();

  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("config: cannot open " + config_path);
    json j = json::parse(in);
    cfg = config_from_json(j);
  }
  if (!cfg.command.empty() && cfg.command != active->get_name())
    throw std::invalid_argument("config: command '" + cfg.command +
                                "' conflicts with subcommand '" +
                                active->get_name() + "'");
  cfg.command = active->get_name();

  auto given = [&](const std::string& flag) {
    const CLI::Option* o = active->get_option_no_throw(flag);
    return o != nullptr && o->count() > 0;
  };
  auto ovr = [&](const std::string& flag) { cfg.cli_overrides.push_back(flag); };
  if (given("--seed")) {
    cfg.seed = seed;
    cfg.seed_given = true;
    ovr("--seed");
  }
  if (given("--out")) {
    cfg.output = out_path;
    ovr("--out");
  }
  if (given("--workers")) {
    cfg.workers = workers;
    ovr("--workers");
  }
  if (given("--data")) {
    cfg.input = data_path;
    ovr("--data");
  }
  if (given("--draws")) {
    cfg.input = data_path;
    ovr("--draws");
  }
  if (given("--schema")) {
    cfg.schema_path = schema_path;
    ovr("--schema");
  }
  if (given("--iterations")) {
    cfg.sampler.iterations = iterations;
    ovr("--iterations");
  }
  if (given("--burn-in")) {
    cfg.sampler.burn_in = burn_in;
    ovr("--burn-in");
  }
  if (given("--thinning")) {
    cfg.sampler.thinning = thinning;
    ovr("--thinning");
  }
  if (given("--aux-clusters")) {
    cfg.sampler.aux_clusters = aux;
    ovr("--aux-clusters");
  }
  if (given("--effects")) {
    cfg.effects.clear();
    std::stringstream ss(effects_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.effects.push_back(tok);
    ovr("--effects");
  }
  if (given("--T")) {
    cfg.gcomp_draws = gdraws;
    ovr("--T");
  }
  if (given("--scenario") || given("--n") || given("--zero-treatment-effects")) {
    const int id = given("--scenario") ? scen_id : cfg.scen.id;
    const int n = given("--n") ? scen_n : cfg.scen.n;
    cfg.scen = scenario::ScenarioSpec::canonical(id, n);
    cfg.scen.zero_treatment_effects = zero_treat || cfg.scen.zero_treatment_effects;
    cfg.scen.custom = cfg.scen.zero_treatment_effects;
    ovr("--scenario");
  }
  if (given("--truth-out")) {
    cfg.truth_path = truth_path;
    ovr("--truth-out");
  }
  if (given("--truth-reps")) {
    cfg.truth_reps = truth_reps;
    ovr("--truth-reps");
  }
  if (given("--method")) {
    cfg.method = method;
    ovr("--method");
  }
  if (given("--reps")) {
    cfg.reps = reps;
    ovr("--reps");
  }
  if (given("--lsem-bootstrap")) {
    cfg.lsem_bootstrap = lsem_b;
    ovr("--lsem-bootstrap");
  }
  return cfg;
}

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

SchemaSpec resolve_schema(const RunConfig& cfg) {
  if (!cfg.schema_path.empty()) {
    std::ifstream in(cfg.schema_path);
    if (!in) throw std::runtime_error("schema: cannot open " + cfg.schema_path);
    return SchemaSpec::from_json(json::parse(in));
  }
  if (cfg.inline_schema) return *cfg.inline_schema;
  const std::string sidecar = cfg.input + ".schema.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    return SchemaSpec::from_json(json::parse(in));
  }
  throw std::invalid_argument(
      "fit: no schema given (--schema, config \"schema\", or sidecar " + sidecar +
      ")");
}

json provenance_block(const RunConfig& cfg) {
  json p;
  p["config_hash"] = cfg.hash();
  p["seed"] = cfg.seed;
  p["cli_overrides"] = effects_to_json(cfg.cli_overrides);
  p["config"] = cfg.canonical();
  return p;
}

int run_fit(const RunConfig& cfg) {
  require(!cfg.input.empty(), "fit: --data required");
  require(!cfg.output.empty(), "fit: --out required");
  const SchemaSpec schema = resolve_schema(cfg);
  const Dataset data = read_csv(cfg.input, schema);
  const Hyperparams hyper = Hyperparams::defaults_for(data);
  SamplerConfig scfg = cfg.sampler;
  scfg.seed = cfg.seed;
  DrawLogMeta meta;
  meta.n = data.n();
  meta.Q = data.q();
  meta.p1 = data.p1();
  meta.p2 = data.p2();
  meta.schema = schema;
  meta.hyper = hyper;
  meta.sampler = scfg;
  meta.seed = cfg.seed;
  meta.config_hash = cfg.hash();
  DrawLogWriter writer(cfg.output, meta);
  const ChainStats stats = run_chain(
      data, hyper, scfg, [&](const PosteriorDraw& d) { writer.append(d); });
  writer.close();
  std::cout << "fit: wrote " << stats.draws_emitted << " draws to " << cfg.output
            << " (legality failures: " << stats.legality_failures << ")\n";
  return stats.legality_failures == 0 ? 0 : 1;
}

int run_effects(const RunConfig& cfg) {
  require(!cfg.input.empty(), "effects: --draws required");
  require(!cfg.output.empty(), "effects: --out required");
  const DrawLog log = read_draw_log(cfg.input);
  require(!log.draws.empty(), "effects: draw log is empty");
  std::vector<Effect> effects;
  for (const auto& name : cfg.effects) effects.push_back(Effect::parse(name, log.meta.Q));
  long legal = 0;
  for (const auto& d : log.draws)
    if (d.state.counts_consistent()) ++legal;
  const std::uint64_t eff_seed = cfg.seed_given ? cfg.seed : log.meta.seed;
  const std::vector<EffectEstimate> rows =
      causal_effects(log.draws, log.meta.hyper, effects, cfg.gcomp_draws,
                     mix_seed(eff_seed, 0xeffec75ULL), cfg.resolved_workers());
  EffectsReport rep;
  rep.rows = rows;
  rep.provenance = provenance_block(cfg);
  rep.provenance["draw_count"] = log.draws.size();
  rep.provenance["legal_draws"] = legal;
  rep.provenance["gcomp_draws"] = cfg.gcomp_draws;
  rep.provenance["draw_log_hash"] = log.meta.config_hash;
  const std::string base = cfg.output + "_" + cfg.hash().substr(0, 8);
  write_effects_report(base, rep);
  std::cout << "effects: wrote " << base << ".json and " << base << ".csv\n";
  for (const auto& r : rows)
    std::cout << "  " << r.name << " = " << r.mean << " [" << r.ci_low << ", "
              << r.ci_high << "]\n";
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  require(cfg.seed_given, "simulate: --seed is mandatory");
  require(!cfg.output.empty(), "simulate: --out required");
  Rng rng(mix_seed(cfg.seed, 0x51713ULL));
  const Dataset data = scenario::generate(cfg.scen, rng);
  write_csv(cfg.output, data);
  std::ofstream sj(cfg.output + ".schema.json", std::ios::binary);
  sj << SchemaSpec::for_dataset(data).to_json().dump(2) << '\n';
  std::cout << "simulate: wrote " << data.n() << " rows to " << cfg.output << '\n';
  if (!cfg.truth_path.empty()) {
    std::vector<Effect> effects;
    for (const auto& name : cfg.effects) effects.push_back(Effect::parse(name, cfg.scen.Q));
    const scenario::TruthRecord truth = scenario::truth_oracle(
        cfg.scen, effects, cfg.truth_reps, mix_seed(cfg.seed, 0x7271ULL));
    json tj = truth_to_json(truth);
    tj["provenance"] = provenance_block(cfg);
    std::ofstream out(cfg.truth_path, std::ios::binary);
    out << tj.dump(2) << '\n';
    std::cout << "simulate: wrote truth to " << cfg.truth_path << '\n';
  }
  return 0;
}

int run_replicate(const RunConfig& cfg) {
  require(cfg.seed_given, "replicate: --seed is mandatory");
  require(!cfg.output.empty(), "replicate: --out required");
  require(cfg.method == "bnp" || cfg.method == "lsem",
          "replicate: method must be bnp or lsem");
  std::vector<Effect> effects;
  for (const auto& name : cfg.effects) effects.push_back(Effect::parse(name, cfg.scen.Q));
  const scenario::TruthRecord truth = scenario::truth_oracle(
      cfg.scen, effects, cfg.truth_reps, mix_seed(cfg.seed, 0x7271ULL));
  scenario::MethodOptions opts;
  opts.sampler = cfg.sampler;
  opts.gcomp_draws = cfg.gcomp_draws;
  opts.lsem_bootstrap = cfg.lsem_bootstrap;
  opts.workers = cfg.resolved_workers();
  const scenario::ReplicateTable table = scenario::replicate(
      cfg.scen, cfg.method, effects, cfg.reps, mix_seed(cfg.seed, 0x2e95ULL),
      truth, opts);
  const std::string base = cfg.output + "_" + cfg.hash().substr(0, 8);
  write_replicate_table(base, table, effects);
  std::cout << "replicate: wrote " << base << ".reps.csv and " << base
            << ".summary.csv\n";
  for (const auto& ag : table.aggregate)
    std::cout << "  " << ag.effect << ": truth " << ag.truth << ", bias "
              << ag.bias << ", coverage " << ag.coverage << " (" << ag.ok_reps
              << " reps)\n";
  return 0;
}

int run_validate_urn(const RunConfig& cfg) {
  const auto checks = urn::validation_suite(cfg.seed);
  bool all = true;
  json rows = json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    rows.push_back(json{{"name", c.name},
                        {"pass", c.pass},
                        {"value", c.value},
                        {"bound", c.bound}});
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (value "
              << c.value << ", bound " << c.bound << ")\n";
  }
  if (!cfg.output.empty()) {
    json j;
    j["checks"] = rows;
    j["all_pass"] = all;
    j["provenance"] = provenance_block(cfg);
    std::ofstream out(cfg.output, std::ios::binary);
    out << j.dump(2) << '\n';
  }
  return all ? 0 : 1;
}

}  // namespace

int run(const RunConfig& cfg) {
  if (cfg.command == "fit") return run_fit(cfg);
  if (cfg.command == "effects") return run_effects(cfg);
  if (cfg.command == "simulate") return run_simulate(cfg);
  if (cfg.command == "replicate") return run_replicate(cfg);
  if (cfg.command == "validate-urn") return run_validate_urn(cfg);
  throw std::invalid_argument("unknown command: " + cfg.command);
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const RunConfig cfg = parse_config(args);
    return run(cfg);
  } catch (const CLI::CallForHelp& e) {
    std::cout << e.what() << '\n';
    std::cout << "subcommands: fit | effects | simulate | replicate | validate-urn\n"
              << "run 'bnpmed <subcommand> --help' for options\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    json err;
    err["error"] = std::string("argument error: ") + e.what();
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << '\n';
    return 1;
  }
}

}  // namespace bnpmed::io
