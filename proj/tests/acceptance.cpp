// Acceptance suite: runs each acceptance criterion end to end and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.
//
// Usage: acceptance [--workers N] [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bnpmed/gcomp.hpp"
#include "bnpmed/io.hpp"
#include "bnpmed/lsem.hpp"
#include "bnpmed/replicate.hpp"
#include "bnpmed/run.hpp"
#include "bnpmed/scenario.hpp"
#include "bnpmed/urn.hpp"
#include "enum_oracle.hpp"

using namespace bnpmed;
using namespace bnpmed::scenario;

namespace {

int g_workers = 2;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

std::vector<Effect> parse_effects(const std::vector<std::string>& names, int Q) {
  std::vector<Effect> out;
  for (const auto& n : names) out.push_back(Effect::parse(n, Q));
  return out;
}

// One full BNP pipeline run: generate -> fit -> effects.
std::vector<EffectEstimate> bnp_pipeline(const ScenarioSpec& spec,
                                         std::uint64_t seed,
                                         const SamplerConfig& base_cfg,
                                         const std::vector<Effect>& effects,
                                         int T, int workers) {
  Rng rng(mix_seed(seed, 1));
  const Dataset data = generate(spec, rng);
  const Hyperparams hyper = Hyperparams::defaults_for(data);
  SamplerConfig cfg = base_cfg;
  cfg.seed = mix_seed(seed, 2);
  const auto draws = run_chain_collect(data, hyper, cfg);
  return causal_effects(draws, hyper, effects, T, mix_seed(seed, 3), workers);
}

// ---------------------------------------------------------------------------
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = ScenarioSpec::canonical(1, 1000);
  SamplerConfig cfg;  // default SamplerConfig
  const auto est = bnp_pipeline(spec, 107, cfg,
                                parse_effects({"NDE", "JNIE", "TE"}, 10), 1000,
                                /*workers=*/1);
  const double secs = elapsed_s(t0);
  const double nde = est[0].mean, jnie = est[1].mean;
  const bool pass = std::abs(nde - 1.04) <= 0.15 &&
                    std::abs(jnie - 0.71) <= 0.15 && secs <= 1800.0;
  return {pass, fmt("NDE %.3f (target 1.04 +/- 0.15), JNIE %.3f (target 0.71 "
                    "+/- 0.15), runtime %.0f s (limit 1800, single-threaded, "
                    "T=1000)",
                    nde, jnie, secs)};
}

Outcome criterion2() {
  const ScenarioSpec spec = ScenarioSpec::canonical(1, 500);
  const auto effects = parse_effects({"TE", "NDE"}, 10);
  const TruthRecord truth = truth_oracle(spec, effects, 1000000, 13);
  MethodOptions opts;
  opts.gcomp_draws = 500;
  opts.workers = g_workers;
  const ReplicateTable tab = replicate(spec, "bnp", effects, 20, 1021, truth, opts);
  double cov_te = 0, cov_nde = 0;
  for (const auto& ag : tab.aggregate) {
    if (ag.effect == "TE") cov_te = ag.coverage;
    if (ag.effect == "NDE") cov_nde = ag.coverage;
  }
  const int ok = tab.aggregate.front().ok_reps;
  const bool pass = cov_te >= 0.80 && cov_nde >= 0.80 && ok == 20;
  return {pass, fmt("TE coverage %.2f, NDE coverage %.2f (threshold 0.80, "
                    "%d/20 reps ok; oracle truths TE %.3f NDE %.3f)",
                    cov_te, cov_nde, ok, truth.values.at("TE"),
                    truth.values.at("NDE"))};
}

Outcome criterion3() {
  const ScenarioSpec spec = ScenarioSpec::canonical(2, 1000);
  const auto effects = parse_effects({"NDE"}, 10);
  const TruthRecord truth = truth_oracle(spec, effects, 1000000, 14);
  MethodOptions opts;
  opts.gcomp_draws = 500;
  opts.workers = g_workers;
  const ReplicateTable lsem = replicate(spec, "lsem", effects, 10, 2031, truth, opts);
  const ReplicateTable bnp = replicate(spec, "bnp", effects, 10, 2032, truth, opts);
  const double cov_l = lsem.aggregate[0].coverage;
  const double cov_b = bnp.aggregate[0].coverage;
  const bool pass = cov_l <= 0.5 && cov_b >= 0.7;
  return {pass,
          fmt("LSEM NDE coverage %.2f (need <= 0.5), BNP NDE coverage %.2f "
              "(need >= 0.7); truth %.3f, LSEM bias %+.2f, BNP bias %+.2f",
              cov_l, cov_b, truth.values.at("NDE"), lsem.aggregate[0].bias,
              bnp.aggregate[0].bias)};
}

Outcome criterion4() {
  const ScenarioSpec spec = ScenarioSpec::canonical(3, 1000);
  std::vector<std::string> names = {"TE", "NDE", "JNIE"};
  for (int q = 1; q <= 10; ++q) names.push_back("INIE_" + std::to_string(q));
  names.push_back("PNIE_9_10");
  const auto effects = parse_effects(names, 10);
  SamplerConfig cfg;  // default SamplerConfig
  const auto est = bnp_pipeline(spec, 433, cfg, effects, 1000, g_workers);

  // Posterior of JNIE - sum_q INIE_q from the shared per-draw values.
  const int nd = static_cast<int>(est[0].per_draw.size());
  std::vector<double> gap(nd);
  for (int d = 0; d < nd; ++d) {
    double s = 0.0;
    for (int e = 3; e < 13; ++e) s += est[e].per_draw[d];
    gap[d] = est[2].per_draw[d] - s;
  }
  double gmean = 0;
  for (double v : gap) gmean += v;
  gmean /= nd;
  double gsd = 0;
  for (double v : gap) gsd += (v - gmean) * (v - gmean);
  gsd = std::sqrt(gsd / (nd - 1.0));
  const bool nonadd = std::abs(gmean) > 2.0 * gsd;

  // PNIE{9,10}: keyed to the oracle truth under the section-2 definitions;
  // the published table value (5.71, computed under a different convention)
  // is reported alongside. See the decisions ledger.
  const Effect pnie = Effect::parse("PNIE_9_10", 10);
  const TruthRecord truth = truth_oracle(spec, {pnie}, 1000000, 15);
  const double oracle_val = truth.values.at("PNIE_9_10");
  const double est_pnie = est[13].mean;
  const bool pnie_ok = std::abs(est_pnie - oracle_val) <= 0.6;
  const bool pass = nonadd && pnie_ok;
  return {pass,
          fmt("|JNIE - sum INIE| posterior mean %.3f vs 2*sd %.3f "
              "(non-additive: %s); PNIE_9_10 estimate %.3f vs oracle %.3f "
              "+/- 0.6 (paper table: 5.71 under its flip-up coupled-arm "
              "convention; delta to paper %+.2f)",
              std::abs(gmean), 2.0 * gsd, nonadd ? "yes" : "no", est_pnie,
              oracle_val, est_pnie - 5.71)};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec spec = ScenarioSpec::canonical(6, 100);
  SamplerConfig cfg;  // default SamplerConfig
  const auto est = bnp_pipeline(spec, 509, cfg, parse_effects({"NDE", "JNIE"}, 10),
                                1000, g_workers);
  const double secs = elapsed_s(t0);
  const double nde = est[0].mean, jnie = est[1].mean;
  const bool pass = std::abs(nde - 0.29) <= 0.12 &&
                    std::abs(jnie - (-0.02)) <= 0.12 && secs <= 300.0;
  return {pass, fmt("NDE %.3f (target 0.29 +/- 0.12), JNIE %.3f (target "
                    "-0.02 +/- 0.12), runtime %.0f s (limit 300)",
                    nde, jnie, secs)};
}

Outcome criterion6() {
  PosteriorDraw draw;
  Hyperparams hyper;
  {
    MCluster mc;
    mc.omega.coef = Eigen::MatrixXd(4, 1);
    mc.omega.coef << 0.5, 1.0, -0.4, 0.8;
    mc.omega.var = Eigen::VectorXd::Constant(1, 0.49);
    mc.omega.kinds = {ColKind::Continuous};
    XCluster xc;
    xc.psi.g = Eigen::VectorXd(2);
    xc.psi.g << 0.5, 0.3;
    xc.psi.h = Eigen::VectorXd::Constant(1, 1.5);
    xc.psi.f = Eigen::VectorXd::Constant(1, 0.25);
    xc.count = 20;
    mc.xs.push_back(xc);
    mc.count = 20;
    YCluster yc;
    yc.theta.coef = Eigen::VectorXd(5);
    yc.theta.coef << 0.2, 1.5, -1.0, 0.5, 2.0;
    yc.theta.var = 1.0;
    yc.ms.push_back(mc);
    yc.count = 20;
    draw.state.ys.push_back(yc);
    draw.state.assign.assign(20, Assignment{0, 0, 0});
    draw.alpha = {1e-12, 1e-12, 1e-12};
    hyper.mu0 = Eigen::VectorXd::Constant(1, 0.0);
    hyper.tau0sq = Eigen::VectorXd::Constant(1, 1.0);
    hyper.outcome.coef_mean = Eigen::VectorXd::Zero(5);
    hyper.outcome.coef_var = Eigen::VectorXd::Constant(5, 4.0);
    RegressionPrior med;
    med.coef_mean = Eigen::VectorXd::Zero(4);
    med.coef_var = Eigen::VectorXd::Constant(4, 4.0);
    hyper.mediators = {med};
  }
  const double g = 0.3, h = 1.5;
  auto closed = [&](int a, int aq) {
    const double med = 0.5 + 1.0 * aq - 0.4 * g + 0.8 * h;
    return 0.2 + 1.5 * a - 1.0 * g + 0.5 * h + 2.0 * med;
  };
  Rng rng(606);
  bool pass = true;
  std::ostringstream os;
  for (const auto& [a, aq] :
       std::vector<std::pair<int, int>>{{1, 1}, {1, 0}, {0, 0}}) {
    EffectQuery q;
    q.a = a;
    q.pattern = {aq};
    q.mc_draws = 100000;
    const auto est = expected_potential_outcome(draw, hyper, q, rng);
    const double dev = std::abs(est.mean - closed(a, aq));
    pass = pass && dev <= 3.0 * est.se;
    os << fmt("PO(a=%d,aq=%d) dev %.4f <= 3se %.4f; ", a, aq, dev, 3.0 * est.se);
  }
  return {pass, os.str()};
}

Outcome criterion7() {
  bool pass = true;
  std::ostringstream os;
  for (int id : {1, 2, 3}) {
    const ScenarioSpec spec = ScenarioSpec::canonical(id, 1000);
    const ScenarioModel model(spec);
    for (const char* name : {"TE", "NDE", "JNIE"}) {
      const Effect e = Effect::parse(name, 10);
      const TruthRecord rec = truth_oracle(spec, {e}, 1000000, 70 + id);
      const GFormulaResult gf = parametric_g_formula(model, e, 1000000, 170 + id);
      const double tol = 3.0 * std::sqrt(rec.mc_err.at(name) * rec.mc_err.at(name) +
                                         gf.se * gf.se);
      const double dev = std::abs(rec.values.at(name) - gf.value);
      if (dev > tol) {
        pass = false;
        os << fmt("[sc%d %s dev %.4f > tol %.4f] ", id, name, dev, tol);
      }
    }
  }
  if (pass) os << "all scenario 1-3 TE/NDE/JNIE pairs within 3 combined sigma";
  return {pass, os.str()};
}

Outcome criterion8() {
  const auto checks = urn::validation_suite(808);
  bool pass = true;
  std::ostringstream os;
  for (const auto& c : checks) {
    pass = pass && c.pass;
    if (!c.pass)
      os << fmt("[%s value %.3g bound %.3g] ", c.name.c_str(), c.value, c.bound);
  }
  if (pass) os << fmt("%zu checks passed", checks.size());
  return {pass, os.str()};
}

Outcome criterion9() {
  std::ostringstream os;
  bool pass = true;

  // (a) single-cluster conjugate limit.
  {
    ScenarioSpec spec = ScenarioSpec::canonical(1, 60);
    spec.Q = 2;
    spec.custom = true;
    Rng drng(31);
    const Dataset data = generate(spec, drng);
    const Hyperparams hyper = Hyperparams::defaults_for(data);
    SamplerConfig cfg;
    cfg.iterations = 10;
    cfg.burn_in = 0;
    cfg.thinning = 1;
    cfg.seed = 17;
    cfg.update_memberships = false;
    cfg.update_concentrations = false;
    const int d = 2 + data.p() + data.q();
    Eigen::MatrixXd X(data.n(), d);
    for (int i = 0; i < data.n(); ++i) X.row(i) = data.outcome_design_row(i);
    Eigen::MatrixXd lam = X.transpose() * X;
    Eigen::VectorXd rhs = X.transpose() * data.y;
    for (int j = 0; j < d; ++j) {
      lam(j, j) += 1.0 / hyper.outcome.coef_var(j);
      rhs(j) += hyper.outcome.coef_mean(j) / hyper.outcome.coef_var(j);
    }
    const Eigen::VectorXd mn = lam.ldlt().solve(rhs);
    GibbsSampler gs(data, hyper, cfg);
    gs.init();
    const int reps = 10000;
    std::vector<double> acc(d, 0.0), accsq(d, 0.0);
    for (int t = 0; t < reps; ++t) {
      gs.update_theta();
      const auto& coef = gs.draw().state.ys[0].theta.coef;
      for (int j = 0; j < d; ++j) {
        acc[j] += coef(j);
        accsq[j] += coef(j) * coef(j);
      }
    }
    int bad = 0;
    for (int j = 0; j < d; ++j) {
      const double m = acc[j] / reps;
      const double sd = std::sqrt(std::max(0.0, accsq[j] / reps - m * m));
      if (std::abs(m - mn(j)) > 3.5 * sd / std::sqrt(double(reps))) ++bad;
    }
    pass = pass && bad == 0;
    os << fmt("conjugate-limit: %d/%d coefficients outside 3.5 MC SE; ", bad, d);
  }

  // (b) five-subject partition posterior vs exhaustive enumeration.
  {
    const enum_oracle::FiveSubjectProblem prob;
    const auto exact = enum_oracle::exact_partition_posterior(prob);
    const double tv = enum_oracle::sampler_tv(prob, exact, 300000, 909);
    pass = pass && tv <= 0.05;
    os << fmt("partition TV %.4f (bound 0.05); ", tv);
  }

  // (c) per-draw TE = NDE + JNIE exactly on a fitted chain.
  {
    ScenarioSpec spec = ScenarioSpec::canonical(1, 120);
    Rng drng(73);
    const Dataset data = generate(spec, drng);
    const Hyperparams hyper = Hyperparams::defaults_for(data);
    SamplerConfig cfg;
    cfg.iterations = 120;
    cfg.burn_in = 40;
    cfg.thinning = 2;
    cfg.seed = 5;
    const auto draws = run_chain_collect(data, hyper, cfg);
    const auto est = causal_effects(draws, hyper,
                                    parse_effects({"TE", "NDE", "JNIE"}, 10), 50,
                                    99, g_workers);
    double worst = 0.0;
    for (std::size_t dd = 0; dd < est[0].per_draw.size(); ++dd)
      worst = std::max(worst, std::abs(est[0].per_draw[dd] - est[1].per_draw[dd] -
                                       est[2].per_draw[dd]));
    pass = pass && worst <= 1e-12;
    os << fmt("max per-draw |TE-(NDE+JNIE)| = %.2g (bound 1e-12)", worst);
  }
  return {pass, os.str()};
}

Outcome criterion10() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bnpmed_acceptance_c10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto file = [&](const std::string& s) { return (dir / s).string(); };
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  using bnpmed::io::parse_config;
  bnpmed::io::RunConfig sim = parse_config({"simulate", "--scenario", "1", "--n",
                                            "120", "--seed", "21", "--out",
                                            file("d.csv")});
  if (bnpmed::io::run(sim) != 0) return {false, "simulate failed"};

  std::string logs[2], rows[2];
  for (int r = 0; r < 2; ++r) {
    const std::string draw_path = file("draws" + std::to_string(r) + ".bin");
    bnpmed::io::RunConfig fit = parse_config(
        {"fit", "--data", file("d.csv"), "--out", draw_path, "--seed", "33",
         "--iterations", "120", "--burn-in", "40", "--thinning", "2"});
    if (bnpmed::io::run(fit) != 0) return {false, "fit failed"};
    logs[r] = slurp(draw_path);
    bnpmed::io::RunConfig eff = parse_config(
        {"effects", "--draws", draw_path, "--out",
         file("rep" + std::to_string(r)), "--seed", "44", "--T", "60",
         "--workers", "2"});
    if (bnpmed::io::run(eff) != 0) return {false, "effects failed"};
    const std::string rep = slurp(file("rep" + std::to_string(r)) + "_" +
                                  eff.hash().substr(0, 8) + ".json");
    rows[r] = bnpmed::io::json::parse(rep).at("effects").dump();
  }
  fs::remove_all(dir);
  const bool logs_same = logs[0] == logs[1] && !logs[0].empty();
  const bool rows_same = rows[0] == rows[1] && !rows[0].empty();
  const bool pass = logs_same && rows_same;
  return {pass, fmt("draw logs byte-identical: %s; effect rows identical: %s",
                    logs_same ? "yes" : "no", rows_same ? "yes" : "no")};
}

// Supplementary property: null-effect soundness (zero treatment effects).
Outcome property_null_effects() {
  ScenarioSpec spec = ScenarioSpec::canonical(1, 300);
  spec.zero_treatment_effects = true;
  spec.custom = true;
  const auto effects = parse_effects({"TE", "NDE", "JNIE"}, 10);
  SamplerConfig cfg;
  cfg.iterations = 800;
  cfg.burn_in = 200;
  cfg.thinning = 2;
  MethodOptions opts;
  opts.sampler = cfg;
  opts.gcomp_draws = 300;
  opts.workers = g_workers;
  TruthRecord zero;
  zero.scenario_id = spec.id;
  zero.source = "null-override";
  for (const auto& e : effects) {
    zero.values[e.name()] = 0.0;
    zero.mc_err[e.name()] = 0.0;
  }
  const ReplicateTable tab = replicate(spec, "bnp", effects, 20, 7001, zero, opts);
  bool pass = true;
  std::ostringstream os;
  for (const auto& ag : tab.aggregate) {
    pass = pass && ag.coverage >= 0.90 && ag.ok_reps == 20;
    os << fmt("%s zero-coverage %.2f; ", ag.effect.c_str(), ag.coverage);
  }
  os << "(threshold 0.90 over 20 replications)";
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) {
      g_workers = std::atoi(argv[++i]);
      continue;
    }
    which.insert(std::atoi(argv[i]));
  }
  if (const char* env = std::getenv("BNPMED_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) g_workers = w;
  }

  struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const std::vector<Entry> entries = {
      {1, "scenario-1 point estimation (n=1000)", criterion1},
      {2, "scenario-1 coverage (20 reps, n=500)", criterion2},
      {3, "scenario-2 misspecification contrast", criterion3},
      {4, "scenario-3 non-additivity and PNIE{9,10}", criterion4},
      {5, "scenario-6 binary-everything (n=100)", criterion5},
      {6, "oracle equivalence (degenerate g-computation)", criterion6},
      {7, "identification sanity (two oracles agree)", criterion7},
      {8, "enriched-urn theory suite", criterion8},
      {9, "sampler correctness properties", criterion9},
      {10, "determinism (logs and reports)", criterion10},
      {11, "property: null-effect soundness", property_null_effects},
  };

  int failures = 0;
  for (const auto& e : entries) {
    if (!which.empty() && !which.count(e.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("%s  C%-2d %-44s [%6.0f s]  %s\n", out.pass ? "PASS" : "FAIL",
                e.id, e.name, elapsed_s(t0), out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures;
}
