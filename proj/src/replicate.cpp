#include "bnpmed/replicate.hpp"

#include <atomic>
#include <thread>

#include "bnpmed/lsem.hpp"

namespace bnpmed::scenario {

namespace {

RepRow run_one(const ScenarioSpec& spec, const std::string& method,
               const std::vector<Effect>& effects, int rep, std::uint64_t seed,
               const MethodOptions& opts) {
  RepRow row;
  row.rep = rep;
  try {
    Rng gen_rng(mix_seed(seed, 3 * static_cast<std::uint64_t>(rep)));
    const Dataset data = generate(spec, gen_rng);
    std::vector<EffectEstimate> est;
    if (method == "lsem") {
      Rng boot_rng(mix_seed(seed, 3 * static_cast<std::uint64_t>(rep) + 1));
      est = lsem_fit(data, effects, opts.lsem_bootstrap, boot_rng);
    } else if (method == "bnp") {
      const Hyperparams hyper = Hyperparams::defaults_for(data);
      SamplerConfig cfg = opts.sampler;
      cfg.seed = mix_seed(seed, 3 * static_cast<std::uint64_t>(rep) + 1);
      const std::vector<PosteriorDraw> draws = run_chain_collect(data, hyper, cfg);
      est = causal_effects(draws, hyper, effects, opts.gcomp_draws,
                           mix_seed(seed, 3 * static_cast<std::uint64_t>(rep) + 2),
                           1);
    } else {
      throw std::invalid_argument("replicate: unknown method " + method);
    }
    for (const auto& e : est) row.est[e.name] = {e.mean, e.ci_low, e.ci_high};
    row.ok = true;
  } catch (const std::exception& ex) {
    row.ok = false;
    row.error = ex.what();
  }
  return row;
}

}  // namespace

ReplicateTable replicate(const ScenarioSpec& spec, const std::string& method,
                         const std::vector<Effect>& effects, int reps,
                         std::uint64_t seed, const TruthRecord& truth,
                         const MethodOptions& opts) {
  if (reps < 1) throw std::invalid_argument("replicate: reps >= 1");
  if (method != "bnp" && method != "lsem")
    throw std::invalid_argument("replicate: unknown method " + method);
  ReplicateTable table;
  table.truth = truth;
  table.rows.resize(reps);

  const int nw = std::max(1, std::min(opts.workers, reps));
  if (nw == 1) {
    for (int r = 0; r < reps; ++r)
      table.rows[r] = run_one(spec, method, effects, r, seed, opts);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= reps) return;
          table.rows[r] = run_one(spec, method, effects, r, seed, opts);
        }
      });
    for (auto& th : pool) th.join();
  }

  for (const Effect& e : effects) {
    AggregateRow ag;
    ag.effect = e.name();
    ag.truth = truth.values.count(ag.effect) ? truth.values.at(ag.effect) : 0.0;
    double sum = 0.0, width = 0.0;
    int covered = 0, ok = 0;
    for (const RepRow& row : table.rows) {
      if (!row.ok || !row.est.count(ag.effect)) continue;
      const EffectSummary& s = row.est.at(ag.effect);
      ++ok;
      sum += s.mean;
      width += s.ci_high - s.ci_low;
      if (ag.truth >= s.ci_low && ag.truth <= s.ci_high) ++covered;
    }
    ag.ok_reps = ok;
    if (ok > 0) {
      ag.mean_estimate = sum / ok;
      ag.bias = ag.mean_estimate - ag.truth;
      ag.avg_ci_width = width / ok;
      ag.coverage = static_cast<double>(covered) / ok;
    }
    table.aggregate.push_back(std::move(ag));
  }
  return table;
}

}  // namespace bnpmed::scenario
