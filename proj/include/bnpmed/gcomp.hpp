#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnpmed/sampler.hpp"

namespace bnpmed {

// One expected potential outcome E[Y(a, M(a_1,...,a_Q))]: outer treatment a
// plus the per-mediator induction pattern.
struct EffectQuery {
  int a = 1;
  std::vector<int> pattern;
  int mc_draws = 200;

  void validate(int Q) const;
};

enum class EffectKind { TE, NDE, JNIE, INIE, PNIE };

struct Effect {
  EffectKind kind = EffectKind::TE;
  std::vector<int> subset;  // 1-based mediator indices (INIE: one, PNIE: >= 2)

  std::string name() const;
  static Effect parse(const std::string& name, int Q);
};

std::vector<Effect> default_effect_set(int Q);

struct EffectEstimate {
  std::string name;
  std::vector<double> per_draw;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mc_se = 0.0;
};

// Equal-tailed interval endpoints via linearly interpolated empirical
// percentiles.
double empirical_quantile(std::vector<double> values, double p);

struct CovariateDraw {
  Eigen::VectorXd l;  // confounders, p1 binary then p2 continuous
  Assignment path;    // anchor path; "new cluster" encoded as one-past-the-end
};

// Selected m-cluster for one treatment arm in step b. When a completely new
// m-cluster is drawn, fresh holds prior-drawn mediator coefficients.
struct ArmSelection {
  int branch = 0;  // 0 new m-cluster, 1 existing m + new x, 2 existing both
  int flat_index = -1;
  MediatorParams fresh;
  const MediatorParams* omega = nullptr;
};

// Per-posterior-draw evaluator; precomputes the flattened m-cluster list and
// the cluster-size ladders used by the step b and step c weight displays.
class GcompEngine {
 public:
  GcompEngine(const PosteriorDraw& draw, const Hyperparams& hyper);

  CovariateDraw draw_covariates(Rng& rng) const;

  // Normalized step-b branch weights for treatment arm a: entry 0 is the new
  // m-cluster branch, followed per flat m-cluster by [new x-cluster, one
  // entry per existing x-cluster].
  std::vector<double> m_branch_weights(int a, VecRef l) const;

  ArmSelection select_m_cluster(int a, VecRef l, Rng& rng) const;

  double sample_mediator(const MediatorParams& om, int q, int aq, VecRef l,
                         Rng& rng) const;

  // Step b in full: both arm selections plus one value per mediator per arm,
  // assembled per the induction pattern.
  Eigen::VectorXd draw_mediators(VecRef l, const std::vector<int>& pattern,
                                 Rng& rng) const;

  // Step c: posterior-weighted conditional outcome mean.
  double expected_outcome(int a, VecRef l, VecRef m) const;

  // Held-out conditional outcome log-density under the same weights.
  double log_predictive_outcome(int a, VecRef l, VecRef m, double y) const;

  int p1() const { return p1_; }
  int p2() const { return p2_; }
  int q() const { return q_; }

 private:
  struct FlatM {
    int j, l;
    int count;
    const MCluster* mc;
  };

  Eigen::VectorXd covariate_vec(int a, VecRef l) const;

  const PosteriorDraw& draw_;
  const Hyperparams& hyper_;
  std::vector<FlatM> flat_;
  int n_ = 0;
  int p1_ = 0, p2_ = 0, q_ = 0;
};

struct PotentialOutcomeEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Step d: Monte Carlo average of expected_outcome over T covariate/mediator
// draws.
PotentialOutcomeEstimate expected_potential_outcome(const PosteriorDraw& draw,
                                                    const Hyperparams& hyper,
                                                    const EffectQuery& query,
                                                    Rng& rng);

// Post-processing over a full draw stream. Within each posterior draw all
// contrasts share one stream of (l, mediator-value) draws per arm, so
// TE = NDE + JNIE holds exactly per draw. Parallel over draws; worker count
// does not change results (per-draw substreams, merged by index).
std::vector<EffectEstimate> causal_effects(const std::vector<PosteriorDraw>& draws,
                                           const Hyperparams& hyper,
                                           const std::vector<Effect>& effects,
                                           int mc_draws, std::uint64_t seed,
                                           int workers = 1);

}  // namespace bnpmed
