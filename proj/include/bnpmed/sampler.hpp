#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bnpmed/conjugate.hpp"
#include "bnpmed/data.hpp"
#include "bnpmed/k0.hpp"
#include "bnpmed/params.hpp"
#include "bnpmed/rng.hpp"

namespace bnpmed {

// Nested three-level clustering: y-clusters hold outcome parameters, their
// m-subclusters hold mediator parameters, and x-subclusters within those hold
// covariate parameters. Counts are stored alongside and must always equal the
// tabulation of the assignment vector.
struct XCluster {
  CovariateParams psi;
  int count = 0;
};

struct MCluster {
  MediatorParams omega;
  std::vector<XCluster> xs;
  int count = 0;
};

struct YCluster {
  OutcomeParams theta;
  std::vector<MCluster> ms;
  int count = 0;
};

struct Assignment {
  int j = 0;
  int l = 0;
  int u = 0;
  bool operator==(const Assignment&) const = default;
};

struct ClusterState {
  std::vector<YCluster> ys;
  std::vector<Assignment> assign;

  int k() const { return static_cast<int>(ys.size()); }
  int n() const { return static_cast<int>(assign.size()); }

  // Tabulated counts equal stored counts, labels in range, no empty cluster.
  bool counts_consistent() const;
};

// Canonical label-invariant encoding of the nested partition (labels by
// order of first appearance at each level).
std::string partition_signature(const ClusterState& st);

struct Concentrations {
  double theta = 1.0;
  double omega = 1.0;
  double psi = 1.0;
};

struct PosteriorDraw {
  ClusterState state;
  Concentrations alpha;
  long iteration = 0;
};

struct SamplerConfig {
  int iterations = 2000;
  int burn_in = 500;
  int thinning = 2;
  int aux_clusters = 3;
  std::uint64_t seed = 1;
  Concentrations init_alpha;
  bool update_concentrations = true;
  // Test hooks: freeze the partition (conjugate-limit checks) or drop all
  // likelihood terms from membership scores (prior-only chains).
  bool update_memberships = true;
  bool prior_only = false;

  void validate() const;
};

// Shared-concentration Gibbs update: groups are (n_g, k_g) pairs, i.e. items
// and occupied tables per restaurant; a single group reduces to the classic
// Escobar-West update for one DP mass.
double sample_dp_concentration(double current, const GammaPrior& prior,
                               std::span<const std::pair<int, int>> groups,
                               Rng& rng);

class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const Hyperparams& hyper,
               const SamplerConfig& cfg);

  void init();
  void sweep_memberships();
  void update_theta();
  void update_omega();
  void update_psi();
  void update_concentrations();
  void step();

  const PosteriorDraw& draw() const { return cur_; }
  void set_draw(PosteriorDraw d) { cur_ = std::move(d); }
  Rng& rng() { return rng_; }
  const Dataset& data() const { return data_; }
  const Hyperparams& hyper() const { return hyper_; }

 private:
  struct Orphan {
    int level = 0;  // 0 none, 1 x, 2 m, 3 y
    OutcomeParams theta;
    MediatorParams omega;
    CovariateParams psi;
  };

  Orphan remove_subject(int i);
  void reassign_subject(int i, const Orphan& orphan);

  double loglik_y(const OutcomeParams& th, int i) const;
  double loglik_m(const MediatorParams& om, int i) const;
  double loglik_x(const CovariateParams& ps, int i) const;

  const Dataset& data_;
  Hyperparams hyper_;
  SamplerConfig cfg_;
  Rng rng_;
  PosteriorDraw cur_;

  // Precomputed design rows: (1,a,l,m) for the outcome model, (1,a,l) for
  // mediators, and the raw covariate coordinates split binary/continuous.
  Eigen::MatrixXd yrow_, mrow_, xbin_, xcont_;

  struct Cand {
    int type;  // 0 existing, 1 new-x, 2 new-m, 3 new-y
    int j, l, u, t;
  };
  std::vector<Cand> cands_;
  std::vector<double> logw_;
};

struct ChainStats {
  long draws_emitted = 0;
  long legality_failures = 0;
};

// Full chain: init, iterate, emit post-burn-in thinned draws through sink.
ChainStats run_chain(const Dataset& data, const Hyperparams& hyper,
                     const SamplerConfig& cfg,
                     const std::function<void(const PosteriorDraw&)>& sink);

std::vector<PosteriorDraw> run_chain_collect(const Dataset& data,
                                             const Hyperparams& hyper,
                                             const SamplerConfig& cfg,
                                             ChainStats* stats = nullptr);

// Spec-surface single-step operations; each applies one Gibbs block to a
// copy of the draw. Used by tests; run_chain is the production path.
PosteriorDraw init_state(const Dataset& data, const Hyperparams& hyper,
                         const SamplerConfig& cfg);
PosteriorDraw sample_memberships(const PosteriorDraw& in, const Dataset& data,
                                 const Hyperparams& hyper,
                                 const SamplerConfig& cfg, Rng& rng);
PosteriorDraw sample_theta(const PosteriorDraw& in, const Dataset& data,
                           const Hyperparams& hyper, const SamplerConfig& cfg,
                           Rng& rng);
PosteriorDraw sample_omega(const PosteriorDraw& in, const Dataset& data,
                           const Hyperparams& hyper, const SamplerConfig& cfg,
                           Rng& rng);
PosteriorDraw sample_psi(const PosteriorDraw& in, const Dataset& data,
                         const Hyperparams& hyper, const SamplerConfig& cfg,
                         Rng& rng);
PosteriorDraw sample_concentrations(const PosteriorDraw& in, const Dataset& data,
                                    const Hyperparams& hyper,
                                    const SamplerConfig& cfg, Rng& rng);

}  // namespace bnpmed
