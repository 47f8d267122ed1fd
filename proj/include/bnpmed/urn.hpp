#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bnpmed/rng.hpp"

namespace bnpmed::urn {

// One urn draw: (X-color i, M-color j, Y-color l), zero-based.
using Triple = std::array<int, 3>;

// Ball counts of the three-level enriched Polya urn over finite color spaces:
// alpha[i] X-balls of color i; mu[i][j] M-balls of color j in the M|i urn;
// gamma[i][j][l] Y-balls of color l in the Y|(j,i) urn. Counts may be any
// positive reals (Dirichlet masses).
struct UrnParams {
  std::vector<double> alpha;
  std::vector<std::vector<double>> mu;
  std::vector<std::vector<std::vector<double>>> gamma;

  int k() const { return static_cast<int>(alpha.size()); }
  int r() const { return mu.empty() ? 0 : static_cast<int>(mu[0].size()); }
  int s() const {
    return (gamma.empty() || gamma[0].empty()) ? 0
                                               : static_cast<int>(gamma[0][0].size());
  }
  double alpha_total() const;
  double mu_total(int i) const;
  double gamma_total(int i, int j) const;
  void validate() const;

  static UrnParams symmetric(int k, int r, int s, double count);
};

// Tabulated history counts n_i, n_ij, n_ijl.
struct UrnCounts {
  std::vector<double> n_i;
  std::vector<std::vector<double>> n_ij;
  std::vector<std::vector<std::vector<double>>> n_ijl;
  double n = 0.0;
};

UrnCounts tabulate(const UrnParams& params, std::span<const Triple> history);

// Predictive probability table for the next draw given a history; flattened
// with index (i*r + j)*s + l. Sums to 1.
std::vector<double> urn_predictive(const UrnParams& params,
                                   std::span<const Triple> history);

// Sequential urn simulation; deterministic given the rng stream.
std::vector<Triple> simulate_sequence(const UrnParams& params, int n, Rng& rng);

// Closed-form joint log-probability of a history (the p_alpha x p_mu x
// p_gamma product form); order-invariant by construction.
double log_joint_probability(const UrnParams& params,
                             std::span<const Triple> history);

// Posterior update: unit mass added at each observed atom per level.
UrnParams posterior_edp3(const UrnParams& params,
                         std::span<const Triple> observations);

struct LevelMoments {
  double mean = 0.0;
  double var = 0.0;
};

LevelMoments edp3_x_moments(const UrnParams& params, std::span<const int> A);
LevelMoments edp3_m_moments(const UrnParams& params, std::span<const int> B, int x);
LevelMoments edp3_y_moments(const UrnParams& params, std::span<const int> C, int m,
                            int x);
double edp3_joint_mean(const UrnParams& params, std::span<const int> A,
                       std::span<const int> B, std::span<const int> C);

// All Property-1 moments in one bundle; the conditional levels are evaluated
// at the given x (and m) colors.
struct Edp3Moments {
  LevelMoments x;
  LevelMoments m_given_x;
  LevelMoments y_given_mx;
  double joint_mean = 0.0;
};

Edp3Moments edp3_moments(const UrnParams& params, std::span<const int> A,
                         std::span<const int> B, std::span<const int> C,
                         int x_cond, int m_cond);

// Truncated cube-breaking weights: pi[j], pi_lj[j][l], pi_ujl[j][l][u] with
// the per-family residual masses 1 - (partial sum) reported explicitly.
struct TruncatedCubeBreak {
  int depth = 0;
  std::vector<double> pi;
  std::vector<std::vector<double>> pi_lj;
  std::vector<std::vector<std::vector<double>>> pi_ujl;
  double residual_x = 1.0;
  std::vector<double> residual_m;
  std::vector<std::vector<double>> residual_y;
};

TruncatedCubeBreak cube_break(double alpha_theta, double alpha_omega,
                              double alpha_psi, int depth, Rng& rng);

// Self-contained property suite used by both tests and the validate-urn
// command: each entry is one check with its observed statistic and bound.
struct UrnCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
};

std::vector<UrnCheck> validation_suite(std::uint64_t seed);

}  // namespace bnpmed::urn
