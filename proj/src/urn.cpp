#include "bnpmed/urn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bnpmed/math.hpp"

namespace bnpmed::urn {

double UrnParams::alpha_total() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0);
}

double UrnParams::mu_total(int i) const {
  return std::accumulate(mu[i].begin(), mu[i].end(), 0.0);
}

double UrnParams::gamma_total(int i, int j) const {
  return std::accumulate(gamma[i][j].begin(), gamma[i][j].end(), 0.0);
}

void UrnParams::validate() const {
  if (alpha.empty() || mu.size() != alpha.size() || gamma.size() != alpha.size())
    throw std::invalid_argument("UrnParams: empty or ragged support");
  const int R = r(), S = s();
  if (R == 0 || S == 0) throw std::invalid_argument("UrnParams: empty support");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("UrnParams: counts must be positive");
  for (int i = 0; i < k(); ++i) {
    if (static_cast<int>(mu[i].size()) != R || static_cast<int>(gamma[i].size()) != R)
      throw std::invalid_argument("UrnParams: ragged M level");
    for (int j = 0; j < R; ++j) {
      if (!(mu[i][j] > 0.0))
        throw std::invalid_argument("UrnParams: counts must be positive");
      if (static_cast<int>(gamma[i][j].size()) != S)
        throw std::invalid_argument("UrnParams: ragged Y level");
      for (int l = 0; l < S; ++l)
        if (!(gamma[i][j][l] > 0.0))
          throw std::invalid_argument("UrnParams: counts must be positive");
    }
  }
}

UrnParams UrnParams::symmetric(int k, int r, int s, double count) {
  UrnParams p;
  p.alpha.assign(k, count);
  p.mu.assign(k, std::vector<double>(r, count));
  p.gamma.assign(k, std::vector<std::vector<double>>(r, std::vector<double>(s, count)));
  return p;
}

UrnCounts tabulate(const UrnParams& params, std::span<const Triple> history) {
  const int K = params.k(), R = params.r(), S = params.s();
  UrnCounts c;
  c.n_i.assign(K, 0.0);
  c.n_ij.assign(K, std::vector<double>(R, 0.0));
  c.n_ijl.assign(K, std::vector<std::vector<double>>(R, std::vector<double>(S, 0.0)));
  for (const auto& t : history) {
    const auto [i, j, l] = t;
    if (i < 0 || i >= K || j < 0 || j >= R || l < 0 || l >= S)
      throw std::invalid_argument("urn history: color out of range");
    c.n_i[i] += 1.0;
    c.n_ij[i][j] += 1.0;
    c.n_ijl[i][j][l] += 1.0;
    c.n += 1.0;
  }
  return c;
}

std::vector<double> urn_predictive(const UrnParams& params,
                                   std::span<const Triple> history) {
  params.validate();
  const UrnCounts c = tabulate(params, history);
  const int K = params.k(), R = params.r(), S = params.s();
  std::vector<double> table(static_cast<std::size_t>(K) * R * S);
  const double ax = params.alpha_total() + c.n;
  for (int i = 0; i < K; ++i) {
    const double pi = (params.alpha[i] + c.n_i[i]) / ax;
    const double mi = params.mu_total(i) + c.n_i[i];
    for (int j = 0; j < R; ++j) {
      const double pj = (params.mu[i][j] + c.n_ij[i][j]) / mi;
      const double gij = params.gamma_total(i, j) + c.n_ij[i][j];
      for (int l = 0; l < S; ++l) {
        const double pl = (params.gamma[i][j][l] + c.n_ijl[i][j][l]) / gij;
        table[(static_cast<std::size_t>(i) * R + j) * S + l] = pi * pj * pl;
      }
    }
  }
  return table;
}

std::vector<Triple> simulate_sequence(const UrnParams& params, int n, Rng& rng) {
  params.validate();
  if (n < 1) throw std::invalid_argument("simulate_sequence: n must be >= 1");
  const int K = params.k(), R = params.r();
  // Mutable working counts = prior counts; each draw adds one ball per level.
  std::vector<double> a = params.alpha;
  auto m = params.mu;
  auto g = params.gamma;
  double atot = params.alpha_total();
  std::vector<double> mtot(K), w;
  std::vector<std::vector<double>> gtot(K, std::vector<double>(R));
  for (int i = 0; i < K; ++i) {
    mtot[i] = params.mu_total(i);
    for (int j = 0; j < R; ++j) gtot[i][j] = params.gamma_total(i, j);
  }
  std::vector<Triple> out;
  out.reserve(n);
  for (int t = 0; t < n; ++t) {
    const int i = rng.categorical(a);
    const int j = rng.categorical(m[i]);
    const int l = rng.categorical(g[i][j]);
    a[i] += 1.0;
    atot += 1.0;
    m[i][j] += 1.0;
    mtot[i] += 1.0;
    g[i][j][l] += 1.0;
    gtot[i][j] += 1.0;
    out.push_back({i, j, l});
  }
  return out;
}

double log_joint_probability(const UrnParams& params,
                             std::span<const Triple> history) {
  params.validate();
  const UrnCounts c = tabulate(params, history);
  const int K = params.k(), R = params.r(), S = params.s();
  double lp = std::lgamma(params.alpha_total()) -
              std::lgamma(params.alpha_total() + c.n);
  for (int i = 0; i < K; ++i)
    lp += std::lgamma(params.alpha[i] + c.n_i[i]) - std::lgamma(params.alpha[i]);
  for (int i = 0; i < K; ++i) {
    lp += std::lgamma(params.mu_total(i)) - std::lgamma(params.mu_total(i) + c.n_i[i]);
    for (int j = 0; j < R; ++j)
      lp += std::lgamma(params.mu[i][j] + c.n_ij[i][j]) - std::lgamma(params.mu[i][j]);
  }
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < R; ++j) {
      lp += std::lgamma(params.gamma_total(i, j)) -
            std::lgamma(params.gamma_total(i, j) + c.n_ij[i][j]);
      for (int l = 0; l < S; ++l)
        lp += std::lgamma(params.gamma[i][j][l] + c.n_ijl[i][j][l]) -
              std::lgamma(params.gamma[i][j][l]);
    }
  return lp;
}

UrnParams posterior_edp3(const UrnParams& params,
                         std::span<const Triple> observations) {
  params.validate();
  const UrnCounts c = tabulate(params, observations);
  UrnParams post = params;
  for (int i = 0; i < params.k(); ++i) {
    post.alpha[i] += c.n_i[i];
    for (int j = 0; j < params.r(); ++j) {
      post.mu[i][j] += c.n_ij[i][j];
      for (int l = 0; l < params.s(); ++l) post.gamma[i][j][l] += c.n_ijl[i][j][l];
    }
  }
  return post;
}

namespace {
double dirichlet_set_moment_mean(double mass_in, double total) {
  return mass_in / total;
}
double dirichlet_set_moment_var(double mass_in, double total) {
  const double p = mass_in / total;
  return p * (1.0 - p) / (total + 1.0);
}
}  // namespace

LevelMoments edp3_x_moments(const UrnParams& params, std::span<const int> A) {
  params.validate();
  double mass = 0.0;
  for (int i : A) mass += params.alpha.at(i);
  const double tot = params.alpha_total();
  return {dirichlet_set_moment_mean(mass, tot), dirichlet_set_moment_var(mass, tot)};
}

LevelMoments edp3_m_moments(const UrnParams& params, std::span<const int> B, int x) {
  params.validate();
  double mass = 0.0;
  for (int j : B) mass += params.mu.at(x).at(j);
  const double tot = params.mu_total(x);
  return {dirichlet_set_moment_mean(mass, tot), dirichlet_set_moment_var(mass, tot)};
}

LevelMoments edp3_y_moments(const UrnParams& params, std::span<const int> C, int m,
                            int x) {
  params.validate();
  double mass = 0.0;
  for (int l : C) mass += params.gamma.at(x).at(m).at(l);
  const double tot = params.gamma_total(x, m);
  return {dirichlet_set_moment_mean(mass, tot), dirichlet_set_moment_var(mass, tot)};
}

double edp3_joint_mean(const UrnParams& params, std::span<const int> A,
                       std::span<const int> B, std::span<const int> C) {
  params.validate();
  // E[P(AxBxC)] = sum_{x in A, m in B} P0X(x) P0M(m|x) P0Y(C|m,x).
  double total = 0.0;
  const double ax = params.alpha_total();
  for (int i : A) {
    const double px = params.alpha.at(i) / ax;
    const double mtot = params.mu_total(i);
    for (int j : B) {
      const double pm = params.mu[i].at(j) / mtot;
      double pc = 0.0;
      const double gtot = params.gamma_total(i, j);
      for (int l : C) pc += params.gamma[i][j].at(l) / gtot;
      total += px * pm * pc;
    }
  }
  return total;
}

Edp3Moments edp3_moments(const UrnParams& params, std::span<const int> A,
                         std::span<const int> B, std::span<const int> C,
                         int x_cond, int m_cond) {
  Edp3Moments out;
  out.x = edp3_x_moments(params, A);
  out.m_given_x = edp3_m_moments(params, B, x_cond);
  out.y_given_mx = edp3_y_moments(params, C, m_cond, x_cond);
  out.joint_mean = edp3_joint_mean(params, A, B, C);
  return out;
}

TruncatedCubeBreak cube_break(double alpha_theta, double alpha_omega,
                              double alpha_psi, int depth, Rng& rng) {
  if (depth < 1) throw std::invalid_argument("cube_break: depth must be >= 1");
  if (!(alpha_theta > 0.0) || !(alpha_omega > 0.0) || !(alpha_psi > 0.0))
    throw std::invalid_argument("cube_break: concentrations must be positive");
  TruncatedCubeBreak cb;
  cb.depth = depth;
  cb.pi.resize(depth);
  cb.pi_lj.assign(depth, std::vector<double>(depth));
  cb.pi_ujl.assign(depth, std::vector<std::vector<double>>(depth, std::vector<double>(depth)));
  cb.residual_m.resize(depth);
  cb.residual_y.assign(depth, std::vector<double>(depth));
  double remain = 1.0;
  for (int j = 0; j < depth; ++j) {
    const double v = rng.beta(1.0, alpha_theta);
    cb.pi[j] = v * remain;
    remain *= (1.0 - v);
  }
  cb.residual_x = remain;
  for (int j = 0; j < depth; ++j) {
    double rem_m = 1.0;
    for (int l = 0; l < depth; ++l) {
      const double v = rng.beta(1.0, alpha_omega);
      cb.pi_lj[j][l] = v * rem_m;
      rem_m *= (1.0 - v);
    }
    cb.residual_m[j] = rem_m;
    for (int l = 0; l < depth; ++l) {
      double rem_y = 1.0;
      for (int u = 0; u < depth; ++u) {
        const double v = rng.beta(1.0, alpha_psi);
        cb.pi_ujl[j][l][u] = v * rem_y;
        rem_y *= (1.0 - v);
      }
      cb.residual_y[j][l] = rem_y;
    }
  }
  return cb;
}

namespace {

double tv_distance(std::span<const double> p, std::span<const double> q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace

std::vector<UrnCheck> validation_suite(std::uint64_t seed) {
  std::vector<UrnCheck> out;
  Rng rng(seed);

  // Exchangeability: closed-form joint invariant under all permutations of a
  // length-4 history (exact, bit-level tolerance only for lgamma rounding).
  {
    UrnParams p;
    p.alpha = {1.0, 2.0};
    p.mu = {{0.5, 1.5}, {2.0, 1.0}};
    p.gamma = {{{1.0, 1.0}, {0.5, 2.0}}, {{2.0, 0.5}, {1.0, 3.0}}};
    std::vector<Triple> hist = {{0, 1, 0}, {1, 0, 1}, {0, 1, 1}, {0, 0, 0}};
    std::vector<int> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end());
    const double ref = log_joint_probability(p, hist);
    double worst = 0.0;
    do {
      std::vector<Triple> perm;
      for (int ii : idx) perm.push_back(hist[ii]);
      worst = std::max(worst, std::abs(log_joint_probability(p, perm) - ref));
    } while (std::next_permutation(idx.begin(), idx.end()));
    out.push_back({"exchangeability_permutation_invariance", worst <= 1e-10, worst, 1e-10});
  }

  // Predictive normalization on a random history.
  {
    UrnParams p = UrnParams::symmetric(3, 2, 2, 0.7);
    auto hist = simulate_sequence(p, 25, rng);
    auto table = urn_predictive(p, hist);
    const double s = std::accumulate(table.begin(), table.end(), 0.0);
    const double err = std::abs(s - 1.0);
    out.push_back({"predictive_normalization", err <= 1e-12, err, 1e-12});
  }

  // Property 1 moments vs 1e5 simulated first draws: empirical frequency of
  // X in A compared against P0X(A) with a 3-sigma binomial band.
  {
    UrnParams p;
    p.alpha = {1.0, 3.0};
    p.mu = {{1.0, 1.0}, {2.0, 2.0}};
    p.gamma = {{{1.0, 1.0}, {1.0, 1.0}}, {{1.0, 1.0}, {1.0, 1.0}}};
    const int runs = 100000;
    int hits = 0;
    for (int t = 0; t < runs; ++t) {
      auto seq = simulate_sequence(p, 1, rng);
      if (seq[0][0] == 0) ++hits;
    }
    std::vector<int> A = {0};
    const auto mom = edp3_x_moments(p, A);
    const double phat = static_cast<double>(hits) / runs;
    const double band = 3.0 * std::sqrt(mom.mean * (1.0 - mom.mean) / runs);
    out.push_back({"property1_mean_simulation", std::abs(phat - mom.mean) <= band,
                   std::abs(phat - mom.mean), band});
  }

  // Posterior/predictive cross-consistency: predictive from posterior params
  // equals predictive with the history appended, exactly.
  {
    UrnParams p = UrnParams::symmetric(2, 2, 2, 1.0);
    auto hist = simulate_sequence(p, 12, rng);
    auto post = posterior_edp3(p, hist);
    auto t1 = urn_predictive(post, {});
    auto t2 = urn_predictive(p, hist);
    double worst = 0.0;
    for (std::size_t i = 0; i < t1.size(); ++i)
      worst = std::max(worst, std::abs(t1[i] - t2[i]));
    out.push_back({"posterior_predictive_consistency", worst <= 1e-14, worst, 1e-14});
  }

  // Cube-breaking: partial sums never exceed 1; residual complements partial
  // sums; Beta(1, alpha) first-weight mean over draws.
  {
    double worst = 0.0;
    double sum_pi1 = 0.0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
      auto cb = cube_break(2.0, 1.0, 3.0, 8, rng);
      double s = std::accumulate(cb.pi.begin(), cb.pi.end(), 0.0);
      worst = std::max(worst, s + cb.residual_x - 1.0);
      worst = std::max(worst, std::abs(1.0 - s - cb.residual_x));
      sum_pi1 += cb.pi[0];
    }
    const double mean_pi1 = sum_pi1 / draws;
    const double expect = 1.0 / 3.0;  // E Beta(1,2)
    const double band = 3.0 * std::sqrt(expect * (1 - expect) / draws) * 2.0;
    const bool pass = worst <= 1e-12 && std::abs(mean_pi1 - expect) <= band;
    out.push_back({"cube_break_weights", pass, std::abs(mean_pi1 - expect), band});
  }

  // Theorem 3 smoke test: data iid from a fixed pi; TV between the posterior
  // mean predictive and pi decreases over n = 1e2, 1e3, 1e4.
  {
    UrnParams p = UrnParams::symmetric(2, 2, 2, 0.5);
    std::vector<double> pi_true = {0.30, 0.05, 0.10, 0.05, 0.20, 0.10, 0.15, 0.05};
    std::vector<double> tv(3);
    const int sizes[3] = {100, 1000, 10000};
    for (int si = 0; si < 3; ++si) {
      std::vector<Triple> data;
      for (int t = 0; t < sizes[si]; ++t) {
        const int cell = rng.categorical(pi_true);
        data.push_back({cell / 4, (cell / 2) % 2, cell % 2});
      }
      auto pred = urn_predictive(p, data);
      tv[si] = tv_distance(pred, pi_true);
    }
    const bool pass = tv[0] > tv[1] && tv[1] > tv[2];
    out.push_back({"posterior_consistency_tv_decay", pass, tv[2], tv[0]});
  }

  return out;
}

}  // namespace bnpmed::urn
