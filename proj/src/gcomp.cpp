#include "bnpmed/gcomp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bnpmed/densities.hpp"
#include "bnpmed/math.hpp"

namespace bnpmed {

void EffectQuery::validate(int Q) const {
  if (mc_draws < 1) throw std::invalid_argument("EffectQuery: mc_draws >= 1");
  if (a != 0 && a != 1) throw std::invalid_argument("EffectQuery: a must be 0/1");
  if (static_cast<int>(pattern.size()) != Q)
    throw std::invalid_argument("EffectQuery: pattern length must equal Q");
  for (int v : pattern)
    if (v != 0 && v != 1)
      throw std::invalid_argument("EffectQuery: pattern entries must be 0/1");
}

std::string Effect::name() const {
  switch (kind) {
    case EffectKind::TE: return "TE";
    case EffectKind::NDE: return "NDE";
    case EffectKind::JNIE: return "JNIE";
    case EffectKind::INIE: return "INIE_" + std::to_string(subset.at(0));
    case EffectKind::PNIE: {
      std::string s = "PNIE";
      for (int q : subset) s += "_" + std::to_string(q);
      return s;
    }
  }
  return "?";
}

Effect Effect::parse(const std::string& name, int Q) {
  Effect e;
  if (name == "TE") {
    e.kind = EffectKind::TE;
    return e;
  }
  if (name == "NDE") {
    e.kind = EffectKind::NDE;
    return e;
  }
  if (name == "JNIE") {
    e.kind = EffectKind::JNIE;
    return e;
  }
  auto parse_subset = [&](const std::string& tail) {
    std::vector<int> out;
    std::stringstream ss(tail);
    std::string tok;
    while (std::getline(ss, tok, '_')) {
      if (tok.empty()) throw std::invalid_argument("effect name: empty index in " + name);
      const int v = std::stoi(tok);
      if (v < 1 || v > Q)
        throw std::invalid_argument("effect name: mediator index out of 1.." +
                                    std::to_string(Q) + " in " + name);
      out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
      throw std::invalid_argument("effect name: duplicate mediator index in " + name);
    return out;
  };
  if (name.rfind("INIE_", 0) == 0) {
    e.kind = EffectKind::INIE;
    e.subset = parse_subset(name.substr(5));
    if (e.subset.size() != 1)
      throw std::invalid_argument("INIE takes exactly one mediator index: " + name);
    return e;
  }
  if (name.rfind("PNIE_", 0) == 0) {
    e.kind = EffectKind::PNIE;
    e.subset = parse_subset(name.substr(5));
    if (e.subset.empty())
      throw std::invalid_argument("PNIE needs at least one mediator index: " + name);
    return e;
  }
  throw std::invalid_argument("unknown effect name: " + name);
}

std::vector<Effect> default_effect_set(int) {
  return {Effect{EffectKind::TE, {}}, Effect{EffectKind::NDE, {}},
          Effect{EffectKind::JNIE, {}}};
}

double empirical_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("empirical_quantile: empty");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

GcompEngine::GcompEngine(const PosteriorDraw& draw, const Hyperparams& hyper)
    : draw_(draw), hyper_(hyper) {
  const auto& st = draw_.state;
  if (st.k() == 0) throw std::invalid_argument("GcompEngine: empty state");
  n_ = st.n();
  const auto& psi0 = st.ys[0].ms[0].xs[0].psi;
  p1_ = static_cast<int>(psi0.g.size()) - 1;
  p2_ = static_cast<int>(psi0.h.size());
  q_ = st.ys[0].ms[0].omega.q();
  for (int j = 0; j < st.k(); ++j)
    for (int l = 0; l < static_cast<int>(st.ys[j].ms.size()); ++l)
      flat_.push_back({j, l, st.ys[j].ms[l].count, &st.ys[j].ms[l]});
}

Eigen::VectorXd GcompEngine::covariate_vec(int a, VecRef l) const {
  Eigen::VectorXd x(1 + l.size());
  x(0) = static_cast<double>(a);
  x.segment(1, l.size()) = l;
  return x;
}

CovariateDraw GcompEngine::draw_covariates(Rng& rng) const {
  const auto& st = draw_.state;
  const auto& al = draw_.alpha;
  CovariateDraw out;

  // Substeps a.1-a.3: nested multinomial descent, "new" at any level short-
  // circuits to prior-drawn covariate parameters.
  std::vector<double> w;
  for (const auto& yc : st.ys) w.push_back(static_cast<double>(yc.count));
  w.push_back(al.theta);
  const int j = rng.categorical(w);
  out.path = {j, 0, 0};
  const CovariateParams* psi = nullptr;
  CovariateParams fresh;
  if (j == st.k()) {
    out.path = {st.k(), 0, 0};
    fresh = covariate_prior_draw(hyper_, p1_, rng);
    psi = &fresh;
  } else {
    const auto& yc = st.ys[j];
    w.clear();
    for (const auto& mc : yc.ms) w.push_back(static_cast<double>(mc.count));
    w.push_back(al.omega);
    const int l = rng.categorical(w);
    out.path.l = l;
    if (l == static_cast<int>(yc.ms.size())) {
      fresh = covariate_prior_draw(hyper_, p1_, rng);
      psi = &fresh;
    } else {
      const auto& mc = yc.ms[l];
      w.clear();
      for (const auto& xc : mc.xs) w.push_back(static_cast<double>(xc.count));
      w.push_back(al.psi);
      const int u = rng.categorical(w);
      out.path.u = u;
      if (u == static_cast<int>(mc.xs.size())) {
        fresh = covariate_prior_draw(hyper_, p1_, rng);
        psi = &fresh;
      } else {
        psi = &mc.xs[u].psi;
      }
    }
  }

  // Substep a.4: sample the confounders (binary slots 1..p1 of psi.g, then
  // the continuous coordinates).
  out.l.resize(p1_ + p2_);
  for (int r = 0; r < p1_; ++r)
    out.l(r) = rng.bernoulli(psi->g(1 + r)) ? 1.0 : 0.0;
  for (int r = 0; r < p2_; ++r)
    out.l(p1_ + r) = rng.normal(psi->h(r), std::sqrt(psi->f(r)));
  return out;
}

std::vector<double> GcompEngine::m_branch_weights(int a, VecRef l) const {
  const auto& al = draw_.alpha;
  const Eigen::VectorXd x = covariate_vec(a, l);
  const double lk0x = log_k0_covariate(hyper_, x, p1_);
  std::vector<double> logw;
  logw.push_back(std::log(al.omega / (al.omega + n_)) + lk0x);
  for (const auto& f : flat_) {
    const double lbase = std::log(f.count / (al.omega + n_));
    logw.push_back(lbase + std::log(al.psi / (al.psi + f.count)) + lk0x);
    for (const auto& xc : f.mc->xs)
      logw.push_back(lbase + std::log(xc.count / (al.psi + f.count)) +
                     log_covariate_density(xc.psi, x));
  }
  const double lse = logsumexp(logw);
  std::vector<double> wout(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) wout[i] = std::exp(logw[i] - lse);
  return wout;
}

ArmSelection GcompEngine::select_m_cluster(int a, VecRef l, Rng& rng) const {
  const auto& al = draw_.alpha;
  const Eigen::VectorXd x = covariate_vec(a, l);
  const double lk0x = log_k0_covariate(hyper_, x, p1_);
  std::vector<double> logw;
  struct Ref {
    int branch, flat;
  };
  std::vector<Ref> refs;
  logw.push_back(std::log(al.omega / (al.omega + n_)) + lk0x);
  refs.push_back({0, -1});
  for (int fi = 0; fi < static_cast<int>(flat_.size()); ++fi) {
    const auto& f = flat_[fi];
    const double lbase = std::log(f.count / (al.omega + n_));
    logw.push_back(lbase + std::log(al.psi / (al.psi + f.count)) + lk0x);
    refs.push_back({1, fi});
    for (const auto& xc : f.mc->xs) {
      logw.push_back(lbase + std::log(xc.count / (al.psi + f.count)) +
                     log_covariate_density(xc.psi, x));
      refs.push_back({2, fi});
    }
  }
  const Ref pick = refs[rng.categorical_from_log(logw)];
  ArmSelection sel;
  sel.branch = pick.branch;
  sel.flat_index = pick.flat;
  if (pick.branch == 0) {
    std::vector<ColKind> kinds;
    for (const auto& pr : hyper_.mediators)
      kinds.push_back(pr.binary ? ColKind::Binary : ColKind::Continuous);
    sel.fresh = mediator_prior_draw(hyper_, kinds, rng);
  } else {
    sel.omega = &flat_[pick.flat].mc->omega;
  }
  return sel;
}

double GcompEngine::sample_mediator(const MediatorParams& om, int q, int aq,
                                    VecRef l, Rng& rng) const {
  Eigen::VectorXd row(2 + l.size());
  row(0) = 1.0;
  row(1) = static_cast<double>(aq);
  row.segment(2, l.size()) = l;
  const double eta = om.coef.col(q).dot(row);
  if (om.kinds[q] == ColKind::Binary)
    return rng.bernoulli(normal_cdf(eta)) ? 1.0 : 0.0;
  return rng.normal(eta, std::sqrt(om.var(q)));
}

Eigen::VectorXd GcompEngine::draw_mediators(VecRef l,
                                            const std::vector<int>& pattern,
                                            Rng& rng) const {
  if (static_cast<int>(pattern.size()) != q_)
    throw std::invalid_argument("draw_mediators: pattern length mismatch");
  const bool need1 = std::find(pattern.begin(), pattern.end(), 1) != pattern.end();
  const bool need0 = std::find(pattern.begin(), pattern.end(), 0) != pattern.end();
  ArmSelection sel1, sel0;
  if (need1) sel1 = select_m_cluster(1, l, rng);
  if (need0) sel0 = select_m_cluster(0, l, rng);
  Eigen::VectorXd m(q_);
  for (int q = 0; q < q_; ++q) {
    const ArmSelection& sel = pattern[q] == 1 ? sel1 : sel0;
    const MediatorParams& om = sel.branch == 0 ? sel.fresh : *sel.omega;
    m(q) = sample_mediator(om, q, pattern[q], l, rng);
  }
  return m;
}

double GcompEngine::expected_outcome(int a, VecRef l, VecRef m) const {
  const auto& st = draw_.state;
  const auto& al = draw_.alpha;
  const Eigen::VectorXd x = covariate_vec(a, l);
  Eigen::VectorXd mrow(2 + l.size());
  mrow(0) = 1.0;
  mrow(1) = static_cast<double>(a);
  mrow.segment(2, l.size()) = l;
  Eigen::VectorXd yrow(2 + l.size() + m.size());
  yrow.head(2 + l.size()) = mrow;
  yrow.tail(m.size()) = m;

  const double lk0x = log_k0_covariate(hyper_, x, p1_);
  const double lk0m = log_k0_mediator(hyper_, m, mrow);

  std::vector<double> logw, means;
  logw.push_back(std::log(al.theta / (al.theta + n_)) + lk0x + lk0m);
  means.push_back(e0_outcome(hyper_, yrow));

  std::vector<double> terms;
  for (int j = 0; j < st.k(); ++j) {
    const auto& yc = st.ys[j];
    terms.clear();
    terms.push_back(std::log(al.omega / (al.omega + yc.count)) + lk0m + lk0x);
    for (const auto& mc : yc.ms) {
      double lm = 0.0;
      for (int q = 0; q < q_; ++q) {
        const double eta = mc.omega.coef.col(q).dot(mrow);
        if (mc.omega.kinds[q] == ColKind::Binary)
          lm += log_normal_cdf(m(q) > 0.5 ? eta : -eta);
        else
          lm += log_normal_pdf(m(q), eta, mc.omega.var(q));
      }
      const double lml = std::log(mc.count / (al.omega + yc.count));
      terms.push_back(lml + std::log(al.psi / (al.psi + mc.count)) + lm + lk0x);
      for (const auto& xc : mc.xs)
        terms.push_back(lml + std::log(xc.count / (al.psi + mc.count)) + lm +
                        log_covariate_density(xc.psi, x));
    }
    logw.push_back(std::log(yc.count / (al.theta + n_)) + logsumexp(terms));
    means.push_back(glm_mean(yc.theta.coef, yc.theta.var, yc.theta.binary, yrow));
  }

  const double lse = logsumexp(logw);
  double out = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i)
    out += std::exp(logw[i] - lse) * means[i];
  return out;
}

double GcompEngine::log_predictive_outcome(int a, VecRef l, VecRef m,
                                           double y) const {
  const auto& st = draw_.state;
  const auto& al = draw_.alpha;
  const Eigen::VectorXd x = covariate_vec(a, l);
  Eigen::VectorXd mrow(2 + l.size());
  mrow(0) = 1.0;
  mrow(1) = static_cast<double>(a);
  mrow.segment(2, l.size()) = l;
  Eigen::VectorXd yrow(2 + l.size() + m.size());
  yrow.head(2 + l.size()) = mrow;
  yrow.tail(m.size()) = m;

  const double lk0x = log_k0_covariate(hyper_, x, p1_);
  const double lk0m = log_k0_mediator(hyper_, m, mrow);

  std::vector<double> logw, logdens, terms;
  logw.push_back(std::log(al.theta / (al.theta + n_)) + lk0x + lk0m);
  logdens.push_back(log_k0_outcome(hyper_, y, yrow));
  for (int j = 0; j < st.k(); ++j) {
    const auto& yc = st.ys[j];
    terms.clear();
    terms.push_back(std::log(al.omega / (al.omega + yc.count)) + lk0m + lk0x);
    for (const auto& mc : yc.ms) {
      double lm = 0.0;
      for (int q = 0; q < q_; ++q) {
        const double eta = mc.omega.coef.col(q).dot(mrow);
        if (mc.omega.kinds[q] == ColKind::Binary)
          lm += log_normal_cdf(m(q) > 0.5 ? eta : -eta);
        else
          lm += log_normal_pdf(m(q), eta, mc.omega.var(q));
      }
      const double lml = std::log(mc.count / (al.omega + yc.count));
      terms.push_back(lml + std::log(al.psi / (al.psi + mc.count)) + lm + lk0x);
      for (const auto& xc : mc.xs)
        terms.push_back(lml + std::log(xc.count / (al.psi + mc.count)) + lm +
                        log_covariate_density(xc.psi, x));
    }
    logw.push_back(std::log(yc.count / (al.theta + n_)) + logsumexp(terms));
    logdens.push_back(log_glm_density(yc.theta.coef, yc.theta.var,
                                      yc.theta.binary, yrow, y));
  }
  std::vector<double> num(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) num[i] = logw[i] + logdens[i];
  return logsumexp(num) - logsumexp(logw);
}

PotentialOutcomeEstimate expected_potential_outcome(const PosteriorDraw& draw,
                                                    const Hyperparams& hyper,
                                                    const EffectQuery& query,
                                                    Rng& rng) {
  GcompEngine eng(draw, hyper);
  query.validate(eng.q());
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < query.mc_draws; ++t) {
    const CovariateDraw cov = eng.draw_covariates(rng);
    const Eigen::VectorXd m = eng.draw_mediators(cov.l, query.pattern, rng);
    const double v = eng.expected_outcome(query.a, cov.l, m);
    sum += v;
    sumsq += v * v;
  }
  PotentialOutcomeEstimate est;
  const double T = static_cast<double>(query.mc_draws);
  est.mean = sum / T;
  const double var = std::max(0.0, sumsq / T - est.mean * est.mean);
  est.se = query.mc_draws > 1 ? std::sqrt(var / (T - 1.0)) : 0.0;
  return est;
}

namespace {

struct PoKey {
  int a;
  std::vector<int> pattern;
  bool operator<(const PoKey& o) const {
    return std::tie(a, pattern) < std::tie(o.a, o.pattern);
  }
};

// Required potential outcomes per effect: value = PO[first] - PO[second].
struct EffectPlan {
  std::string name;
  PoKey lhs, rhs;
};

std::vector<int> ones_pattern(int Q) { return std::vector<int>(Q, 1); }
std::vector<int> zeros_pattern(int Q) { return std::vector<int>(Q, 0); }

std::vector<int> flipped_pattern(int Q, const std::vector<int>& subset) {
  std::vector<int> p(Q, 1);
  for (int q : subset) p[q - 1] = 0;
  return p;
}

}  // namespace

std::vector<EffectEstimate> causal_effects(const std::vector<PosteriorDraw>& draws,
                                           const Hyperparams& hyper,
                                           const std::vector<Effect>& effects,
                                           int mc_draws, std::uint64_t seed,
                                           int workers) {
  if (draws.empty()) throw std::invalid_argument("causal_effects: empty draw stream");
  if (mc_draws < 1) throw std::invalid_argument("causal_effects: mc_draws >= 1");
  const GcompEngine probe(draws.front(), hyper);
  const int Q = probe.q();

  std::vector<EffectPlan> plans;
  std::map<PoKey, int> po_index;
  auto intern = [&](PoKey k) {
    auto it = po_index.find(k);
    if (it != po_index.end()) return it->second;
    const int idx = static_cast<int>(po_index.size());
    po_index.emplace(std::move(k), idx);
    return idx;
  };
  for (const Effect& e : effects) {
    EffectPlan pl;
    pl.name = e.name();
    switch (e.kind) {
      case EffectKind::TE:
        pl.lhs = {1, ones_pattern(Q)};
        pl.rhs = {0, zeros_pattern(Q)};
        break;
      case EffectKind::NDE:
        pl.lhs = {1, zeros_pattern(Q)};
        pl.rhs = {0, zeros_pattern(Q)};
        break;
      case EffectKind::JNIE:
        pl.lhs = {1, ones_pattern(Q)};
        pl.rhs = {1, zeros_pattern(Q)};
        break;
      case EffectKind::INIE:
      case EffectKind::PNIE:
        for (int q : e.subset)
          if (q < 1 || q > Q)
            throw std::invalid_argument("causal_effects: mediator subset out of range");
        pl.lhs = {1, ones_pattern(Q)};
        pl.rhs = {1, flipped_pattern(Q, e.subset)};
        break;
    }
    intern(pl.lhs);
    intern(pl.rhs);
    plans.push_back(std::move(pl));
  }
  std::vector<PoKey> pos(po_index.size());
  for (const auto& [k, idx] : po_index) pos[idx] = k;

  const int ndraws = static_cast<int>(draws.size());
  std::vector<std::vector<double>> po_means(ndraws);

  auto eval_draw = [&](int d) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(d)));
    GcompEngine eng(draws[d], hyper);
    std::vector<double> acc(pos.size(), 0.0);
    Eigen::VectorXd m1(Q), m0(Q), m(Q);
    for (int t = 0; t < mc_draws; ++t) {
      const CovariateDraw cov = eng.draw_covariates(rng);
      // Shared arm draws: one m-cluster selection and one mediator value per
      // arm, reused by every pattern (common random numbers across contrasts).
      const ArmSelection sel1 = eng.select_m_cluster(1, cov.l, rng);
      const ArmSelection sel0 = eng.select_m_cluster(0, cov.l, rng);
      const MediatorParams& om1 = sel1.branch == 0 ? sel1.fresh : *sel1.omega;
      const MediatorParams& om0 = sel0.branch == 0 ? sel0.fresh : *sel0.omega;
      for (int q = 0; q < Q; ++q) {
        m1(q) = eng.sample_mediator(om1, q, 1, cov.l, rng);
        m0(q) = eng.sample_mediator(om0, q, 0, cov.l, rng);
      }
      for (std::size_t pi = 0; pi < pos.size(); ++pi) {
        for (int q = 0; q < Q; ++q) m(q) = pos[pi].pattern[q] == 1 ? m1(q) : m0(q);
        acc[pi] += eng.expected_outcome(pos[pi].a, cov.l, m);
      }
    }
    for (double& v : acc) v /= static_cast<double>(mc_draws);
    po_means[d] = std::move(acc);
  };

  const int nw = std::max(1, std::min<int>(workers, ndraws));
  if (nw == 1) {
    for (int d = 0; d < ndraws; ++d) eval_draw(d);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const int d = next.fetch_add(1);
          if (d >= ndraws) return;
          eval_draw(d);
        }
      });
    for (auto& th : pool) th.join();
  }

  std::vector<EffectEstimate> out;
  for (const EffectPlan& pl : plans) {
    EffectEstimate est;
    est.name = pl.name;
    est.per_draw.resize(ndraws);
    const int il = po_index.at(pl.lhs), ir = po_index.at(pl.rhs);
    for (int d = 0; d < ndraws; ++d)
      est.per_draw[d] = po_means[d][il] - po_means[d][ir];
    double sum = 0.0;
    for (double v : est.per_draw) sum += v;
    est.mean = sum / ndraws;
    double ss = 0.0;
    for (double v : est.per_draw) ss += (v - est.mean) * (v - est.mean);
    est.mc_se = ndraws > 1 ? std::sqrt(ss / (ndraws - 1.0) / ndraws) : 0.0;
    est.ci_low = empirical_quantile(est.per_draw, 0.025);
    est.ci_high = empirical_quantile(est.per_draw, 0.975);
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace bnpmed
