#include "bnpmed/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bnpmed/densities.hpp"
#include "bnpmed/math.hpp"

namespace bnpmed {

bool ClusterState::counts_consistent() const {
  std::vector<std::vector<std::vector<int>>> tab(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) {
    tab[j].resize(ys[j].ms.size());
    for (std::size_t l = 0; l < ys[j].ms.size(); ++l)
      tab[j][l].assign(ys[j].ms[l].xs.size(), 0);
  }
  for (const auto& as : assign) {
    if (as.j < 0 || as.j >= k()) return false;
    if (as.l < 0 || as.l >= static_cast<int>(ys[as.j].ms.size())) return false;
    if (as.u < 0 || as.u >= static_cast<int>(ys[as.j].ms[as.l].xs.size()))
      return false;
    ++tab[as.j][as.l][as.u];
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    int nj = 0;
    for (std::size_t l = 0; l < ys[j].ms.size(); ++l) {
      int nl = 0;
      for (std::size_t u = 0; u < ys[j].ms[l].xs.size(); ++u) {
        if (tab[j][l][u] == 0 || tab[j][l][u] != ys[j].ms[l].xs[u].count)
          return false;
        nl += tab[j][l][u];
      }
      if (nl != ys[j].ms[l].count) return false;
      nj += nl;
    }
    if (nj != ys[j].count) return false;
  }
  return true;
}

std::string partition_signature(const ClusterState& st) {
  std::vector<int> jmap(st.ys.size(), -1);
  std::vector<std::vector<int>> lmap(st.ys.size());
  std::vector<std::vector<std::vector<int>>> umap(st.ys.size());
  for (std::size_t j = 0; j < st.ys.size(); ++j) {
    lmap[j].assign(st.ys[j].ms.size(), -1);
    umap[j].resize(st.ys[j].ms.size());
    for (std::size_t l = 0; l < st.ys[j].ms.size(); ++l)
      umap[j][l].assign(st.ys[j].ms[l].xs.size(), -1);
  }
  int jn = 0;
  std::vector<int> ln(st.ys.size(), 0);
  std::ostringstream os;
  for (std::size_t i = 0; i < st.assign.size(); ++i) {
    const auto& as = st.assign[i];
    if (jmap[as.j] < 0) jmap[as.j] = jn++;
    if (lmap[as.j][as.l] < 0) lmap[as.j][as.l] = ln[as.j]++;
    auto& um = umap[as.j][as.l];
    int next_u = 0;
    for (int v : um) next_u = std::max(next_u, v + 1);
    if (um[as.u] < 0) um[as.u] = next_u;
    if (i) os << ';';
    os << jmap[as.j] << '.' << lmap[as.j][as.l] << '.' << um[as.u];
  }
  return os.str();
}

void SamplerConfig::validate() const {
  if (iterations <= burn_in || burn_in < 0)
    throw std::invalid_argument("SamplerConfig: need iterations > burn_in >= 0");
  if (thinning < 1) throw std::invalid_argument("SamplerConfig: thinning >= 1");
  if (aux_clusters < 1)
    throw std::invalid_argument("SamplerConfig: aux_clusters >= 1");
  if (!(init_alpha.theta > 0.0) || !(init_alpha.omega > 0.0) ||
      !(init_alpha.psi > 0.0))
    throw std::invalid_argument("SamplerConfig: initial concentrations > 0");
}

double sample_dp_concentration(double current, const GammaPrior& prior,
                               std::span<const std::pair<int, int>> groups,
                               Rng& rng) {
  double shape = prior.shape;
  double rate = prior.rate;
  for (const auto& [ng, kg] : groups) {
    if (ng < 1) continue;
    shape += kg;
    rate -= std::log(rng.beta(current + 1.0, static_cast<double>(ng)));
    if (rng.uniform() < ng / (ng + current)) shape -= 1.0;
  }
  return rng.gamma(shape, rate);
}

GibbsSampler::GibbsSampler(const Dataset& data, const Hyperparams& hyper,
                           const SamplerConfig& cfg)
    : data_(data), hyper_(hyper), cfg_(cfg), rng_(cfg.seed) {
  data_.validate();
  hyper_.validate(data_);
  cfg_.validate();
  const int n = data_.n();
  yrow_.resize(n, 2 + data_.p() + data_.q());
  mrow_.resize(n, 2 + data_.p());
  xbin_.resize(n, 1 + data_.p1());
  xcont_.resize(n, data_.p2());
  for (int i = 0; i < n; ++i) {
    yrow_.row(i) = data_.outcome_design_row(i);
    mrow_.row(i) = data_.mediator_design_row(i);
    xbin_(i, 0) = data_.a(i);
    for (int r = 0; r < data_.p1(); ++r) xbin_(i, 1 + r) = data_.l_disc(i, r);
    for (int r = 0; r < data_.p2(); ++r) xcont_(i, r) = data_.l_cont(i, r);
  }
}

void GibbsSampler::init() {
  cur_ = PosteriorDraw{};
  cur_.alpha = cfg_.init_alpha;
  cur_.iteration = 0;
  YCluster yc;
  yc.theta = outcome_prior_draw(hyper_, data_.y_kind, rng_);
  MCluster mc;
  mc.omega = mediator_prior_draw(hyper_, data_.m_kinds, rng_);
  XCluster xc;
  xc.psi = covariate_prior_draw(hyper_, data_.p1(), rng_);
  xc.count = data_.n();
  mc.xs.push_back(std::move(xc));
  mc.count = data_.n();
  yc.ms.push_back(std::move(mc));
  yc.count = data_.n();
  cur_.state.ys.push_back(std::move(yc));
  cur_.state.assign.assign(data_.n(), Assignment{0, 0, 0});
}

double GibbsSampler::loglik_y(const OutcomeParams& th, int i) const {
  const double eta = th.coef.dot(yrow_.row(i));
  if (th.binary) return log_normal_cdf(data_.y(i) > 0.5 ? eta : -eta);
  const double r = data_.y(i) - eta;
  return -0.5 * (kLog2Pi + std::log(th.var)) - 0.5 * r * r / th.var;
}

double GibbsSampler::loglik_m(const MediatorParams& om, int i) const {
  double lp = 0.0;
  for (int q = 0; q < om.q(); ++q) {
    const double eta = om.coef.col(q).dot(mrow_.row(i));
    if (om.kinds[q] == ColKind::Binary) {
      lp += log_normal_cdf(data_.m(i, q) > 0.5 ? eta : -eta);
    } else {
      const double r = data_.m(i, q) - eta;
      lp += -0.5 * (kLog2Pi + std::log(om.var(q))) - 0.5 * r * r / om.var(q);
    }
  }
  return lp;
}

double GibbsSampler::loglik_x(const CovariateParams& ps, int i) const {
  double lp = 0.0;
  for (int r = 0; r < xbin_.cols(); ++r)
    lp += xbin_(i, r) > 0.5 ? std::log(ps.g(r)) : std::log1p(-ps.g(r));
  for (int r = 0; r < xcont_.cols(); ++r) {
    const double d = xcont_(i, r) - ps.h(r);
    lp += -0.5 * (kLog2Pi + std::log(ps.f(r))) - 0.5 * d * d / ps.f(r);
  }
  return lp;
}

GibbsSampler::Orphan GibbsSampler::remove_subject(int i) {
  Orphan orp;
  auto& st = cur_.state;
  const Assignment as = st.assign[i];
  YCluster& yc = st.ys[as.j];
  MCluster& mc = yc.ms[as.l];
  XCluster& xc = mc.xs[as.u];
  --yc.count;
  --mc.count;
  --xc.count;
  if (xc.count == 0) {
    orp.level = 1;
    orp.psi = xc.psi;
    mc.xs.erase(mc.xs.begin() + as.u);
    for (auto& a2 : st.assign)
      if (a2.j == as.j && a2.l == as.l && a2.u > as.u) --a2.u;
    if (mc.count == 0) {
      orp.level = 2;
      orp.omega = mc.omega;
      yc.ms.erase(yc.ms.begin() + as.l);
      for (auto& a2 : st.assign)
        if (a2.j == as.j && a2.l > as.l) --a2.l;
      if (yc.count == 0) {
        orp.level = 3;
        orp.theta = yc.theta;
        st.ys.erase(st.ys.begin() + as.j);
        for (auto& a2 : st.assign)
          if (a2.j > as.j) --a2.j;
      }
    }
  }
  st.assign[i] = Assignment{-1, -1, -1};
  return orp;
}

void GibbsSampler::reassign_subject(int i, const Orphan& orphan) {
  auto& st = cur_.state;
  const int m_aux = cfg_.aux_clusters;
  const double n_other = static_cast<double>(st.n() - 1);
  const Concentrations& al = cur_.alpha;

  // Auxiliary parameter sets; a cluster emptied by the removal donates its
  // parameters to slot 0 of the matching level (Neal Alg. 8 singleton rule).
  struct AuxTriple {
    OutcomeParams theta;
    MediatorParams omega;
    CovariateParams psi;
  };
  std::vector<AuxTriple> aux_y(m_aux);
  std::vector<std::pair<MediatorParams, CovariateParams>> aux_m(m_aux);
  std::vector<CovariateParams> aux_x(m_aux);
  for (int t = 0; t < m_aux; ++t) {
    if (t == 0 && orphan.level == 3) {
      aux_y[t] = {orphan.theta, orphan.omega, orphan.psi};
    } else {
      aux_y[t].theta = outcome_prior_draw(hyper_, data_.y_kind, rng_);
      aux_y[t].omega = mediator_prior_draw(hyper_, data_.m_kinds, rng_);
      aux_y[t].psi = covariate_prior_draw(hyper_, data_.p1(), rng_);
    }
    if (t == 0 && orphan.level == 2) {
      aux_m[t] = {orphan.omega, orphan.psi};
    } else {
      aux_m[t] = {mediator_prior_draw(hyper_, data_.m_kinds, rng_),
                  covariate_prior_draw(hyper_, data_.p1(), rng_)};
    }
    aux_x[t] = (t == 0 && orphan.level == 1)
                   ? orphan.psi
                   : covariate_prior_draw(hyper_, data_.p1(), rng_);
  }

  const bool po = cfg_.prior_only;
  std::vector<double> lx_aux(m_aux), lmx_maux(m_aux), lymx_yaux(m_aux);
  for (int t = 0; t < m_aux; ++t) {
    lx_aux[t] = po ? 0.0 : loglik_x(aux_x[t], i);
    lmx_maux[t] = po ? 0.0
                     : loglik_m(aux_m[t].first, i) + loglik_x(aux_m[t].second, i);
    lymx_yaux[t] = po ? 0.0
                      : loglik_y(aux_y[t].theta, i) + loglik_m(aux_y[t].omega, i) +
                            loglik_x(aux_y[t].psi, i);
  }

  cands_.clear();
  logw_.clear();
  const double lat = std::log(al.theta + n_other);
  const double log_alpha_psi_aux = std::log(al.psi / m_aux);
  for (int j = 0; j < st.k(); ++j) {
    const YCluster& yc = st.ys[j];
    const double ly = po ? 0.0 : loglik_y(yc.theta, i);
    const double lj = std::log(static_cast<double>(yc.count)) - lat;
    const double law = std::log(al.omega + yc.count);
    for (int l = 0; l < static_cast<int>(yc.ms.size()); ++l) {
      const MCluster& mc = yc.ms[l];
      const double lm = po ? 0.0 : loglik_m(mc.omega, i);
      const double ll = std::log(static_cast<double>(mc.count)) - law;
      const double lap = std::log(al.psi + mc.count);
      const double base = lj + ll + ly + lm;
      for (int u = 0; u < static_cast<int>(mc.xs.size()); ++u) {
        const double lx = po ? 0.0 : loglik_x(mc.xs[u].psi, i);
        cands_.push_back({0, j, l, u, 0});
        logw_.push_back(base + std::log(static_cast<double>(mc.xs[u].count)) -
                        lap + lx);
      }
      for (int t = 0; t < m_aux; ++t) {
        cands_.push_back({1, j, l, 0, t});
        logw_.push_back(base + log_alpha_psi_aux - lap + lx_aux[t]);
      }
    }
    for (int t = 0; t < m_aux; ++t) {
      cands_.push_back({2, j, 0, 0, t});
      logw_.push_back(lj + std::log(al.omega / m_aux) - law + ly + lmx_maux[t]);
    }
  }
  for (int t = 0; t < m_aux; ++t) {
    cands_.push_back({3, 0, 0, 0, t});
    logw_.push_back(std::log(al.theta / m_aux) - lat + lymx_yaux[t]);
  }

  const Cand pick = cands_[rng_.categorical_from_log(logw_)];
  Assignment as;
  switch (pick.type) {
    case 0: {
      as = {pick.j, pick.l, pick.u};
      break;
    }
    case 1: {
      MCluster& mc = st.ys[pick.j].ms[pick.l];
      mc.xs.push_back(XCluster{aux_x[pick.t], 0});
      as = {pick.j, pick.l, static_cast<int>(mc.xs.size()) - 1};
      break;
    }
    case 2: {
      MCluster mc;
      mc.omega = std::move(aux_m[pick.t].first);
      mc.xs.push_back(XCluster{std::move(aux_m[pick.t].second), 0});
      st.ys[pick.j].ms.push_back(std::move(mc));
      as = {pick.j, static_cast<int>(st.ys[pick.j].ms.size()) - 1, 0};
      break;
    }
    default: {
      YCluster yc;
      yc.theta = std::move(aux_y[pick.t].theta);
      MCluster mc;
      mc.omega = std::move(aux_y[pick.t].omega);
      mc.xs.push_back(XCluster{std::move(aux_y[pick.t].psi), 0});
      yc.ms.push_back(std::move(mc));
      st.ys.push_back(std::move(yc));
      as = {static_cast<int>(st.ys.size()) - 1, 0, 0};
      break;
    }
  }
  st.assign[i] = as;
  ++st.ys[as.j].count;
  ++st.ys[as.j].ms[as.l].count;
  ++st.ys[as.j].ms[as.l].xs[as.u].count;
}

void GibbsSampler::sweep_memberships() {
  for (int i = 0; i < data_.n(); ++i) {
    const Orphan orp = remove_subject(i);
    reassign_subject(i, orp);
  }
}

namespace {

// Member index lists per y-cluster / m-cluster / x-cluster.
struct Members {
  std::vector<std::vector<int>> y;
  std::vector<std::vector<std::vector<int>>> m;
  std::vector<std::vector<std::vector<std::vector<int>>>> x;
};

Members collect_members(const ClusterState& st) {
  Members mem;
  mem.y.resize(st.k());
  mem.m.resize(st.k());
  mem.x.resize(st.k());
  for (int j = 0; j < st.k(); ++j) {
    mem.m[j].resize(st.ys[j].ms.size());
    mem.x[j].resize(st.ys[j].ms.size());
    for (std::size_t l = 0; l < st.ys[j].ms.size(); ++l)
      mem.x[j][l].resize(st.ys[j].ms[l].xs.size());
  }
  for (int i = 0; i < st.n(); ++i) {
    const auto& as = st.assign[i];
    mem.y[as.j].push_back(i);
    mem.m[as.j][as.l].push_back(i);
    mem.x[as.j][as.l][as.u].push_back(i);
  }
  return mem;
}

}  // namespace

void GibbsSampler::update_theta() {
  auto& st = cur_.state;
  const Members mem = collect_members(st);
  const int d = static_cast<int>(yrow_.cols());
  for (int j = 0; j < st.k(); ++j) {
    const auto& idx = mem.y[j];
    const int nj = static_cast<int>(idx.size());
    Eigen::MatrixXd X(nj, d);
    Eigen::VectorXd yv(nj);
    for (int t = 0; t < nj; ++t) {
      X.row(t) = yrow_.row(idx[t]);
      yv(t) = data_.y(idx[t]);
    }
    OutcomeParams& th = st.ys[j].theta;
    if (th.binary) {
      th.coef = probit_albert_chib_step(hyper_.outcome, X, yv, th.coef, rng_);
      th.var = 1.0;
    } else {
      const Eigen::MatrixXd G = X.transpose() * X;
      const Eigen::VectorXd xty = X.transpose() * yv;
      RegDraw rd =
          nig_posterior_draw(hyper_.outcome, G, xty, yv.squaredNorm(), nj, rng_);
      th.coef = std::move(rd.coef);
      th.var = rd.var;
    }
  }
}

void GibbsSampler::update_omega() {
  auto& st = cur_.state;
  const Members mem = collect_members(st);
  const int d = static_cast<int>(mrow_.cols());
  for (int j = 0; j < st.k(); ++j) {
    for (std::size_t l = 0; l < st.ys[j].ms.size(); ++l) {
      const auto& idx = mem.m[j][l];
      const int nl = static_cast<int>(idx.size());
      Eigen::MatrixXd X(nl, d);
      for (int t = 0; t < nl; ++t) X.row(t) = mrow_.row(idx[t]);
      const Eigen::MatrixXd G = X.transpose() * X;
      MediatorParams& om = st.ys[j].ms[l].omega;
      for (int q = 0; q < data_.q(); ++q) {
        Eigen::VectorXd mv(nl);
        for (int t = 0; t < nl; ++t) mv(t) = data_.m(idx[t], q);
        if (om.kinds[q] == ColKind::Binary) {
          om.coef.col(q) = probit_albert_chib_step(hyper_.mediators[q], X, mv,
                                                   om.coef.col(q), rng_);
          om.var(q) = 1.0;
        } else {
          RegDraw rd = nig_posterior_draw(hyper_.mediators[q], G,
                                          X.transpose() * mv, mv.squaredNorm(),
                                          nl, rng_);
          om.coef.col(q) = rd.coef;
          om.var(q) = rd.var;
        }
      }
    }
  }
}

void GibbsSampler::update_psi() {
  auto& st = cur_.state;
  const Members mem = collect_members(st);
  for (int j = 0; j < st.k(); ++j)
    for (std::size_t l = 0; l < st.ys[j].ms.size(); ++l)
      for (std::size_t u = 0; u < st.ys[j].ms[l].xs.size(); ++u) {
        const auto& idx = mem.x[j][l][u];
        const double nu = static_cast<double>(idx.size());
        CovariateParams& ps = st.ys[j].ms[l].xs[u].psi;
        for (int r = 0; r < xbin_.cols(); ++r) {
          double ones = 0.0;
          for (int i : idx) ones += xbin_(i, r);
          ps.g(r) = beta_posterior_draw(hyper_.beta_a0, hyper_.beta_b0, ones, nu,
                                        rng_);
        }
        for (int r = 0; r < xcont_.cols(); ++r) {
          double sum = 0.0, sumsq = 0.0;
          for (int i : idx) {
            sum += xcont_(i, r);
            sumsq += xcont_(i, r) * xcont_(i, r);
          }
          const NormalVarDraw nv = norm_inv_chisq_posterior_draw(
              hyper_.nu0, hyper_.tau0sq(r), hyper_.mu0(r), hyper_.c0, sum, sumsq,
              nu, rng_);
          ps.h(r) = nv.mean;
          ps.f(r) = nv.var;
        }
      }
}

void GibbsSampler::update_concentrations() {
  const auto& st = cur_.state;
  std::vector<std::pair<int, int>> groups;
  groups.push_back({st.n(), st.k()});
  cur_.alpha.theta = sample_dp_concentration(cur_.alpha.theta,
                                             hyper_.prior_alpha_theta, groups,
                                             rng_);
  groups.clear();
  for (const auto& yc : st.ys)
    groups.push_back({yc.count, static_cast<int>(yc.ms.size())});
  cur_.alpha.omega = sample_dp_concentration(cur_.alpha.omega,
                                             hyper_.prior_alpha_omega, groups,
                                             rng_);
  groups.clear();
  for (const auto& yc : st.ys)
    for (const auto& mc : yc.ms)
      groups.push_back({mc.count, static_cast<int>(mc.xs.size())});
  cur_.alpha.psi = sample_dp_concentration(cur_.alpha.psi,
                                           hyper_.prior_alpha_psi, groups, rng_);
}

void GibbsSampler::step() {
  if (cfg_.update_memberships) sweep_memberships();
  update_theta();
  update_omega();
  update_psi();
  if (cfg_.update_concentrations) update_concentrations();
  ++cur_.iteration;
}

ChainStats run_chain(const Dataset& data, const Hyperparams& hyper,
                     const SamplerConfig& cfg,
                     const std::function<void(const PosteriorDraw&)>& sink) {
  GibbsSampler gs(data, hyper, cfg);
  gs.init();
  ChainStats stats;
  for (int it = 1; it <= cfg.iterations; ++it) {
    gs.step();
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) {
      if (!gs.draw().state.counts_consistent()) ++stats.legality_failures;
      ++stats.draws_emitted;
      sink(gs.draw());
    }
  }
  return stats;
}

std::vector<PosteriorDraw> run_chain_collect(const Dataset& data,
                                             const Hyperparams& hyper,
                                             const SamplerConfig& cfg,
                                             ChainStats* stats) {
  std::vector<PosteriorDraw> out;
  ChainStats s = run_chain(data, hyper, cfg,
                           [&](const PosteriorDraw& d) { out.push_back(d); });
  if (stats) *stats = s;
  return out;
}

PosteriorDraw init_state(const Dataset& data, const Hyperparams& hyper,
                         const SamplerConfig& cfg) {
  GibbsSampler gs(data, hyper, cfg);
  gs.init();
  return gs.draw();
}

namespace {

template <typename F>
PosteriorDraw apply_block(const PosteriorDraw& in, const Dataset& data,
                          const Hyperparams& hyper, const SamplerConfig& cfg,
                          Rng& rng, F&& f) {
  GibbsSampler gs(data, hyper, cfg);
  gs.set_draw(in);
  gs.rng() = rng;
  f(gs);
  rng = gs.rng();
  return gs.draw();
}

}  // namespace

PosteriorDraw sample_memberships(const PosteriorDraw& in, const Dataset& data,
                                 const Hyperparams& hyper,
                                 const SamplerConfig& cfg, Rng& rng) {
  return apply_block(in, data, hyper, cfg, rng,
                     [](GibbsSampler& g) { g.sweep_memberships(); });
}

PosteriorDraw sample_theta(const PosteriorDraw& in, const Dataset& data,
                           const Hyperparams& hyper, const SamplerConfig& cfg,
                           Rng& rng) {
  return apply_block(in, data, hyper, cfg, rng,
                     [](GibbsSampler& g) { g.update_theta(); });
}

PosteriorDraw sample_omega(const PosteriorDraw& in, const Dataset& data,
                           const Hyperparams& hyper, const SamplerConfig& cfg,
                           Rng& rng) {
  return apply_block(in, data, hyper, cfg, rng,
                     [](GibbsSampler& g) { g.update_omega(); });
}

PosteriorDraw sample_psi(const PosteriorDraw& in, const Dataset& data,
                         const Hyperparams& hyper, const SamplerConfig& cfg,
                         Rng& rng) {
  return apply_block(in, data, hyper, cfg, rng,
                     [](GibbsSampler& g) { g.update_psi(); });
}

PosteriorDraw sample_concentrations(const PosteriorDraw& in, const Dataset& data,
                                    const Hyperparams& hyper,
                                    const SamplerConfig& cfg, Rng& rng) {
  return apply_block(in, data, hyper, cfg, rng,
                     [](GibbsSampler& g) { g.update_concentrations(); });
}

}  // namespace bnpmed
