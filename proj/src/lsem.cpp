#include "bnpmed/lsem.hpp"

#include <stdexcept>

namespace bnpmed {

namespace {

Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols())
    throw std::invalid_argument("lsem: rank-deficient design");
  return qr.solve(y);
}

Dataset resample(const Dataset& d, Rng& rng) {
  Dataset out = d;
  const int n = d.n();
  for (int i = 0; i < n; ++i) {
    const int s = static_cast<int>(rng.uniform() * n);
    const int src = std::min(s, n - 1);
    out.y(i) = d.y(src);
    out.a(i) = d.a(src);
    out.m.row(i) = d.m.row(src);
    out.l_disc.row(i) = d.l_disc.row(src);
    out.l_cont.row(i) = d.l_cont.row(src);
  }
  return out;
}

}  // namespace

double LsemPoint::effect_value(const Effect& e) const {
  switch (e.kind) {
    case EffectKind::TE: return te;
    case EffectKind::NDE: return nde;
    case EffectKind::JNIE: return jnie;
    case EffectKind::INIE: return inie(e.subset.at(0) - 1);
    case EffectKind::PNIE: {
      double s = 0.0;
      for (int q : e.subset) s += inie(q - 1);
      return s;
    }
  }
  return 0.0;
}

LsemPoint lsem_point(const Dataset& data) {
  if (data.y_kind != ColKind::Continuous)
    throw std::invalid_argument("lsem: outcome must be continuous");
  for (ColKind k : data.m_kinds)
    if (k != ColKind::Continuous)
      throw std::invalid_argument("lsem: mediators must be continuous");
  const int n = data.n(), Q = data.q();
  Eigen::MatrixXd xm(n, 2 + data.p());
  for (int i = 0; i < n; ++i) xm.row(i) = data.mediator_design_row(i);
  Eigen::VectorXd a_to_m(Q);
  for (int q = 0; q < Q; ++q) a_to_m(q) = ols(xm, data.m.col(q))(1);

  Eigen::MatrixXd xy(n, 2 + data.p() + Q);
  for (int i = 0; i < n; ++i) xy.row(i) = data.outcome_design_row(i);
  const Eigen::VectorXd beta = ols(xy, data.y);

  LsemPoint pt;
  pt.nde = beta(1);
  pt.inie.resize(Q);
  for (int q = 0; q < Q; ++q) pt.inie(q) = a_to_m(q) * beta(2 + data.p() + q);
  pt.jnie = pt.inie.sum();
  pt.te = pt.nde + pt.jnie;
  return pt;
}

std::vector<EffectEstimate> lsem_fit(const Dataset& data,
                                     const std::vector<Effect>& effects, int B,
                                     Rng& rng) {
  if (B < 2) throw std::invalid_argument("lsem_fit: need at least 2 bootstrap reps");
  const LsemPoint point = lsem_point(data);
  std::vector<std::vector<double>> boots(effects.size());
  for (int b = 0; b < B; ++b) {
    const Dataset rd = resample(data, rng);
    const LsemPoint bp = lsem_point(rd);
    for (std::size_t ei = 0; ei < effects.size(); ++ei)
      boots[ei].push_back(bp.effect_value(effects[ei]));
  }
  std::vector<EffectEstimate> out;
  for (std::size_t ei = 0; ei < effects.size(); ++ei) {
    EffectEstimate est;
    est.name = effects[ei].name();
    est.mean = point.effect_value(effects[ei]);
    est.per_draw = boots[ei];
    est.ci_low = empirical_quantile(boots[ei], 0.025);
    est.ci_high = empirical_quantile(boots[ei], 0.975);
    double m = 0.0;
    for (double v : boots[ei]) m += v;
    m /= B;
    double ss = 0.0;
    for (double v : boots[ei]) ss += (v - m) * (v - m);
    est.mc_se = std::sqrt(ss / (B - 1.0));
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace bnpmed
