#include "bnpmed/params.hpp"

#include <cmath>
#include <stdexcept>

namespace bnpmed {

namespace {

double column_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() /
                   std::max<int>(1, static_cast<int>(v.size()) - 1));
}

// Design-column spreads for (1, a, l_disc, l_cont [, m]); the intercept slot
// gets 1 so scale rules apply uniformly.
Eigen::VectorXd design_sds(const Dataset& d, bool with_mediators) {
  const int dim = 2 + d.p() + (with_mediators ? d.q() : 0);
  Eigen::VectorXd s(dim);
  s(0) = 1.0;
  s(1) = std::max(column_sd(d.a), 0.1);
  for (int r = 0; r < d.p1(); ++r) s(2 + r) = std::max(column_sd(d.l_disc.col(r)), 0.1);
  for (int r = 0; r < d.p2(); ++r)
    s(2 + d.p1() + r) = std::max(column_sd(d.l_cont.col(r)), 0.1);
  if (with_mediators)
    for (int c = 0; c < d.q(); ++c)
      s(2 + d.p() + c) = std::max(column_sd(d.m.col(c)), 0.1);
  return s;
}

RegressionPrior regression_defaults(const Eigen::VectorXd& resp, ColKind kind,
                                    const Eigen::VectorXd& sds) {
  RegressionPrior pr;
  const int dim = static_cast<int>(sds.size());
  pr.coef_mean = Eigen::VectorXd::Zero(dim);
  pr.coef_var = Eigen::VectorXd::Zero(dim);
  pr.binary = (kind == ColKind::Binary);
  if (pr.binary) {
    // Probit scale: latent residual sd is 1.
    pr.coef_var(0) = 9.0;
    for (int j = 1; j < dim; ++j) {
      const double s = 2.5 / sds(j);
      pr.coef_var(j) = std::min(s * s, 9.0);
    }
    return pr;
  }
  const double sd_y = std::max(column_sd(resp), 1e-3);
  const double var_y = sd_y * sd_y;
  pr.a0 = 3.0;
  pr.b0 = var_y;  // prior mean of sigma2 = b0/(a0-1) = var_y/2
  const double sigma2_scale = pr.b0 / (pr.a0 - 1.0);
  pr.coef_mean(0) = resp.mean();
  pr.coef_var(0) = (4.0 * sd_y) * (4.0 * sd_y) / sigma2_scale;
  for (int j = 1; j < dim; ++j) {
    const double s = 2.5 * sd_y / sds(j);
    pr.coef_var(j) = s * s / sigma2_scale;
  }
  return pr;
}

}  // namespace

Hyperparams Hyperparams::defaults_for(const Dataset& data) {
  Hyperparams h;
  h.beta_a0 = 1.0;
  h.beta_b0 = 1.0;
  h.nu0 = 4.0;
  h.c0 = 0.5;
  h.mu0.resize(data.p2());
  h.tau0sq.resize(data.p2());
  for (int r = 0; r < data.p2(); ++r) {
    h.mu0(r) = data.l_cont.col(r).mean();
    const double sd = std::max(column_sd(data.l_cont.col(r)), 1e-3);
    h.tau0sq(r) = sd * sd;
  }
  const Eigen::VectorXd sds_y = design_sds(data, true);
  const Eigen::VectorXd sds_m = design_sds(data, false);
  h.outcome = regression_defaults(data.y, data.y_kind, sds_y);
  h.mediators.clear();
  for (int c = 0; c < data.q(); ++c)
    h.mediators.push_back(regression_defaults(data.m.col(c), data.m_kinds[c], sds_m));
  h.prior_alpha_theta = {1.0, 1.0};
  h.prior_alpha_omega = {1.0, 1.0};
  h.prior_alpha_psi = {1.0, 1.0};
  return h;
}

Hyperparams make_default_hyperparams(const Dataset& data) {
  return Hyperparams::defaults_for(data);
}

void Hyperparams::validate(const Dataset& data) const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(beta_a0) || !positive(beta_b0))
    throw std::invalid_argument("Hyperparams: beta prior must be positive");
  if (!positive(nu0) || !positive(c0))
    throw std::invalid_argument("Hyperparams: nu0/c0 must be positive");
  if (mu0.size() != data.p2() || tau0sq.size() != data.p2())
    throw std::invalid_argument("Hyperparams: continuous-covariate prior size mismatch");
  for (int r = 0; r < data.p2(); ++r)
    if (!positive(tau0sq(r)) || !std::isfinite(mu0(r)))
      throw std::invalid_argument("Hyperparams: invalid continuous-covariate prior");
  auto check_reg = [&](const RegressionPrior& pr, int dim, ColKind kind) {
    if (pr.dim() != dim || pr.coef_var.size() != dim)
      throw std::invalid_argument("Hyperparams: regression prior dimension mismatch");
    if ((kind == ColKind::Binary) != pr.binary)
      throw std::invalid_argument("Hyperparams: regression prior kind mismatch");
    for (int j = 0; j < dim; ++j)
      if (!positive(pr.coef_var(j)) || !std::isfinite(pr.coef_mean(j)))
        throw std::invalid_argument("Hyperparams: invalid regression prior");
    if (!pr.binary && (!positive(pr.a0) || !positive(pr.b0)))
      throw std::invalid_argument("Hyperparams: invalid residual-variance prior");
  };
  check_reg(outcome, 2 + data.p() + data.q(), data.y_kind);
  if (static_cast<int>(mediators.size()) != data.q())
    throw std::invalid_argument("Hyperparams: mediator prior count mismatch");
  for (int c = 0; c < data.q(); ++c)
    check_reg(mediators[c], 2 + data.p(), data.m_kinds[c]);
  for (const GammaPrior* gp : {&prior_alpha_theta, &prior_alpha_omega, &prior_alpha_psi})
    if (!positive(gp->shape) || !positive(gp->rate))
      throw std::invalid_argument("Hyperparams: invalid concentration prior");
}

}  // namespace bnpmed
