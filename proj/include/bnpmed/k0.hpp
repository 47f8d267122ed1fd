#pragma once

#include <Eigen/Dense>

#include "bnpmed/conjugate.hpp"
#include "bnpmed/params.hpp"

namespace bnpmed {

// Prior-predictive ("k0") log densities: local-model parameters integrated
// over their base-measure priors. All are closed form: Beta-Bernoulli and
// Student-t for covariates, Student-t for continuous regressions, and the
// Gaussian-probit integral for binary regressions.

// x = (a, l_disc, l_cont); the treatment slot is a binary coordinate.
inline double log_k0_covariate(const Hyperparams& hy, VecRef x, int p1) {
  const int nb = p1 + 1;
  const int nc = static_cast<int>(x.size()) - nb;
  if (nc != hy.mu0.size())
    throw std::invalid_argument("log_k0_covariate: dimension mismatch");
  if (!(hy.beta_a0 > 0.0) || !(hy.beta_b0 > 0.0) || !(hy.nu0 > 0.0) || !(hy.c0 > 0.0))
    throw std::invalid_argument("log_k0_covariate: invalid hyperparameters");
  const double p_one = hy.beta_a0 / (hy.beta_a0 + hy.beta_b0);
  double lp = 0.0;
  for (int r = 0; r < nb; ++r)
    lp += x(r) > 0.5 ? std::log(p_one) : std::log1p(-p_one);
  for (int r = 0; r < nc; ++r) {
    if (!(hy.tau0sq(r) > 0.0))
      throw std::invalid_argument("log_k0_covariate: invalid tau0sq");
    const double scale = std::sqrt(hy.tau0sq(r) * (1.0 + 1.0 / hy.c0));
    lp += log_student_t_pdf(x(nb + r), hy.nu0, hy.mu0(r), scale);
  }
  return lp;
}

// row = (1, a, l); q is 0-based here.
inline double log_k0_mediator_coord(const Hyperparams& hy, int q, double mq,
                                    VecRef row) {
  return log_prior_predictive(hy.mediators.at(q), row, mq);
}

// Joint prior predictive of the mediator vector; mediators have independent
// priors and are locally independent given x, so this is a sum over q.
inline double log_k0_mediator(const Hyperparams& hy, VecRef mvec, VecRef row) {
  if (static_cast<int>(hy.mediators.size()) != mvec.size())
    throw std::invalid_argument("log_k0_mediator: dimension mismatch");
  double lp = 0.0;
  for (int q = 0; q < mvec.size(); ++q)
    lp += log_prior_predictive(hy.mediators[q], row, mvec(q));
  return lp;
}

// row = (1, a, l, m).
inline double log_k0_outcome(const Hyperparams& hy, double y, VecRef row) {
  return log_prior_predictive(hy.outcome, row, y);
}

// E0: prior-integrated conditional outcome mean at row = (1, a, l, m).
inline double e0_outcome(const Hyperparams& hy, VecRef row) {
  return prior_predictive_mean(hy.outcome, row);
}

// Spec-shaped conveniences assembling design rows from (m, a, l) pieces.
inline Eigen::VectorXd assemble_mediator_row(double a, VecRef l) {
  Eigen::VectorXd row(2 + l.size());
  row(0) = 1.0;
  row(1) = a;
  row.segment(2, l.size()) = l;
  return row;
}

inline Eigen::VectorXd assemble_outcome_row(double a, VecRef l, VecRef m) {
  Eigen::VectorXd row(2 + l.size() + m.size());
  row(0) = 1.0;
  row(1) = a;
  row.segment(2, l.size()) = l;
  row.segment(2 + l.size(), m.size()) = m;
  return row;
}

inline double log_k0_mediator(const Hyperparams& hy, VecRef m, double a, VecRef l) {
  return log_k0_mediator(hy, m, assemble_mediator_row(a, l));
}

inline double log_k0_outcome(const Hyperparams& hy, double y, VecRef m, double a,
                             VecRef l) {
  return log_k0_outcome(hy, y, assemble_outcome_row(a, l, m));
}

// Prior draw of covariate-marginal parameters (new third-level clusters).
inline CovariateParams covariate_prior_draw(const Hyperparams& hy, int p1,
                                            Rng& rng) {
  CovariateParams psi;
  psi.g.resize(p1 + 1);
  for (int r = 0; r <= p1; ++r) psi.g(r) = rng.beta(hy.beta_a0, hy.beta_b0);
  const int p2 = static_cast<int>(hy.mu0.size());
  psi.h.resize(p2);
  psi.f.resize(p2);
  for (int r = 0; r < p2; ++r) {
    psi.f(r) = rng.scaled_inv_chisq(hy.nu0, hy.tau0sq(r));
    psi.h(r) = rng.normal(hy.mu0(r), std::sqrt(psi.f(r) / hy.c0));
  }
  return psi;
}

inline MediatorParams mediator_prior_draw(const Hyperparams& hy,
                                          const std::vector<ColKind>& kinds,
                                          Rng& rng) {
  MediatorParams om;
  const int Q = static_cast<int>(hy.mediators.size());
  const int d = hy.mediators.empty() ? 0 : hy.mediators[0].dim();
  om.coef.resize(d, Q);
  om.var.resize(Q);
  om.kinds = kinds;
  for (int qi = 0; qi < Q; ++qi) {
    RegDraw rd = reg_prior_draw(hy.mediators[qi], rng);
    om.coef.col(qi) = rd.coef;
    om.var(qi) = rd.var;
  }
  return om;
}

inline OutcomeParams outcome_prior_draw(const Hyperparams& hy, ColKind kind,
                                        Rng& rng) {
  OutcomeParams th;
  RegDraw rd = reg_prior_draw(hy.outcome, rng);
  th.coef = rd.coef;
  th.var = rd.var;
  th.binary = (kind == ColKind::Binary);
  return th;
}

}  // namespace bnpmed
