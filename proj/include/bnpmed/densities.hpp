#pragma once

#include <Eigen/Dense>

#include "bnpmed/math.hpp"
#include "bnpmed/params.hpp"

namespace bnpmed {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

// Local GLM log-density given a full design row. Continuous: normal linear
// model. Binary: probit.
inline double log_glm_density(VecRef coef, double var, bool binary, VecRef row,
                              double resp) {
  const double eta = coef.dot(row);
  if (binary) return log_normal_cdf(resp > 0.5 ? eta : -eta);
  return log_normal_pdf(resp, eta, var);
}

// Local conditional mean E(resp | row). Probit: Phi(eta).
inline double glm_mean(VecRef coef, double var, bool binary, VecRef row) {
  (void)var;
  const double eta = coef.dot(row);
  return binary ? normal_cdf(eta) : eta;
}

namespace detail {
inline void require_finite(VecRef v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite input");
}
}  // namespace detail

// log p(y | m, x; theta) with x = (a, l_disc, l_cont).
inline double log_outcome_density(const OutcomeParams& theta, double y, VecRef m,
                                  VecRef x) {
  if (theta.coef.size() != 1 + x.size() + m.size())
    throw std::invalid_argument("log_outcome_density: dimension mismatch");
  if (!theta.binary && !(theta.var > 0.0))
    throw std::invalid_argument("log_outcome_density: residual variance must be positive");
  detail::require_finite(m, "log_outcome_density");
  detail::require_finite(x, "log_outcome_density");
  if (!std::isfinite(y)) throw std::invalid_argument("log_outcome_density: non-finite y");
  Eigen::VectorXd row(theta.coef.size());
  row(0) = 1.0;
  row.segment(1, x.size()) = x;
  row.segment(1 + x.size(), m.size()) = m;
  return log_glm_density(theta.coef, theta.var, theta.binary, row, y);
}

// log p(m_q | x; omega), q is 1-based as in the model notation.
inline double log_mediator_density(const MediatorParams& omega, int q, double mq,
                                   VecRef x) {
  if (q < 1 || q > omega.q())
    throw std::invalid_argument("log_mediator_density: mediator index out of range");
  if (omega.coef.rows() != 1 + x.size())
    throw std::invalid_argument("log_mediator_density: dimension mismatch");
  detail::require_finite(x, "log_mediator_density");
  if (!std::isfinite(mq)) throw std::invalid_argument("log_mediator_density: non-finite m");
  Eigen::VectorXd row(omega.coef.rows());
  row(0) = 1.0;
  row.segment(1, x.size()) = x;
  const bool binary = omega.kinds[q - 1] == ColKind::Binary;
  if (!binary && !(omega.var(q - 1) > 0.0))
    throw std::invalid_argument("log_mediator_density: residual variance must be positive");
  return log_glm_density(omega.coef.col(q - 1), omega.var(q - 1), binary, row, mq);
}

// log p(x; psi): locally independent coordinates, Bernoulli for the p1+1
// binary slots (treatment first), normal for the p2 continuous slots.
inline double log_covariate_density(const CovariateParams& psi, VecRef x) {
  const int nb = static_cast<int>(psi.g.size());
  const int nc = static_cast<int>(psi.h.size());
  if (x.size() != nb + nc)
    throw std::invalid_argument("log_covariate_density: dimension mismatch");
  detail::require_finite(x, "log_covariate_density");
  double lp = 0.0;
  for (int r = 0; r < nb; ++r)
    lp += x(r) > 0.5 ? std::log(psi.g(r)) : std::log1p(-psi.g(r));
  for (int r = 0; r < nc; ++r) lp += log_normal_pdf(x(nb + r), psi.h(r), psi.f(r));
  return lp;
}

}  // namespace bnpmed
