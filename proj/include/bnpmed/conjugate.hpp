#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "bnpmed/densities.hpp"
#include "bnpmed/params.hpp"
#include "bnpmed/rng.hpp"

namespace bnpmed {

struct RegDraw {
  Eigen::VectorXd coef;
  double var = 1.0;
};

inline RegDraw reg_prior_draw(const RegressionPrior& pr, Rng& rng) {
  RegDraw d;
  const int k = pr.dim();
  d.coef.resize(k);
  if (pr.binary) {
    d.var = 1.0;
    for (int j = 0; j < k; ++j)
      d.coef(j) = pr.coef_mean(j) + std::sqrt(pr.coef_var(j)) * rng.normal();
    return d;
  }
  d.var = rng.inv_gamma(pr.a0, pr.b0);
  const double sd = std::sqrt(d.var);
  for (int j = 0; j < k; ++j)
    d.coef(j) = pr.coef_mean(j) + sd * std::sqrt(pr.coef_var(j)) * rng.normal();
  return d;
}

// Normal-inverse-gamma posterior draw from Gram statistics:
// G = X'X, xty = X'y, yty = y'y over n member rows. n = 0 reduces to a
// prior draw.
inline RegDraw nig_posterior_draw(const RegressionPrior& pr,
                                  const Eigen::MatrixXd& G,
                                  const Eigen::VectorXd& xty, double yty, int n,
                                  Rng& rng) {
  if (n == 0) return reg_prior_draw(pr, rng);
  const int k = pr.dim();
  Eigen::MatrixXd lam = G;
  Eigen::VectorXd rhs = xty;
  double quad0 = 0.0;
  for (int j = 0; j < k; ++j) {
    const double prec0 = 1.0 / pr.coef_var(j);
    lam(j, j) += prec0;
    rhs(j) += prec0 * pr.coef_mean(j);
    quad0 += prec0 * pr.coef_mean(j) * pr.coef_mean(j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lam);
  const Eigen::VectorXd mn = llt.solve(rhs);
  const double an = pr.a0 + 0.5 * n;
  const double bn = pr.b0 + 0.5 * (yty + quad0 - mn.dot(rhs));
  RegDraw d;
  d.var = rng.inv_gamma(an, std::max(bn, 1e-300));
  Eigen::VectorXd z(k);
  for (int j = 0; j < k; ++j) z(j) = rng.normal();
  d.coef = mn + std::sqrt(d.var) * llt.matrixU().solve(z);
  return d;
}

// One Albert-Chib refresh for a probit block: latent utilities given the
// current coefficients, then a multivariate normal coefficient draw.
inline Eigen::VectorXd probit_albert_chib_step(const RegressionPrior& pr,
                                               const Eigen::MatrixXd& X,
                                               const Eigen::VectorXd& y,
                                               const Eigen::VectorXd& beta_cur,
                                               Rng& rng) {
  const int n = static_cast<int>(X.rows());
  const int k = pr.dim();
  Eigen::VectorXd xtz = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < n; ++i) {
    const double eta = X.row(i).dot(beta_cur);
    const double z = rng.trunc_std_normal(eta, y(i) > 0.5);
    xtz += z * X.row(i).transpose();
  }
  Eigen::MatrixXd lam = X.transpose() * X;
  for (int j = 0; j < k; ++j) {
    const double prec0 = 1.0 / pr.coef_var(j);
    lam(j, j) += prec0;
    xtz(j) += prec0 * pr.coef_mean(j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lam);
  Eigen::VectorXd z(k);
  for (int j = 0; j < k; ++j) z(j) = rng.normal();
  return llt.solve(xtz) + llt.matrixU().solve(z);
}

// Single-observation prior predictive log-density for one regression block.
// Continuous: Student-t from the NIG prior. Binary: exact Gaussian-probit
// integral Phi(eta0 / sqrt(1 + row' V0 row)).
inline double log_prior_predictive(const RegressionPrior& pr, VecRef row,
                                   double resp) {
  const double eta0 = pr.coef_mean.dot(row);
  const double s2 = (row.array().square() * pr.coef_var.array()).sum();
  if (pr.binary) {
    const double mu = eta0 / std::sqrt(1.0 + s2);
    return log_normal_cdf(resp > 0.5 ? mu : -mu);
  }
  const double df = 2.0 * pr.a0;
  const double scale = std::sqrt((pr.b0 / pr.a0) * (1.0 + s2));
  return log_student_t_pdf(resp, df, eta0, scale);
}

// E0: prior mean of E(resp | row; beta) over the coefficient prior.
inline double prior_predictive_mean(const RegressionPrior& pr, VecRef row) {
  const double eta0 = pr.coef_mean.dot(row);
  if (!pr.binary) return eta0;
  const double s2 = (row.array().square() * pr.coef_var.array()).sum();
  return normal_cdf(eta0 / std::sqrt(1.0 + s2));
}

// Block marginal likelihood under the NIG prior (continuous responses only).
inline double nig_log_marginal(const RegressionPrior& pr,
                               const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y) {
  const int n = static_cast<int>(X.rows());
  const int k = pr.dim();
  Eigen::MatrixXd lam = X.transpose() * X;
  Eigen::VectorXd rhs = X.transpose() * y;
  double quad0 = 0.0, logdet0 = 0.0;
  for (int j = 0; j < k; ++j) {
    const double prec0 = 1.0 / pr.coef_var(j);
    lam(j, j) += prec0;
    rhs(j) += prec0 * pr.coef_mean(j);
    quad0 += prec0 * pr.coef_mean(j) * pr.coef_mean(j);
    logdet0 += std::log(prec0);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lam);
  double logdetn = 0.0;
  for (int j = 0; j < k; ++j) logdetn += 2.0 * std::log(llt.matrixL()(j, j));
  const Eigen::VectorXd mn = llt.solve(rhs);
  const double an = pr.a0 + 0.5 * n;
  const double bn = pr.b0 + 0.5 * (y.squaredNorm() + quad0 - mn.dot(rhs));
  return -0.5 * n * kLog2Pi + 0.5 * (logdet0 - logdetn) +
         pr.a0 * std::log(pr.b0) - an * std::log(bn) + std::lgamma(an) -
         std::lgamma(pr.a0);
}

// Posterior predictive log-density at one new row given Gram statistics
// (continuous NIG blocks; used for held-out scoring).
inline double nig_log_posterior_predictive(const RegressionPrior& pr,
                                           const Eigen::MatrixXd& G,
                                           const Eigen::VectorXd& xty,
                                           double yty, int n, VecRef row,
                                           double resp) {
  const int k = pr.dim();
  Eigen::MatrixXd lam = G;
  Eigen::VectorXd rhs = xty;
  double quad0 = 0.0;
  for (int j = 0; j < k; ++j) {
    const double prec0 = 1.0 / pr.coef_var(j);
    lam(j, j) += prec0;
    rhs(j) += prec0 * pr.coef_mean(j);
    quad0 += prec0 * pr.coef_mean(j) * pr.coef_mean(j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(lam);
  const Eigen::VectorXd mn = llt.solve(rhs);
  const double an = pr.a0 + 0.5 * n;
  const double bn = pr.b0 + 0.5 * (yty + quad0 - mn.dot(rhs));
  const Eigen::VectorXd w = llt.solve(row);
  const double scale = std::sqrt((bn / an) * (1.0 + row.dot(w)));
  return log_student_t_pdf(resp, 2.0 * an, mn.dot(row), scale);
}

// ---- covariate-marginal conjugate pieces ----

inline double beta_posterior_draw(double a0, double b0, double ones, double n,
                                  Rng& rng) {
  return rng.beta(a0 + ones, b0 + (n - ones));
}

struct NormalVarDraw {
  double mean = 0.0;
  double var = 1.0;
};

// Normal-inverse-chi-square update for one continuous coordinate.
inline NormalVarDraw norm_inv_chisq_posterior_draw(double nu0, double tau0sq,
                                                   double mu0, double c0,
                                                   double sum, double sumsq,
                                                   double n, Rng& rng) {
  double cn = c0 + n, nun = nu0 + n, mun = mu0, nstau2 = nu0 * tau0sq;
  if (n > 0) {
    const double xbar = sum / n;
    mun = (c0 * mu0 + sum) / cn;
    const double ss = std::max(0.0, sumsq - n * xbar * xbar);
    nstau2 += ss + (c0 * n / cn) * (xbar - mu0) * (xbar - mu0);
  }
  NormalVarDraw d;
  d.var = rng.scaled_inv_chisq(nun, nstau2 / nun);
  d.mean = rng.normal(mun, std::sqrt(d.var / cn));
  return d;
}

}  // namespace bnpmed
