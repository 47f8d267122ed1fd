#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bnpmed/data.hpp"

namespace bnpmed {

// Local outcome-model coefficients theta over (1, a, l_disc, l_cont, m).
// Continuous outcomes carry a residual variance; binary ones are probit.
struct OutcomeParams {
  Eigen::VectorXd coef;
  double var = 1.0;
  bool binary = false;
};

// Per-mediator coefficients omega over (1, a, l_disc, l_cont); column q of
// coef belongs to mediator q. var(q) is ignored for binary (probit) mediators.
struct MediatorParams {
  Eigen::MatrixXd coef;
  Eigen::VectorXd var;
  std::vector<ColKind> kinds;
  int q() const { return static_cast<int>(coef.cols()); }
};

// Covariate-marginal parameters psi: Bernoulli success probabilities for the
// p1+1 binary coordinates (treatment occupies slot 0) and normal mean/variance
// pairs for the p2 continuous coordinates.
struct CovariateParams {
  Eigen::VectorXd g;
  Eigen::VectorXd h;
  Eigen::VectorXd f;
};

// Conjugate prior for one regression block. Continuous response:
// beta | sigma2 ~ N(coef_mean, sigma2 * diag(coef_var)),
// sigma2 ~ InvGamma(a0, b0) (shape/rate). Binary response (probit):
// beta ~ N(coef_mean, diag(coef_var)); a0/b0 unused.
struct RegressionPrior {
  Eigen::VectorXd coef_mean;
  Eigen::VectorXd coef_var;
  double a0 = 3.0;
  double b0 = 1.0;
  bool binary = false;
  int dim() const { return static_cast<int>(coef_mean.size()); }
};

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

struct Hyperparams {
  // Binary covariate coordinates: g ~ Beta(beta_a0, beta_b0).
  double beta_a0 = 1.0;
  double beta_b0 = 1.0;
  // Continuous covariate coordinates: f ~ Scaled-Inv-Chisq(nu0, tau0sq_r),
  // h | f ~ N(mu0_r, sqrt(f / c0)).
  double nu0 = 4.0;
  double c0 = 0.5;
  Eigen::VectorXd mu0;
  Eigen::VectorXd tau0sq;

  RegressionPrior outcome;
  std::vector<RegressionPrior> mediators;

  GammaPrior prior_alpha_theta;
  GammaPrior prior_alpha_omega;
  GammaPrior prior_alpha_psi;

  // Data-calibrated weakly informative defaults: regression priors centered
  // at zero slopes with intercepts at the response mean, slope scales tied to
  // response/covariate spreads, covariate priors centered at sample moments.
  static Hyperparams defaults_for(const Dataset& data);

  void validate(const Dataset& data) const;
};

Hyperparams make_default_hyperparams(const Dataset& data);

}  // namespace bnpmed
