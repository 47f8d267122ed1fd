#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bnpmed/data.hpp"
#include "bnpmed/gcomp.hpp"
#include "bnpmed/rng.hpp"

namespace bnpmed {

// Linear-SEM point estimates: M_q ~ A + L per mediator and Y ~ A + M + L;
// NDE is the outcome-model treatment coefficient, INIE_q the product of
// coefficients, JNIE their sum (additive by construction).
struct LsemPoint {
  double nde = 0.0;
  Eigen::VectorXd inie;
  double jnie = 0.0;
  double te = 0.0;

  double effect_value(const Effect& e) const;
};

LsemPoint lsem_point(const Dataset& data);

// Percentile bootstrap over B row resamples; estimate = full-data point
// estimate, per_draw = bootstrap replicates.
std::vector<EffectEstimate> lsem_fit(const Dataset& data,
                                     const std::vector<Effect>& effects, int B,
                                     Rng& rng);

}  // namespace bnpmed
