#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bnpmed/data.hpp"
#include "bnpmed/gcomp.hpp"
#include "bnpmed/rng.hpp"

namespace bnpmed::scenario {

// Simulation scenario specification; canonical(id, n) reproduces the six
// published setups verbatim, custom field overrides are flagged.
struct ScenarioSpec {
  int id = 1;
  int n = 1000;
  int p1 = 4;
  int p2 = 4;
  int Q = 10;
  double treat_p = 0.4;
  double delta_m = 0.4;
  double zeta_y = 0.4;
  double sigma_c_offdiag = 0.3;
  double sigma_m_offdiag = 0.45;
  double skew_shape = 4.0;
  double copula_rho = 0.6;
  // Null-effect override: zero every treatment coefficient in the generator.
  bool zero_treatment_effects = false;
  bool custom = false;

  static ScenarioSpec canonical(int id, int n);
  void validate() const;
};

// Closed-form generative components; the two effect oracles and the toy
// models used in tests all speak this interface.
class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;
  virtual int p1() const = 0;
  virtual int p2() const = 0;
  virtual int Q() const = 0;
  virtual Eigen::VectorXd sample_l(Rng& rng) const = 0;
  // One full mediator-vector draw under treatment arm a given confounders.
  virtual Eigen::VectorXd sample_m(int a, VecRef l, Rng& rng) const = 0;
  virtual double mean_y(int a, VecRef m, VecRef l) const = 0;
  virtual double sample_y(int a, VecRef m, VecRef l, Rng& rng) const = 0;
};

class ScenarioModel : public GenerativeModel {
 public:
  explicit ScenarioModel(ScenarioSpec spec);

  int p1() const override { return spec_.p1; }
  int p2() const override { return spec_.p2; }
  int Q() const override { return spec_.Q; }
  Eigen::VectorXd sample_l(Rng& rng) const override;
  Eigen::VectorXd sample_m(int a, VecRef l, Rng& rng) const override;
  double mean_y(int a, VecRef m, VecRef l) const override;
  double sample_y(int a, VecRef m, VecRef l, Rng& rng) const override;

  int sample_a(VecRef l, Rng& rng) const;

  // Generator internals, exposed so tests can check the displays directly.
  double mu_m1(int a, VecRef l) const;
  double mu_m2(int a, VecRef l) const;
  double mu_y1(int a, VecRef m, VecRef l) const;
  double mu_y2(int a, VecRef m, VecRef l) const;
  double delta_m(VecRef l) const;   // P(component 1) for mediators
  double zeta_y(VecRef m) const;    // P(component 1) for the outcome
  Eigen::VectorXd sample_m_given_component(int a, VecRef l, int comp,
                                           Rng& rng) const;
  double skew_mean_shift() const;

  const ScenarioSpec& spec() const { return spec_; }

 private:
  ScenarioSpec spec_;
  Eigen::MatrixXd chol_c_;
  Eigen::MatrixXd chol_m_;
  Eigen::MatrixXd chol_cop_;
};

Dataset generate(const ScenarioSpec& spec, Rng& rng);

struct TruthRecord {
  int scenario_id = 0;
  std::map<std::string, double> values;
  std::map<std::string, double> mc_err;
  std::string source;
};

// Published per-scenario truth values, verbatim from the simulation tables.
// The Monte Carlo oracle recomputes truths independently; where the two
// disagree beyond MC error the oracle is the reference and the disagreement
// is reported, not silently absorbed.
TruthRecord paper_truth(int scenario_id);

// Structural Monte Carlo oracle: simulates potential outcomes (including
// outcome noise) directly from the generator, arms drawn independently and
// assembled per induction pattern.
TruthRecord truth_oracle(const ScenarioSpec& spec,
                         const std::vector<Effect>& effects, long reps,
                         std::uint64_t seed);

struct GFormulaResult {
  double value = 0.0;
  double se = 0.0;
};

// Identification-formula route: evaluates the identified integrals using only
// observational-law components (covariate law, mediator law given (A,L),
// conditional outcome mean given (A,M,L)).
GFormulaResult parametric_g_formula(const GenerativeModel& model,
                                    const Effect& effect, long reps,
                                    std::uint64_t seed);

}  // namespace bnpmed::scenario
