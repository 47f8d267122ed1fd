#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace bnpmed {

enum class ColKind { Binary, Continuous };

// Observed data: outcome y, n x Q mediator matrix m, binary treatment a,
// and confounders split into binary (l_disc) and continuous (l_cont) blocks.
// The covariate vector used by the model is x = (a, l_disc, l_cont).
struct Dataset {
  Eigen::VectorXd y;
  ColKind y_kind = ColKind::Continuous;
  Eigen::MatrixXd m;
  std::vector<ColKind> m_kinds;
  Eigen::VectorXd a;
  Eigen::MatrixXd l_disc;
  Eigen::MatrixXd l_cont;

  std::string y_name = "y";
  std::string a_name = "a";
  std::vector<std::string> m_names;
  std::vector<std::string> ld_names;
  std::vector<std::string> lc_names;

  int n() const { return static_cast<int>(y.size()); }
  int q() const { return static_cast<int>(m.cols()); }
  int p1() const { return static_cast<int>(l_disc.cols()); }
  int p2() const { return static_cast<int>(l_cont.cols()); }
  int p() const { return p1() + p2(); }

  // x_i = (a_i, l_disc_i, l_cont_i), length 1+p.
  Eigen::VectorXd covariate_vector(int i) const {
    Eigen::VectorXd x(1 + p());
    x(0) = a(i);
    x.segment(1, p1()) = l_disc.row(i);
    x.segment(1 + p1(), p2()) = l_cont.row(i);
    return x;
  }

  // Mediator-model design row (1, a_i, l_i), length 2+p.
  Eigen::VectorXd mediator_design_row(int i) const {
    Eigen::VectorXd r(2 + p());
    r(0) = 1.0;
    r.segment(1, 1 + p()) = covariate_vector(i);
    return r;
  }

  // Outcome-model design row (1, a_i, l_i, m_i), length 2+p+Q.
  Eigen::VectorXd outcome_design_row(int i) const {
    Eigen::VectorXd r(2 + p() + q());
    r(0) = 1.0;
    r.segment(1, 1 + p()) = covariate_vector(i);
    r.segment(2 + p(), q()) = m.row(i);
    return r;
  }

  void validate() const;
};

inline void Dataset::validate() const {
  const int N = n();
  if (N <= 0) throw std::invalid_argument("Dataset: empty");
  if (q() < 1) throw std::invalid_argument("Dataset: needs at least one mediator");
  if (m.rows() != N || a.size() != N || l_disc.rows() != N || l_cont.rows() != N)
    throw std::invalid_argument("Dataset: column length mismatch");
  if (static_cast<int>(m_kinds.size()) != q())
    throw std::invalid_argument("Dataset: mediator kind list mismatch");
  auto check_binary = [](double v) { return v == 0.0 || v == 1.0; };
  for (int i = 0; i < N; ++i) {
    if (!std::isfinite(y(i))) throw std::invalid_argument("Dataset: non-finite outcome");
    if (!check_binary(a(i))) throw std::invalid_argument("Dataset: treatment must be 0/1");
    for (int r = 0; r < p1(); ++r)
      if (!check_binary(l_disc(i, r)))
        throw std::invalid_argument("Dataset: binary confounder must be 0/1");
    for (int r = 0; r < p2(); ++r)
      if (!std::isfinite(l_cont(i, r)))
        throw std::invalid_argument("Dataset: non-finite confounder");
    for (int c = 0; c < q(); ++c) {
      if (!std::isfinite(m(i, c))) throw std::invalid_argument("Dataset: non-finite mediator");
      if (m_kinds[c] == ColKind::Binary && !check_binary(m(i, c)))
        throw std::invalid_argument("Dataset: binary mediator must be 0/1");
    }
  }
  if (y_kind == ColKind::Binary)
    for (int i = 0; i < N; ++i)
      if (!check_binary(y(i)))
        throw std::invalid_argument("Dataset: binary outcome must be 0/1");
}

}  // namespace bnpmed
