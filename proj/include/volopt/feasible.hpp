#pragma once

#include <vector>

#include "volopt/moments.hpp"
#include "volopt/poly.hpp"
#include "volopt/solver.hpp"
#include "volopt/sos.hpp"

namespace volopt {

// Data of the constrained volume problem: maximize the mu_x-volume of
// S1(a) = {x : P_1j(x,a) >= 0} subject to S1(a) inside S2(a), over the
// normalized boxes chi = [-1,1]^n and A = [-1,1]^m.
struct VolumeProblem {
  VariableBlocks blocks;
  std::vector<Polynomial> s1;  // P_1j over the joint (x,a) variables
  std::vector<Polynomial> s2;  // P_2i over the joint variables; empty = whole space
  MeasureSpec mu_x = MeasureSpec::lebesgue_box(1);

  int d = 7;           // certificate degree
  int r = 6;           // moment relaxation order
  double eps_a = 0.05;
  double eps_k = 0.1;
  int stage1_budget = 0;  // SOS identity degree; 0 = automatic bookkeeping

  void validate() const;
};

// Stage-1 output: the polynomial P^d_A over the a variables whose
// (1 - eps_a)-sublevel set A_d inner-approximates the feasible set A_F.
struct FeasibleSetCertificate {
  Polynomial poly_a;
  double eps_a = 0.05;
  double eps_k = 0.1;
  int d = 0;
  double objective = 0.0;  // integral of P^d_A over A (Lebesgue)
  SolveReport report;

  // Remark-2 closed-set membership test: P^d_A(a) <= 1 - eps_a.
  bool member(const std::vector<double>& a) const;
};

struct P21dProgram {
  ConicProgram program;
  std::vector<int> pa_vars;  // decision indices of the certificate coefficients
  int budget_joint = 0;      // SOS identity budget on the (x,a) block
  int budget_a = 0;          // SOS identity budget on the a block
};

// Assembles the stage-1 SDP: minimize int_A P^d_A dmu_A subject to
//   P^d_A - 1 in QM({P_1j}, -P_2i - eps_k, ball)  for every i   (one QM per i)
//   P^d_A      in QM({1 - a_i^2}, ball_a)                        (a block)
// with the redundant Putinar ball polynomials appended.
P21dProgram build_p21d(const VolumeProblem& problem);

// Solve + extraction convenience wrapper.
FeasibleSetCertificate solve_p21d(const VolumeProblem& problem, const SolveOptions& opts = {});

// Reads the certificate out of a solved decision vector.
FeasibleSetCertificate certificate_from_gamma(const VolumeProblem& problem,
                                              const P21dProgram& built,
                                              const SolveResult& result);

}  // namespace volopt
