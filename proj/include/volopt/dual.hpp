#pragma once

#include <utility>
#include <vector>

#include "volopt/feasible.hpp"
#include "volopt/moments.hpp"
#include "volopt/poly.hpp"
#include "volopt/solver.hpp"

namespace volopt {

// How the global nonnegativity of W on chi x A (constraint (48c)) is
// certified: as a quadratic module over the per-coordinate box quadratics
// 1 - v_i^2 (the Remark-3 local strengthening, tighter at low dimension), or
// as a plain sum of squares.
enum class GlobalNonnegMode {
  Auto,  // BoxQM when n + m <= 4, PlainSOS otherwise
  BoxQM,
  PlainSOS,
};

// Output of the dual SOS SDP: the scalar bound beta = P_d together with the
// certifying polynomial W and its x-averaged profile over the parameters.
struct DualCertificate {
  double beta = 0.0;
  Polynomial w_poly;        // W over the joint (x,a) block
  Polynomial integrated_w;  // int_chi W dmu_x, over the a block only
  double gap = 0.0;         // |P_r - P_d| once a primal value is supplied
  SolveReport report;
  int d_w = 0;
};

// Integrates the leading mu_x.nvars() variables of w against mu_x: every
// x-monomial is paired with its closed-form moment, leaving a polynomial in
// the trailing variables.  Exact and linear in w.  Throws
// std::invalid_argument for measure kinds without box-type moments.
Polynomial integrate_over_x(const Polynomial& w, const MeasureSpec& mu_x);

struct PD2FProgram {
  ConicProgram program;
  int beta_var = -1;
  std::vector<int> w_vars;  // W coefficients, grevlex rank order over (x,a)
  int d_w = 0;
  GlobalNonnegMode mode = GlobalNonnegMode::PlainSOS;  // mode actually used
};

// Assembles the dual SOS SDP (PD2F): minimize beta subject to
//   W - 1              in QM({P_1j})                            (48a)
//   beta - int W dmu_x in QM({1 - eps_a - P^d_A} u {1 - a_i^2}) (48b)
//   W >= 0 on chi x A  per `mode`                               (48c)
// with every SOS identity matched at budget d_w (even, at least the degree
// of each generator and of the certificate).  Throws std::invalid_argument
// when the degree bookkeeping cannot be satisfied.
PD2FProgram build_pd2f(const VolumeProblem& problem, const FeasibleSetCertificate& cert, int d_w,
                       GlobalNonnegMode mode = GlobalNonnegMode::Auto);

// Reads beta and W out of a solved decision vector.
DualCertificate extract_certificate(const PD2FProgram& built, const VolumeProblem& problem,
                                    const SolveResult& result);

// Build + solve + extract.
DualCertificate solve_pd2f(const VolumeProblem& problem, const FeasibleSetCertificate& cert,
                           int d_w, const SolveOptions& opts = {},
                           GlobalNonnegMode mode = GlobalNonnegMode::Auto);

// Parameter extraction from the dual: maximize int_chi W dmu_x over
// A_d = {a in A : P^d_A(a) <= 1 - eps_a} on a dense grid of 10^4 points per
// a-dimension (supported for 1 or 2 parameters).  Returns the argmax and the
// attained value; throws std::runtime_error if no grid point lies in A_d.
std::pair<std::vector<double>, double> argmax_over_ad(const Polynomial& integrated_w,
                                                      const FeasibleSetCertificate& cert);

}  // namespace volopt
