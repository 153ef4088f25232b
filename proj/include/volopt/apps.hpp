#pragma once

#include <vector>

#include "volopt/feasible.hpp"
#include "volopt/moments.hpp"
#include "volopt/poly.hpp"

namespace volopt {

// Polynomial control system over juxtaposed variable blocks
// (x, u, omega, delta): states, control inputs, per-step disturbances, and
// static uncertain parameters.  Continuous systems read f as dx/dt, discrete
// ones as the one-step map x+ = f(x, u, omega, delta).
struct PolynomialDynamics {
  enum class Mode { Continuous, Discrete };

  Mode mode = Mode::Continuous;
  int n_x = 0;
  int n_u = 0;
  int n_w = 0;
  int n_delta = 0;
  std::vector<Polynomial> f;  // one per state, over n_x + n_u + n_w + n_delta

  int input_dim() const { return n_x + n_u + n_w + n_delta; }
  void validate() const;  // throws std::invalid_argument on arity mismatch
};

// Candidate function V(x, a) = fixed(x) + sum_i a_i * basis_i(x): affine in
// the trailing a-block by construction of the joint polynomial.  validate()
// rejects joint polynomials of a-degree > 1; build_roa additionally requires
// V(0, a) = 0 (no x-constant terms).
struct TemplateFunction {
  int x_dim = 0;
  int a_dim = 0;
  Polynomial v;  // over x_dim + a_dim variables, affine in a

  void validate() const;
};

// Maximum total degree any builder may produce through composition; guards
// against moment-matrix blowup.  Builders throw std::invalid_argument when a
// composed polynomial exceeds it.
inline constexpr int kDefaultDegreeCap = 12;

// Region of attraction (continuous) or difference-Lyapunov contraction
// (discrete): S1(a) = {0 <= V(x,a) <= level_c}, S2(a) = {dV <= -eps_r |x|^2}
// where dV is grad V . f for continuous dynamics and V(f(x),a) - V(x,a) for
// discrete ones.  mu_x is Lebesgue on the unit box.
VolumeProblem build_roa(const PolynomialDynamics& dyn, const TemplateFunction& tmpl,
                        double level_c = 1.0, double eps_r = 0.001,
                        int degree_cap = kDefaultDegreeCap);

// Robust invariance of the template sublevel set: S1(a) = {P(x,a) >= 0},
// S2(a) = {P(f(x),a) >= 0} via composition with a discrete map.
VolumeProblem build_invariant(const PolynomialDynamics& dyn, const TemplateFunction& tmpl,
                              int degree_cap = kDefaultDegreeCap);

// Probabilistic control data: discrete dynamics, polynomial state feedback
// u_j = control[j](x, a) affine in a, a target set at the final step, and
// per-step feasibility sets enforced at steps 1..N-1.  The initial state,
// each step's disturbance, and the static delta are independent box-uniform.
struct ProbCtrlSpec {
  PolynomialDynamics dyn;  // discrete
  int horizon = 3;
  std::vector<Polynomial> target;         // over x, imposed at step N
  std::vector<Polynomial> step_feasible;  // over x, imposed at steps 1..N-1
  std::vector<Polynomial> control;        // n_u polys over (x, a), affine in a
  int a_dim = 0;
  MeasureSpec mu_x0 = MeasureSpec::uniform_box(1);     // over the x0 block
  std::vector<MeasureSpec> mu_w;                       // one per omega slot
  MeasureSpec mu_delta = MeasureSpec::uniform_box(1);  // ignored when n_delta=0
};

// Unrolled chance-constrained problem.  The VolumeProblem's x-block stacks
// (x0, omega_0, ..., omega_{N-1}, delta); S2 is the whole space, so the
// feasible-set stage is skipped and vol S1(a) is the success probability.
struct ProbCtrlProblem {
  VolumeProblem problem;
  // states[k][i] = P_{x_i(k)} over the joint (x0, omegas, delta, a) block.
  std::vector<std::vector<Polynomial>> states;
  int x0_offset = 0;
  int omega_offset = 0;
  int delta_offset = 0;
};

ProbCtrlProblem build_probctrl(const ProbCtrlSpec& spec, int degree_cap = kDefaultDegreeCap);

// Numeric closed-loop rollout of the same data; the oracle the symbolic
// unrolling is tested against.  Returns states[0..horizon].
std::vector<std::vector<double>> simulate_closed_loop(
    const ProbCtrlSpec& spec, const std::vector<double>& a, const std::vector<double>& x0,
    const std::vector<std::vector<double>>& omegas, const std::vector<double>& delta);

// Generalized SOS feasibility: find a making P(x,a) > 0 on the set cut out
// by the P_1j; equivalently S1 = {P_1j >= 0}, S2 = {P >= 0}.
VolumeProblem build_gsos(const VariableBlocks& blocks, const Polynomial& target,
                         const std::vector<Polynomial>& s1);

}  // namespace volopt
