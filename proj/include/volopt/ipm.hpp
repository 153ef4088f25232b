#pragma once

// Dense primal-dual interior-point solver for small conic programs.
//
// The operator-splitting solver in solver.hpp scales to large moment and SOS
// programs but, like every first-order method, it inherits a sublinear tail on
// degenerate SDPs — exactly the regime of high-degree certificate problems,
// whose optimal Gram matrices are rank-deficient.  This backend is the
// complementary tool: a Nesterov-Todd scaled predictor-corrector method with
// dense linear algebra.  Its per-iteration cost grows cubically with the
// number of variables, so it is only suitable when the problem is small
// (roughly: a few thousand variables, matrix blocks of side at most ~100), but
// within that envelope it reaches 1e-8 accuracy in a few dozen Newton steps
// regardless of degeneracy.
//
// ipm_suitable() implements that envelope test; solve_auto() uses it to pick
// the backend, which is what the pipeline stages call.

#include "volopt/conic.hpp"
#include "volopt/solver.hpp"

namespace volopt {

// Primal-dual path following on
//     min c'gamma  s.t.  B_k gamma + d_k in K_k,  A gamma = b.
// Honors opts.tol_feas / opts.tol_psd for the termination contract,
// opts.max_iter as an upper bound on Newton steps (internally capped), and
// opts.verbose.  Penalty/relaxation options are ignored — they have no
// interior-point counterpart.  Deterministic; opts.seed is unused.
SolveResult solve_ipm(const ConicProgram& prog, const SolveOptions& opts = {});

// True when the program is small enough that the dense method is clearly
// cheaper than a long first-order run.
bool ipm_suitable(const ConicProgram& prog);

// solve_ipm when ipm_suitable, otherwise the operator-splitting solver.
SolveResult solve_auto(const ConicProgram& prog, const SolveOptions& opts = {});

}  // namespace volopt
