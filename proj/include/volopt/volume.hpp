#pragma once

#include <optional>
#include <vector>

#include "volopt/feasible.hpp"

namespace volopt {

// Solution of the primal moment SDP: the design parameter estimate is the
// vector of first-order y_a moments, the volume estimate is (y)_0.
struct VolumeSolution {
  std::vector<double> a_hat;
  double volume_estimate = 0.0;
  MomentSequence y;    // joint moments over (x,a)
  MomentSequence y_a;  // parameter-block moments
  SolveReport report;
  int r = 0;
  bool reliable = false;   // solver reached status optimal
  bool diffuse = false;    // y_a mass is spread out; extraction unreliable
  double eigen_ratio = 0.0;  // second-largest / largest eigenvalue of M_r(y_a)
};

struct P2MProgram {
  ConicProgram program;
  std::vector<int> y_vars;   // grevlex-ordered decision indices of y
  std::vector<int> ya_vars;  // grevlex-ordered decision indices of y_a
  int r = 0;
};

// Assembles the moment relaxation
//   max (y)_0
//   M_r(y) psd, M_{r-r_j}(y; P_1j) psd                     (42a)
//   (y_a)_0 = 1                                            (42b)
//   M_r(y_a) psd, M_{r-r_a}(y_a; 1-eps_a-P^d_A) psd,
//   M_{r-1}(y_a; 1-a_i^2) psd for every i                  (42c)
//   M_r(y_a x y_x - y) psd                                 (42d)
// where y_x are the closed-form moments of mu_x (the product block is linear
// in y_a).  `cert` may be null only when S2 is the whole space.
P2MProgram build_p2m(const VolumeProblem& problem, const FeasibleSetCertificate* cert,
                     int r);

VolumeSolution extract_solution(const P2MProgram& built, const VolumeProblem& problem,
                                const SolveResult& result);

VolumeSolution solve_p2m(const VolumeProblem& problem, const FeasibleSetCertificate* cert,
                         int r, const SolveOptions& opts = {});

}  // namespace volopt
