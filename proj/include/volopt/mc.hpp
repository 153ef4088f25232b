#pragma once

#include <cstdint>
#include <vector>

#include "volopt/feasible.hpp"
#include "volopt/moments.hpp"
#include "volopt/poly.hpp"

namespace volopt {

// A basic closed semialgebraic set {x : p(x) >= 0 for every p}.
struct SemialgebraicSet {
  int nvars = 0;
  std::vector<Polynomial> inequalities;

  bool contains(const std::vector<double>& x) const;
  void validate() const;  // throws std::invalid_argument on arity mismatch
};

// Freezes the trailing a-block of joint (x,a) polynomials at a fixed
// parameter vector, yielding the section S(a) over the x variables alone.
SemialgebraicSet at_parameters(const std::vector<Polynomial>& joint, int x_dim,
                               const std::vector<double>& a);

// Sampling effort and reproducibility contract.  The estimators are
// deterministic functions of (budget, inputs): samples are generated in
// fixed-size chunks whose substreams depend only on `seed` and the chunk
// index, and reductions run in fixed chunk order, so serial and OpenMP
// execution agree bitwise.
struct SampleBudget {
  std::int64_t n_samples = 100000;
  std::uint64_t seed = 0;
};

struct McEstimate {
  double estimate = 0.0;    // mass(mu) * hit fraction
  double stderr_est = 0.0;  // binomial standard error, same scale
  std::int64_t hits = 0;
  std::int64_t n_samples = 0;
};

// Monte Carlo measure of `set` under a box-type mu (Lebesgue or uniform):
// sample the box uniformly, count membership, scale by the measure's mass.
// Throws std::invalid_argument for non-box measures or arity mismatch.
McEstimate mc_volume(const SemialgebraicSet& set, const MeasureSpec& mu,
                     const SampleBudget& budget);

struct InclusionReport {
  bool holds = true;            // no counterexample within budget (one-sided)
  std::vector<double> witness;  // a point of s1 \ s2; empty when holds
};

// Samples the normalized box chi = [-1,1]^n for a point of s1 outside s2.
// The returned witness is the one of smallest sample index, independent of
// thread count.  An empty s2 (whole space) holds vacuously.
InclusionReport inclusion_check(const SemialgebraicSet& s1, const SemialgebraicSet& s2,
                                const SampleBudget& budget);

struct GridSearchResult {
  std::vector<double> a;       // best inclusion-passing grid point
  double volume = 0.0;         // its mc_volume estimate
  double stderr_est = 0.0;
  bool found = false;          // false when no grid point passes inclusion
};

// Brute-force baseline: exhaustive grid over A = [-1,1]^m with
// `points_per_dim` points per axis (the single point 0 when it is 1).  Each
// grid point is screened by inclusion_check, survivors are scored by
// mc_volume under problem.mu_x, and the argmax is returned (first in grid
// order on ties).  Per-point substreams are derived from budget.seed, so the
// result is deterministic and thread-count independent.  Supports m <= 3.
GridSearchResult grid_search(const VolumeProblem& problem, int points_per_dim,
                             const SampleBudget& budget);

}  // namespace volopt
