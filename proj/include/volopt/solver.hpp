#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "volopt/conic.hpp"

namespace volopt {

enum class SolveStatus { Optimal, MaxIterations, InfeasibleSuspected };

const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIterations;
  double objective = 0.0;        // c^T gamma in the program's stated sense
  double primal_residual = 0.0;  // ||A gamma - b||_inf, recomputed from data
  double psd_violation = 0.0;    // most negative eigenvalue across cone blocks
  long iterations = 0;
  double wall_time_s = 0.0;
};

struct SolveOptions {
  double tol_feas = 1e-6;
  double tol_psd = 1e-7;
  long max_iter = 50000;
  unsigned seed = 0;
  double rho = 1.0;            // initial penalty
  double alpha = 1.6;          // over-relaxation
  bool adaptive_rho = true;
  int accel_memory = 0;        // Anderson acceleration window; 0 disables
  int check_every = 50;        // cadence of convergence checks
  bool verbose = false;
};

struct SolveResult {
  SolveReport report;
  Eigen::VectorXd gamma;
};

// Reference first-order solver (ADMM on the stacked cone constraints with a
// direct sparse KKT factorization).  Deterministic for a fixed seed.
SolveResult solve(const ConicProgram& prog, const SolveOptions& opts = {});

// Convenience overload matching the flat signature used by the CLI layer.
SolveResult solve(const ConicProgram& prog, double tol_feas, double tol_psd, long max_iter,
                  unsigned seed);

// Pluggable solver backends (the built-in one is registered as "admm").
using SolverBackend = std::function<SolveResult(const ConicProgram&, const SolveOptions&)>;
void register_backend(const std::string& name, SolverBackend backend);
std::vector<std::string> backend_names();
SolveResult solve_with(const std::string& backend, const ConicProgram& prog,
                       const SolveOptions& opts = {});

}  // namespace volopt
