#include "volopt/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

#include "volopt/ipm.hpp"
#include "volopt/parallel.hpp"

namespace volopt {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_enabled(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
SerialGuard::SerialGuard() : previous(parallel_enabled()) { set_parallel_enabled(false); }
SerialGuard::~SerialGuard() { set_parallel_enabled(previous); }

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::MaxIterations:
      return "max-iterations";
    case SolveStatus::InfeasibleSuspected:
      return "infeasible-suspected";
  }
  return "unknown";
}

namespace {

struct BlockView {
  ConeType type;
  int size;
  Eigen::Index offset;  // first row within the stacked constraint vector
  Eigen::Index rows;
};

// Projection of one stacked segment onto its cone (PSD / nonnegative), or onto
// the point {target} for the equality segment.
void project_block(const BlockView& blk, Eigen::VectorXd& seg) {
  if (blk.type == ConeType::PSD) {
    seg = project_psd(seg, blk.size);
  } else {
    seg = seg.cwiseMax(0.0);
  }
}

}  // namespace

SolveResult solve(const ConicProgram& prog, const SolveOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  prog.validate();

  const int n = prog.num_vars;
  // Internal sense: minimize.
  Eigen::VectorXd c_int = prog.maximize ? Eigen::VectorXd(-prog.c) : prog.c;
  const double c_scale = std::max(1.0, c_int.norm());
  c_int /= c_scale;

  // --- Assemble the stacked constraint z = M gamma + q with per-segment
  // scaling.  Cone blocks are scaled by a positive scalar (cone-invariant);
  // equality rows are normalized to unit 2-norm.
  std::vector<BlockView> views;
  Eigen::Index total_rows = 0;
  for (const auto& blk : prog.blocks) {
    views.push_back({blk.type, blk.size, total_rows, blk.rows()});
    total_rows += blk.rows();
  }
  const Eigen::Index eq_offset = total_rows;
  const Eigen::Index eq_rows = prog.A.rows();
  total_rows += eq_rows;

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(total_rows);
  Eigen::VectorXd eq_target = Eigen::VectorXd::Zero(eq_rows);
  std::vector<double> block_scale(prog.blocks.size(), 1.0);
  for (size_t k = 0; k < prog.blocks.size(); ++k) {
    const auto& blk = prog.blocks[k];
    const double fro = std::sqrt(Eigen::Map<const Eigen::VectorXd>(blk.B.valuePtr(), blk.B.nonZeros()).squaredNorm());
    const double tau = 1.0 / std::max(1e-8, fro / std::sqrt(static_cast<double>(std::max<Eigen::Index>(blk.rows(), 1))));
    block_scale[k] = tau;
    for (int col = 0; col < blk.B.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(blk.B, col); it; ++it) {
        trips.emplace_back(static_cast<int>(views[k].offset + it.row()), static_cast<int>(it.col()),
                           tau * it.value());
      }
    }
    q.segment(views[k].offset, blk.rows()) = tau * blk.d;
  }
  if (eq_rows > 0) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> Arm(prog.A);
    for (Eigen::Index r = 0; r < eq_rows; ++r) {
      double nrm2 = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arm, r); it; ++it) {
        nrm2 += it.value() * it.value();
      }
      const double s = 1.0 / std::max(1e-12, std::sqrt(nrm2));
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arm, r); it; ++it) {
        trips.emplace_back(static_cast<int>(eq_offset + r), static_cast<int>(it.col()),
                           s * it.value());
      }
      eq_target[r] = s * prog.b[r];
    }
  }
  Eigen::SparseMatrix<double> M(total_rows, n);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();

  // Column equilibration: moment/SOS programs mix coefficients across many
  // polynomial degrees, so per-variable rescaling is essential for the
  // first-order method.  gamma = col_scale .* gamma_scaled throughout.
  Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < M.outerSize(); ++j) {
    double nrm2 = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, j); it; ++it) {
      nrm2 += it.value() * it.value();
    }
    if (nrm2 > 1e-24) col_scale[j] = 1.0 / std::sqrt(nrm2);
  }
  for (int j = 0; j < M.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, j); it; ++it) {
      it.valueRef() *= col_scale[j];
    }
  }
  c_int = c_int.cwiseProduct(col_scale);

  // --- Quasi-definite KKT [[eps I, M^T], [M, -I]] factored once (independent
  // of the penalty rho, which only enters the right-hand side).
  const Eigen::Index kkt_n = n + total_rows;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  double ridge = 1e-8;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<Eigen::Triplet<double>> kt;
    kt.reserve(static_cast<size_t>(M.nonZeros()) + static_cast<size_t>(kkt_n));
    for (int i = 0; i < n; ++i) kt.emplace_back(i, i, ridge);
    for (int col = 0; col < M.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it) {
        kt.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    for (Eigen::Index r = 0; r < total_rows; ++r) {
      kt.emplace_back(static_cast<int>(n + r), static_cast<int>(n + r), -1.0);
    }
    // Only the lower triangle is assembled; SimplicialLDLT reads that part.
    Eigen::SparseMatrix<double> kkt(kkt_n, kkt_n);
    kkt.setFromTriplets(kt.begin(), kt.end());
    ldlt.compute(kkt);
    if (ldlt.info() == Eigen::Success) break;
    ridge *= 100.0;
  }
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("solver: KKT factorization failed");
  }

  // --- ADMM state, deterministically seeded.
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd gamma(n);
  for (int i = 0; i < n; ++i) gamma[i] = 1e-6 * gauss(rng);
  Eigen::VectorXd z = M * gamma + q;
  for (const auto& blk : views) {
    Eigen::VectorXd seg = z.segment(blk.offset, blk.rows);
    project_block(blk, seg);
    z.segment(blk.offset, blk.rows) = seg;
  }
  if (eq_rows > 0) z.segment(eq_offset, eq_rows) = eq_target;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(total_rows);

  double rho = opts.rho;
  const double alpha = opts.alpha;
  Eigen::VectorXd kkt_rhs(kkt_n), kkt_sol(kkt_n);
  Eigen::VectorXd zhat(total_rows), z_prev(total_rows), affine(total_rows);

  // --- Safeguarded Anderson acceleration over the stacked fixed point
  // v = (z, u) of one plain iteration.  Deterministic; any rejected or
  // suspicious extrapolation falls back to the plain step and clears the
  // history, so the safeguards never change what a converged run certifies.
  const int aa_mem = std::max(0, opts.accel_memory);
  const Eigen::Index vdim = 2 * total_rows;
  Eigen::MatrixXd aa_dv, aa_dg;
  Eigen::VectorXd aa_v_in, aa_v_prev, aa_g_prev, aa_v, aa_g;
  int aa_cols = 0;
  bool aa_have_prev = false;
  bool rho_changed = false;
  double aa_gmin = std::numeric_limits<double>::infinity();
  if (aa_mem > 0) {
    aa_dv.resize(vdim, aa_mem);
    aa_dg.resize(vdim, aa_mem);
    aa_v_in.resize(vdim);
    aa_v_prev.resize(vdim);
    aa_g_prev.resize(vdim);
    aa_v.resize(vdim);
    aa_g.resize(vdim);
  }
  long aa_accept = 0, aa_reject_theta = 0, aa_reject_g = 0, aa_reset_rho = 0;
  const auto aa_reset = [&]() {
    aa_cols = 0;
    aa_have_prev = false;
    aa_gmin = std::numeric_limits<double>::infinity();
  };

  SolveResult out;
  out.report.status = SolveStatus::MaxIterations;
  long iter = 0;
  double best_primal = std::numeric_limits<double>::infinity();
  long best_primal_iter = 0;
  long last_adapt = 0;
  const int nblocks = static_cast<int>(views.size());

  for (iter = 1; iter <= opts.max_iter; ++iter) {
    if (aa_mem > 0) {
      aa_v_in.head(total_rows) = z;
      aa_v_in.tail(total_rows) = u;
    }
    // gamma-step: (ridge I + M^T M) gamma = M^T (z - u - q) - c/rho.
    kkt_rhs.head(n) = -c_int / rho;
    kkt_rhs.tail(total_rows) = z - u - q;
    kkt_sol = ldlt.solve(kkt_rhs);
    gamma = kkt_sol.head(n);

    affine.noalias() = M * gamma;
    affine += q;
    zhat = alpha * affine + (1.0 - alpha) * z;
    z_prev.swap(z);
    z = zhat + u;
    if (parallel_enabled()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
      for (int k = 0; k < nblocks; ++k) {
        Eigen::VectorXd seg = z.segment(views[k].offset, views[k].rows);
        project_block(views[static_cast<size_t>(k)], seg);
        z.segment(views[static_cast<size_t>(k)].offset, views[static_cast<size_t>(k)].rows) = seg;
      }
    } else {
      for (int k = 0; k < nblocks; ++k) {
        Eigen::VectorXd seg = z.segment(views[k].offset, views[k].rows);
        project_block(views[static_cast<size_t>(k)], seg);
        z.segment(views[static_cast<size_t>(k)].offset, views[static_cast<size_t>(k)].rows) = seg;
      }
    }
    if (eq_rows > 0) z.segment(eq_offset, eq_rows) = eq_target;
    u += zhat - z;

    if (iter % opts.check_every == 0 || iter == opts.max_iter) {
      const Residuals res = residuals(prog, col_scale.cwiseProduct(gamma));
      const double dual_res = rho * (M.transpose() * (z - z_prev)).norm() /
                              (1.0 + c_int.norm());
      const double primal_scaled = (affine - z).norm() / (1.0 + std::max(z.norm(), q.norm()));
      const bool contract_ok = res.primal <= opts.tol_feas && res.psd_violation >= -opts.tol_psd;
      const bool settled = dual_res <= 10.0 * opts.tol_feas && primal_scaled <= opts.tol_feas;
      if (opts.verbose) {
        std::fprintf(stderr, "iter %6ld rho %8.2e primal %9.3e psd %9.3e dual %9.3e obj %+.9e\n",
                     iter, rho, res.primal, res.psd_violation, dual_res,
                     objective_value(prog, col_scale.cwiseProduct(gamma)));
      }
      if (contract_ok && settled) {
        out.report.status = SolveStatus::Optimal;
        break;
      }
      const double primal_gap = std::max(res.primal, -std::min(0.0, res.psd_violation));
      if (primal_gap < best_primal * 0.99) {
        best_primal = primal_gap;
        best_primal_iter = iter;
      }
      // Stagnating at a distinctly infeasible point while the duals keep
      // climbing is the classic ADMM signature of primal infeasibility.
      if (iter - best_primal_iter >= 5000 && primal_gap > std::max(1e-4, 1e3 * opts.tol_feas) &&
          u.lpNorm<Eigen::Infinity>() > 1e2) {
        out.report.status = SolveStatus::InfeasibleSuspected;
        break;
      }
      // Penalty adaptation driven by the accuracy contract itself: when the
      // cone / equality gap (measured in original data space) dominates the
      // dual residual the penalty is too small; the reverse only justifies a
      // decrease once the contract already holds.  Bounded, hysteretic,
      // dual-rescaled so the scaled dual variable u = lambda / rho stays
      // consistent.
      if (opts.adaptive_rho && iter - last_adapt >= 250) {
        double factor = 1.0;
        if (!contract_ok && primal_gap > dual_res) {
          factor = 2.0;
        } else if (contract_ok && dual_res > 10.0 * primal_gap) {
          factor = 0.5;
        }
        const double new_rho = std::clamp(rho * factor, 1e-2, 1e6);
        if (new_rho != rho) {
          u *= rho / new_rho;
          rho = new_rho;
          last_adapt = iter;
          rho_changed = true;
        }
      }
    }

    if (aa_mem > 0) {
      if (rho_changed) {
        // The fixed-point map just changed (u was rescaled with rho); stale
        // differences would poison the extrapolation.
        aa_reset();
        ++aa_reset_rho;
        rho_changed = false;
        continue;
      }
      aa_v.head(total_rows) = z;
      aa_v.tail(total_rows) = u;
      aa_g = aa_v - aa_v_in;
      if (aa_have_prev) {
        if (aa_cols == aa_mem) {
          aa_dv.leftCols(aa_mem - 1) = aa_dv.rightCols(aa_mem - 1);
          aa_dg.leftCols(aa_mem - 1) = aa_dg.rightCols(aa_mem - 1);
          --aa_cols;
        }
        aa_dv.col(aa_cols) = aa_v_in - aa_v_prev;
        aa_dg.col(aa_cols) = aa_g - aa_g_prev;
        ++aa_cols;
      }
      aa_v_prev = aa_v_in;
      aa_g_prev = aa_g;
      aa_have_prev = true;
      const double gnorm = aa_g.norm();
      if (!std::isfinite(gnorm) || gnorm > 1e4 * aa_gmin) {
        aa_reset();
        ++aa_reject_g;
        continue;
      }
      aa_gmin = std::min(aa_gmin, gnorm);
      if (aa_cols == 0) continue;
      const auto dg = aa_dg.leftCols(aa_cols);
      Eigen::MatrixXd gram = dg.transpose() * dg;
      gram.diagonal().array() += 1e-12 * std::max(1.0, gram.trace());
      const Eigen::VectorXd theta = gram.ldlt().solve(dg.transpose() * aa_g);
      if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > 1e5) {
        aa_reset();
        ++aa_reject_theta;
        continue;
      }
      aa_v.noalias() -= (aa_dv.leftCols(aa_cols) + dg) * theta;
      z = aa_v.head(total_rows);
      u = aa_v.tail(total_rows);
      ++aa_accept;
    }
  }

  if (opts.verbose && aa_mem > 0) {
    std::fprintf(stderr, "aa: accept %ld reject_theta %ld reject_g %ld reset_rho %ld\n", aa_accept,
                 aa_reject_theta, aa_reject_g, aa_reset_rho);
  }

  out.gamma = col_scale.cwiseProduct(gamma);
  const Residuals res = residuals(prog, out.gamma);
  out.report.objective = objective_value(prog, out.gamma);
  out.report.primal_residual = res.primal;
  out.report.psd_violation = res.psd_violation;
  out.report.iterations = std::min(iter, opts.max_iter);
  out.report.wall_time_s =
      std::chrono::duration_cast<std::chrono::duration<double>>(clock::now() - t0).count();
  return out;
}

SolveResult solve(const ConicProgram& prog, double tol_feas, double tol_psd, long max_iter,
                  unsigned seed) {
  SolveOptions opts;
  opts.tol_feas = tol_feas;
  opts.tol_psd = tol_psd;
  opts.max_iter = max_iter;
  opts.seed = seed;
  return solve(prog, opts);
}

namespace {
std::mutex g_backend_mutex;
std::map<std::string, SolverBackend>& backend_map() {
  static std::map<std::string, SolverBackend> m{
      {"admm", [](const ConicProgram& p, const SolveOptions& o) { return solve(p, o); }},
      {"ipm", [](const ConicProgram& p, const SolveOptions& o) { return solve_ipm(p, o); }},
      {"auto", [](const ConicProgram& p, const SolveOptions& o) { return solve_auto(p, o); }}};
  return m;
}
}  // namespace

void register_backend(const std::string& name, SolverBackend backend) {
  std::lock_guard<std::mutex> lock(g_backend_mutex);
  backend_map()[name] = std::move(backend);
}

std::vector<std::string> backend_names() {
  std::lock_guard<std::mutex> lock(g_backend_mutex);
  std::vector<std::string> names;
  for (const auto& [k, v] : backend_map()) names.push_back(k);
  return names;
}

SolveResult solve_with(const std::string& backend, const ConicProgram& prog,
                       const SolveOptions& opts) {
  SolverBackend fn;
  {
    std::lock_guard<std::mutex> lock(g_backend_mutex);
    auto it = backend_map().find(backend);
    if (it == backend_map().end()) {
      throw std::invalid_argument("unknown solver backend: " + backend);
    }
    fn = it->second;
  }
  return fn(prog, opts);
}

}  // namespace volopt
