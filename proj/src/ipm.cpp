#include "volopt/ipm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "volopt/parallel.hpp"

namespace volopt {

namespace {

// One cone block of the scaled problem together with its iterates and the
// per-iteration Nesterov-Todd scaling.
struct IpmBlock {
  ConeType type = ConeType::Nonnegative;
  int size = 0;           // matrix side (PSD) or vector length (Nonneg)
  Eigen::Index rows = 0;  // svec length (PSD) or size (Nonneg)
  Eigen::SparseMatrix<double> B;
  Eigen::VectorXd d;

  Eigen::VectorXd s, lam;      // primal slack / dual multiplier (svec coords)
  Eigen::VectorXd rp;          // B gamma + d - s
  Eigen::VectorXd sinv;        // svec(S^{-1}) (PSD) or elementwise 1/s
  Eigen::MatrixXd winv;        // PSD: W^{-1} of the NT scaling
  Eigen::VectorXd wdiag;       // Nonneg: lam_i / s_i
  Eigen::MatrixXd chol_s;      // lower Cholesky factors for step lengths
  Eigen::MatrixXd chol_lam;
};

// Symmetric PSD square root and inverse square root via eigendecomposition,
// with a relative floor so roundoff at the central-path boundary cannot
// produce NaNs.
bool sqrt_pair(const Eigen::MatrixXd& X, Eigen::MatrixXd& half, Eigen::MatrixXd& inv_half) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
  if (es.info() != Eigen::Success) return false;
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0)) return false;
  const double floor = 1e-14 * top;
  Eigen::VectorXd lo = es.eigenvalues().cwiseMax(floor);
  half.noalias() = es.eigenvectors() * lo.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  inv_half.noalias() =
      es.eigenvectors() * lo.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return true;
}

// Largest step t in [0, 1] keeping S + t*D positive definite with margin eta,
// where both are given in svec coordinates and chol is the factor of S.
double psd_step(const Eigen::MatrixXd& chol, const Eigen::VectorXd& dsvec, int size, double eta) {
  const Eigen::MatrixXd D = smat(dsvec, size);
  Eigen::MatrixXd T = chol.triangularView<Eigen::Lower>().solve(D);
  T = chol.triangularView<Eigen::Lower>().solve(T.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo >= 0.0) return 1.0;
  return std::min(1.0, -eta / lo);
}

double nonneg_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double eta) {
  double t = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) t = std::min(t, -eta * v[i] / dv[i]);
  }
  return t;
}

}  // namespace

bool ipm_suitable(const ConicProgram& prog) {
  // The Newton system is (num_vars + eq rows)^2 dense and every iteration
  // applies a two-sided multiply per structurally nonzero column of each PSD
  // block, so bound both the factorization size and the sandwich work.
  const Eigen::Index kkt = prog.num_vars + prog.A.rows();
  if (kkt > 3000) return false;
  double sandwich = 0.0;
  for (const auto& blk : prog.blocks) {
    if (blk.type != ConeType::PSD) continue;
    if (blk.size > 120) return false;
    std::vector<bool> touched(static_cast<size_t>(prog.num_vars), false);
    for (int col = 0; col < blk.B.outerSize(); ++col) {
      if (blk.B.outerIndexPtr()[col] != blk.B.outerIndexPtr()[col + 1]) {
        touched[static_cast<size_t>(col)] = true;
      }
    }
    const double ncols = static_cast<double>(std::count(touched.begin(), touched.end(), true));
    const double p = blk.size;
    sandwich += ncols * 2.0 * p * p * p;
  }
  return sandwich <= 5e9;
}

SolveResult solve_auto(const ConicProgram& prog, const SolveOptions& opts) {
  return ipm_suitable(prog) ? solve_ipm(prog, opts) : solve(prog, opts);
}

SolveResult solve_ipm(const ConicProgram& prog, const SolveOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  prog.validate();

  const int n = prog.num_vars;
  // Internal sense: minimize.
  Eigen::VectorXd c_int = prog.maximize ? Eigen::VectorXd(-prog.c) : prog.c;
  const double c_scale = std::max(1.0, c_int.norm());
  c_int /= c_scale;

  // --- Scaled copy: per-block scalar (cone-invariant), unit-norm equality
  // rows, then column equilibration across the stacked system.  Same
  // conditioning treatment as the first-order solver.
  std::vector<IpmBlock> blocks;
  blocks.reserve(prog.blocks.size());
  for (const auto& blk : prog.blocks) {
    IpmBlock ib;
    ib.type = blk.type;
    ib.size = blk.size;
    ib.rows = blk.rows();
    const double fro = std::sqrt(
        Eigen::Map<const Eigen::VectorXd>(blk.B.valuePtr(), blk.B.nonZeros()).squaredNorm());
    const double tau =
        1.0 / std::max(1e-8, fro / std::sqrt(static_cast<double>(std::max<Eigen::Index>(ib.rows, 1))));
    ib.B = tau * blk.B;
    ib.d = tau * blk.d;
    blocks.push_back(std::move(ib));
  }
  const Eigen::Index me = prog.A.rows();
  Eigen::SparseMatrix<double> A = prog.A;
  Eigen::VectorXd b = prog.b;
  if (me > 0) {
    Eigen::VectorXd rs = Eigen::VectorXd::Ones(me);
    Eigen::SparseMatrix<double, Eigen::RowMajor> Arm(A);
    for (Eigen::Index r = 0; r < me; ++r) {
      double nrm2 = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arm, r); it; ++it) {
        nrm2 += it.value() * it.value();
      }
      rs[r] = 1.0 / std::max(1e-12, std::sqrt(nrm2));
    }
    A = rs.asDiagonal() * A;
    b = rs.cwiseProduct(b);
  }
  Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n);
  {
    Eigen::VectorXd nrm2 = Eigen::VectorXd::Zero(n);
    const auto accumulate = [&](const Eigen::SparseMatrix<double>& S) {
      for (int j = 0; j < S.outerSize(); ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(S, j); it; ++it) {
          nrm2[j] += it.value() * it.value();
        }
      }
    };
    for (const auto& ib : blocks) accumulate(ib.B);
    accumulate(A);
    for (int j = 0; j < n; ++j) {
      if (nrm2[j] > 1e-24) col_scale[j] = 1.0 / std::sqrt(nrm2[j]);
    }
    for (auto& ib : blocks) ib.B = ib.B * col_scale.asDiagonal();
    A = A * col_scale.asDiagonal();
    c_int = c_int.cwiseProduct(col_scale);
  }
  const Eigen::MatrixXd At = Eigen::MatrixXd(A).transpose();

  // --- Interior starting point: gamma = 0, identity-scaled slacks and
  // multipliers.  Path following drives the (infeasible) residuals to zero.
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(me);
  double cone_dim = 0.0;
  for (auto& ib : blocks) {
    if (ib.type == ConeType::PSD) {
      const double mag = std::max(1.0, ib.d.lpNorm<Eigen::Infinity>());
      ib.s = mag * svec(Eigen::MatrixXd::Identity(ib.size, ib.size));
      ib.lam = svec(Eigen::MatrixXd::Identity(ib.size, ib.size));
      cone_dim += ib.size;
    } else {
      const double mag = std::max(1.0, ib.d.lpNorm<Eigen::Infinity>());
      ib.s = Eigen::VectorXd::Constant(ib.rows, mag);
      ib.lam = Eigen::VectorXd::Ones(ib.rows);
      cone_dim += static_cast<double>(ib.rows);
    }
  }

  double data_inf = std::max(b.size() > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0, 1.0);
  for (const auto& ib : blocks) {
    data_inf = std::max(data_inf, ib.d.lpNorm<Eigen::Infinity>());
  }
  const double cd_inf = std::max(1.0, c_int.lpNorm<Eigen::Infinity>());

  const long max_newton = std::min<long>(std::max<long>(10, opts.max_iter), 200);
  const double eta = 0.99;  // fraction-to-boundary
  const Eigen::Index kkt_n = n + me;

  SolveResult out;
  out.report.status = SolveStatus::MaxIterations;
  long iter = 0;
  double mu_best = std::numeric_limits<double>::infinity();
  int stalled = 0;

  Eigen::MatrixXd H(n, n), kkt(kkt_n, kkt_n);
  Eigen::VectorXd rd(n), re(me), rhs(kkt_n), sol(kkt_n);
  std::vector<Eigen::VectorXd> rc(blocks.size()), dlam(blocks.size()), ds(blocks.size());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  for (iter = 1; iter <= max_newton; ++iter) {
    // Residuals of the scaled problem.
    rd = c_int;
    for (const auto& ib : blocks) rd -= ib.B.transpose() * ib.lam;
    if (me > 0) rd.noalias() -= At * nu;
    double prim_inf = 0.0;
    if (me > 0) {
      re = A * gamma - b;
      prim_inf = re.lpNorm<Eigen::Infinity>();
    }
    double gap = 0.0;
    for (auto& ib : blocks) {
      ib.rp = ib.B * gamma + ib.d - ib.s;
      prim_inf = std::max(prim_inf, ib.rp.lpNorm<Eigen::Infinity>());
      gap += ib.s.dot(ib.lam);
    }
    const double mu = gap / std::max(1.0, cone_dim);
    const double obj_int = c_int.dot(gamma);
    const double rel_p = prim_inf / data_inf;
    const double rel_d = rd.lpNorm<Eigen::Infinity>() / cd_inf;
    const double rel_gap = gap / (1.0 + std::abs(obj_int));

    if (opts.verbose) {
      std::fprintf(stderr, "ipm %3ld mu %9.3e prim %9.3e dual %9.3e gap %9.3e obj %+.9e\n", iter,
                   mu, rel_p, rel_d, rel_gap, obj_int);
    }
    // Caller-facing contract on the original data; scaled and unscaled
    // residuals differ by the row norms.
    const Residuals res = residuals(prog, col_scale.cwiseProduct(gamma));
    const bool contract_ok = res.primal <= opts.tol_feas && res.psd_violation >= -opts.tol_psd;
    if (contract_ok && rel_p <= 1e-9 && rel_d <= 1e-7 && rel_gap <= 1e-7) {
      out.report.status = SolveStatus::Optimal;
      break;
    }
    // The central path bottoms out near the accuracy of the dense
    // factorization; detect the plateau rather than spinning on it.  All
    // abnormal exits share the post-loop classification below.
    if (mu < 0.99 * mu_best) {
      mu_best = mu;
      stalled = 0;
    } else if (++stalled >= 10) {
      break;
    }

    // --- Nesterov-Todd scaling per block: W lam W = s, winv = W^{-1}.
    bool scaling_ok = true;
    for (auto& ib : blocks) {
      if (ib.type == ConeType::PSD) {
        const Eigen::MatrixXd S = smat(ib.s, ib.size);
        const Eigen::MatrixXd Lam = smat(ib.lam, ib.size);
        Eigen::MatrixXd lam_half, lam_ihalf;
        if (!sqrt_pair(Lam, lam_half, lam_ihalf)) {
          scaling_ok = false;
          break;
        }
        const Eigen::MatrixXd T = lam_half * S * lam_half;
        Eigen::MatrixXd t_half, t_ihalf;
        if (!sqrt_pair(T, t_half, t_ihalf)) {
          scaling_ok = false;
          break;
        }
        ib.winv.noalias() = lam_half * t_ihalf * lam_half;
        Eigen::LLT<Eigen::MatrixXd> llt_s(S);
        Eigen::LLT<Eigen::MatrixXd> llt_l(Lam);
        if (llt_s.info() != Eigen::Success || llt_l.info() != Eigen::Success) {
          scaling_ok = false;
          break;
        }
        ib.chol_s = llt_s.matrixL();
        ib.chol_lam = llt_l.matrixL();
        const Eigen::MatrixXd sinv_mat = llt_s.solve(Eigen::MatrixXd::Identity(ib.size, ib.size));
        ib.sinv = svec(0.5 * (sinv_mat + sinv_mat.transpose()));
      } else {
        if ((ib.s.array() <= 0.0).any() || (ib.lam.array() <= 0.0).any()) {
          scaling_ok = false;
          break;
        }
        ib.wdiag = ib.lam.cwiseQuotient(ib.s);
        ib.sinv = ib.s.cwiseInverse();
      }
    }
    if (!scaling_ok) break;  // iterate left the interior; report best so far

    // --- Schur-style dense Newton matrix H = sum_k B_k' G_k B_k with
    // G_k = W^{-1} (x)_s W^{-1}; the sandwich per structurally nonzero column
    // is the hot loop, parallel across columns (disjoint H columns).
    H.setZero();
    for (const auto& ib : blocks) {
      if (ib.type == ConeType::PSD) {
        const auto col_work = [&](int j) {
          if (ib.B.outerIndexPtr()[j] == ib.B.outerIndexPtr()[j + 1]) return;
          Eigen::VectorXd col = Eigen::VectorXd::Zero(ib.rows);
          for (Eigen::SparseMatrix<double>::InnerIterator it(ib.B, j); it; ++it) {
            col[it.row()] = it.value();
          }
          const Eigen::MatrixXd V = smat(col, ib.size);
          Eigen::MatrixXd Y = ib.winv * V * ib.winv;
          const Eigen::VectorXd y = svec(Y);
          for (int i = 0; i < ib.B.outerSize(); ++i) {
            double acc = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(ib.B, i); it; ++it) {
              acc += it.value() * y[it.row()];
            }
            if (acc != 0.0) H(i, j) += acc;
          }
        };
        if (parallel_enabled()) {
#pragma omp parallel for schedule(dynamic)
          for (int j = 0; j < n; ++j) col_work(j);
        } else {
          for (int j = 0; j < n; ++j) col_work(j);
        }
      } else {
        const Eigen::SparseMatrix<double> BtWB =
            (ib.B.transpose() * ib.wdiag.asDiagonal() * ib.B).eval();
        for (int j = 0; j < BtWB.outerSize(); ++j) {
          for (Eigen::SparseMatrix<double>::InnerIterator it(BtWB, j); it; ++it) {
            H(it.row(), j) += it.value();
          }
        }
      }
    }
    H = 0.5 * (H + H.transpose()).eval();

    kkt.setZero();
    kkt.topLeftCorner(n, n) = H;
    if (me > 0) {
      kkt.topRightCorner(n, me) = At;
      kkt.bottomLeftCorner(me, n) = At.transpose();
    }
    // Static regularization keeps the saddle system nonsingular even when a
    // variable appears in no cone (free variables have zero rows in H).  It
    // must stay absolute and tiny: the NT diagonal grows like 1/mu, so any
    // scale-relative shift would eventually dwarf the Newton step itself.
    const double reg = 1e-12;
    kkt.diagonal().head(n).array() += reg;
    kkt.diagonal().tail(me).array() -= reg;
    lu.compute(kkt);

    // Direction for a given centering target; rc_k = sigma*mu*svec(S^{-1}) - lam.
    const auto solve_direction = [&](double sigma_mu, Eigen::VectorXd& dgamma,
                                     Eigen::VectorXd& dnu) {
      rhs.head(n) = -rd;
      for (size_t k = 0; k < blocks.size(); ++k) {
        auto& ib = blocks[k];
        rc[k] = sigma_mu * ib.sinv - ib.lam;
        Eigen::VectorXd grp;
        if (ib.type == ConeType::PSD) {
          const Eigen::MatrixXd Rp = smat(ib.rp, ib.size);
          grp = svec(Eigen::MatrixXd(ib.winv * Rp * ib.winv));
        } else {
          grp = ib.wdiag.cwiseProduct(ib.rp);
        }
        // h = sum B'(rc - G rp) - r_d, assembled incrementally.
        rhs.head(n) += ib.B.transpose() * (rc[k] - grp);
      }
      if (me > 0) rhs.tail(me) = -re;
      sol = lu.solve(rhs);
      // Iterative refinement: the saddle system is as ill-conditioned as the
      // central path is sharp, and the step equations only contract the
      // infeasibility residuals when solved accurately.
      for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXd resid = rhs - kkt * sol;
        if (resid.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
        sol += lu.solve(resid);
      }
      dgamma = sol.head(n);
      dnu = -sol.tail(me);
      for (size_t k = 0; k < blocks.size(); ++k) {
        auto& ib = blocks[k];
        ds[k] = ib.B * dgamma + ib.rp;
        if (ib.type == ConeType::PSD) {
          const Eigen::MatrixXd Ds = smat(ds[k], ib.size);
          dlam[k] = rc[k] - svec(Eigen::MatrixXd(ib.winv * Ds * ib.winv));
        } else {
          dlam[k] = rc[k] - ib.wdiag.cwiseProduct(ds[k]);
        }
      }
    };

    const auto step_lengths = [&](double margin, double& ap, double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (size_t k = 0; k < blocks.size(); ++k) {
        const auto& ib = blocks[k];
        if (ib.type == ConeType::PSD) {
          ap = std::min(ap, psd_step(ib.chol_s, ds[k], ib.size, margin));
          ad = std::min(ad, psd_step(ib.chol_lam, dlam[k], ib.size, margin));
        } else {
          ap = std::min(ap, nonneg_step(ib.s, ds[k], margin));
          ad = std::min(ad, nonneg_step(ib.lam, dlam[k], margin));
        }
      }
    };

    Eigen::VectorXd dgamma, dnu;
    // Predictor (affine scaling, sigma = 0) fixes the centering weight.
    solve_direction(0.0, dgamma, dnu);
    double ap_aff, ad_aff;
    step_lengths(1.0, ap_aff, ad_aff);
    double gap_aff = 0.0;
    for (size_t k = 0; k < blocks.size(); ++k) {
      gap_aff += (blocks[k].s + ap_aff * ds[k]).dot(blocks[k].lam + ad_aff * dlam[k]);
    }
    const double mu_aff = std::max(0.0, gap_aff) / std::max(1.0, cone_dim);
    double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector with the Mehrotra centering weight.
    solve_direction(sigma * mu, dgamma, dnu);
    double ap, ad;
    step_lengths(eta, ap, ad);

    if (!dgamma.allFinite() || !std::isfinite(ap) || !std::isfinite(ad)) break;
    if (ap < 1e-10 && ad < 1e-10) break;  // stalled at the boundary

    gamma += ap * dgamma;
    nu += ad * dnu;
    for (size_t k = 0; k < blocks.size(); ++k) {
      blocks[k].s += ap * ds[k];
      blocks[k].lam += ad * dlam[k];
    }
  }

  out.gamma = col_scale.cwiseProduct(gamma);
  const Residuals res = residuals(prog, out.gamma);
  out.report.objective = objective_value(prog, out.gamma);
  out.report.primal_residual = res.primal;
  out.report.psd_violation = res.psd_violation;

  // Exits at the numerical floor (step stall, loss of cone interior, mu
  // plateau) still carry an essentially exact iterate; classify by the final
  // point's own merits instead of the exit path taken.
  if (out.report.status != SolveStatus::Optimal) {
    double gap_end = 0.0;
    for (const IpmBlock& ib : blocks) gap_end += ib.s.dot(ib.lam);
    const double rel_gap_end = gap_end / (1.0 + std::abs(c_int.dot(gamma)));
    const bool contract_end =
        res.primal <= opts.tol_feas && res.psd_violation >= -opts.tol_psd;
    if (contract_end && std::abs(rel_gap_end) <= 1e-5)
      out.report.status = SolveStatus::Optimal;
  }
  out.report.iterations = std::min(iter, max_newton);
  out.report.wall_time_s =
      std::chrono::duration_cast<std::chrono::duration<double>>(clock::now() - t0).count();
  return out;
}

}  // namespace volopt
