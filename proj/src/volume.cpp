#include "volopt/volume.hpp"

#include <cmath>
#include <stdexcept>

#include "volopt/ipm.hpp"

namespace volopt {

namespace {

// Localizing-matrix upper triangle of LinExpr entries for a moment vector held
// in decision variables `vars` (grevlex order over nv variables), against a
// fixed polynomial (nullptr = moment matrix itself).
std::vector<LinExpr> loc_entries(int nv, const std::vector<int>& vars, const Polynomial* poly,
                                 int rr) {
  const auto& basis = monomial_basis(nv, rr);
  std::vector<LinExpr> entries(static_cast<size_t>(svec_len(static_cast<int>(basis.size()))));
  Exponent e(static_cast<size_t>(nv));
  for (size_t j = 0; j < basis.size(); ++j) {
    for (size_t i = 0; i <= j; ++i) {
      LinExpr expr;
      if (poly == nullptr) {
        for (int v = 0; v < nv; ++v) {
          e[static_cast<size_t>(v)] = basis[i][static_cast<size_t>(v)] + basis[j][static_cast<size_t>(v)];
        }
        expr.add_term(vars[static_cast<size_t>(grevlex_rank(e) - 1)], 1.0);
      } else {
        for (const auto& [ge, gc] : poly->terms()) {
          for (int v = 0; v < nv; ++v) {
            e[static_cast<size_t>(v)] = basis[i][static_cast<size_t>(v)] +
                                        basis[j][static_cast<size_t>(v)] + ge[static_cast<size_t>(v)];
          }
          expr.add_term(vars[static_cast<size_t>(grevlex_rank(e) - 1)], gc);
        }
      }
      entries[static_cast<size_t>(svec_index(static_cast<int>(i), static_cast<int>(j)))] =
          std::move(expr);
    }
  }
  return entries;
}

}  // namespace

P2MProgram build_p2m(const VolumeProblem& problem, const FeasibleSetCertificate* cert, int r) {
  problem.validate();
  const int n = problem.blocks.x_dim;
  const int m = problem.blocks.a_dim;
  const int nv = n + m;

  if (!problem.s2.empty() && cert == nullptr) {
    throw std::invalid_argument("build_p2m: certificate required when S2 is a proper set");
  }
  int r_min = 1;
  for (const auto& p : problem.s1) r_min = std::max(r_min, (p.degree() + 1) / 2);
  const int r_a = cert != nullptr ? (cert->d + 1) / 2 : 0;
  r_min = std::max(r_min, r_a);
  if (r < r_min) {
    throw std::invalid_argument("build_p2m: relaxation order below the minimum " +
                                std::to_string(r_min));
  }
  if (cert != nullptr && cert->poly_a.nvars() != m) {
    throw std::invalid_argument("build_p2m: certificate variable mismatch");
  }

  ProgramBuilder pb;
  P2MProgram out;
  out.r = r;
  out.y_vars = pb.new_vars(static_cast<int>(basis_size(nv, 2 * r)));
  out.ya_vars = pb.new_vars(static_cast<int>(basis_size(m, 2 * r)));

  pb.set_objective(true, LinExpr::var(out.y_vars[0]));

  // (42a) joint moment matrix and S1 localizers.
  {
    const auto& basis = monomial_basis(nv, r);
    pb.add_psd_block(static_cast<int>(basis.size()), loc_entries(nv, out.y_vars, nullptr, r));
  }
  for (const auto& p : problem.s1) {
    const int rj = (p.degree() + 1) / 2;
    const auto& basis = monomial_basis(nv, r - rj);
    pb.add_psd_block(static_cast<int>(basis.size()), loc_entries(nv, out.y_vars, &p, r - rj));
  }

  // (42b) normalization of the parameter measure.
  pb.add_equality(LinExpr::var(out.ya_vars[0]), 1.0);

  // (42c) parameter-block moment matrix, certificate localizer, box localizers.
  {
    const auto& basis = monomial_basis(m, r);
    pb.add_psd_block(static_cast<int>(basis.size()), loc_entries(m, out.ya_vars, nullptr, r));
  }
  if (cert != nullptr) {
    Polynomial q = -cert->poly_a;
    Exponent zero(static_cast<size_t>(m), 0);
    q.set_coeff(zero, q.coeff(zero) + 1.0 - cert->eps_a);
    const auto& basis = monomial_basis(m, r - r_a);
    pb.add_psd_block(static_cast<int>(basis.size()), loc_entries(m, out.ya_vars, &q, r - r_a));
  }
  for (int i = 0; i < m; ++i) {
    Polynomial g = Polynomial::constant(m, 1.0);
    Exponent e(static_cast<size_t>(m), 0);
    e[static_cast<size_t>(i)] = 2;
    g.set_coeff(e, -1.0);
    const auto& basis = monomial_basis(m, r - 1);
    pb.add_psd_block(static_cast<int>(basis.size()), loc_entries(m, out.ya_vars, &g, r - 1));
  }

  // (42d) domination by the product measure: M_r(y_a x y_x - y) psd, with the
  // x-marginal moments fixed data so each entry is affine in (y_a, y).
  {
    const MomentSequence yx = moments(problem.mu_x, 2 * r);
    const auto& basis = monomial_basis(nv, r);
    std::vector<LinExpr> entries(static_cast<size_t>(svec_len(static_cast<int>(basis.size()))));
    Exponent ex(static_cast<size_t>(n));
    Exponent ea(static_cast<size_t>(m));
    Exponent joint(static_cast<size_t>(nv));
    for (size_t j = 0; j < basis.size(); ++j) {
      for (size_t i = 0; i <= j; ++i) {
        for (int v = 0; v < nv; ++v) {
          joint[static_cast<size_t>(v)] = basis[i][static_cast<size_t>(v)] + basis[j][static_cast<size_t>(v)];
        }
        for (int v = 0; v < n; ++v) ex[static_cast<size_t>(v)] = joint[static_cast<size_t>(v)];
        for (int v = 0; v < m; ++v) ea[static_cast<size_t>(v)] = joint[static_cast<size_t>(n + v)];
        LinExpr expr;
        expr.add_term(out.ya_vars[static_cast<size_t>(grevlex_rank(ea) - 1)], yx[ex]);
        expr.add_term(out.y_vars[static_cast<size_t>(grevlex_rank(joint) - 1)], -1.0);
        entries[static_cast<size_t>(svec_index(static_cast<int>(i), static_cast<int>(j)))] =
            std::move(expr);
      }
    }
    pb.add_psd_block(static_cast<int>(basis.size()), entries);
  }

  out.program = pb.build();
  return out;
}

VolumeSolution extract_solution(const P2MProgram& built, const VolumeProblem& problem,
                                const SolveResult& result) {
  const int n = problem.blocks.x_dim;
  const int m = problem.blocks.a_dim;
  VolumeSolution sol;
  sol.r = built.r;
  sol.report = result.report;
  sol.reliable = result.report.status == SolveStatus::Optimal;

  sol.y = MomentSequence(n + m, 2 * built.r);
  for (size_t k = 0; k < built.y_vars.size(); ++k) {
    sol.y.at_rank(static_cast<std::int64_t>(k) + 1) = result.gamma[built.y_vars[k]];
  }
  sol.y_a = MomentSequence(m, 2 * built.r);
  for (size_t k = 0; k < built.ya_vars.size(); ++k) {
    sol.y_a.at_rank(static_cast<std::int64_t>(k) + 1) = result.gamma[built.ya_vars[k]];
  }

  double vol = sol.y.at_rank(1);
  if (vol < 0.0 && vol > -1e-6) vol = 0.0;  // numeric dust
  sol.volume_estimate = vol;

  sol.a_hat.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    Exponent e(static_cast<size_t>(m), 0);
    e[static_cast<size_t>(i)] = 1;
    sol.a_hat[static_cast<size_t>(i)] = sol.y_a[e];
  }

  // Diffuseness of the parameter measure: top-two eigenvalue ratio of M_r(y_a).
  const IndexedSymmetricMatrix M = moment_matrix(sol.y_a, built.r);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.mat, Eigen::EigenvaluesOnly);
  const Eigen::Index sz = es.eigenvalues().size();
  if (sz >= 2) {
    const double top = es.eigenvalues()[sz - 1];
    const double second = std::max(0.0, es.eigenvalues()[sz - 2]);
    sol.eigen_ratio = top > 0.0 ? second / top : 1.0;
  }
  sol.diffuse = sol.eigen_ratio > 0.1;
  return sol;
}

VolumeSolution solve_p2m(const VolumeProblem& problem, const FeasibleSetCertificate* cert, int r,
                         const SolveOptions& opts) {
  const P2MProgram built = build_p2m(problem, cert, r);
  SolveOptions tuned = opts;
  // Moment relaxations against high-degree certificate data are badly scaled;
  // when the first-order solver handles them, a large initial penalty is what
  // makes the cone gap contract at a useful rate.  Callers that set a penalty
  // explicitly keep theirs.
  if (tuned.rho == SolveOptions{}.rho) tuned.rho = 1000.0;
  const SolveResult result = solve_auto(built.program, tuned);
  return extract_solution(built, problem, result);
}

}  // namespace volopt
