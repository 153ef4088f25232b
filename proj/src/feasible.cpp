#include "volopt/feasible.hpp"

#include <cmath>
#include <stdexcept>

#include "volopt/ipm.hpp"

namespace volopt {

namespace {

int even_ceil(int d) { return 2 * ((d + 1) / 2); }

// Lifts an exponent over the a block to the joint (x,a) exponent vector.
Exponent lift_to_joint(const Exponent& alpha, int n) {
  Exponent e(static_cast<size_t>(n) + alpha.size(), 0);
  for (size_t i = 0; i < alpha.size(); ++i) e[static_cast<size_t>(n) + i] = alpha[i];
  return e;
}

}  // namespace

void VolumeProblem::validate() const {
  blocks.validate();
  if (blocks.a_dim < 1) throw std::invalid_argument("volume problem: needs at least one parameter");
  if (s1.empty()) throw std::invalid_argument("volume problem: S1 has no inequalities");
  for (const auto& p : s1) {
    if (p.nvars() != blocks.joint_dim()) {
      throw std::invalid_argument("volume problem: S1 polynomial over wrong variables");
    }
  }
  for (const auto& p : s2) {
    if (p.nvars() != blocks.joint_dim()) {
      throw std::invalid_argument("volume problem: S2 polynomial over wrong variables");
    }
  }
  if (mu_x.nvars() != blocks.x_dim) {
    throw std::invalid_argument("volume problem: measure dimension mismatch");
  }
  if (d < 1) throw std::invalid_argument("volume problem: d must be positive");
  if (!(eps_a > 0.0) || !(eps_a < 1.0)) throw std::invalid_argument("volume problem: eps_a in (0,1)");
  if (!(eps_k > 0.0)) throw std::invalid_argument("volume problem: eps_k must be positive");
  if (stage1_budget < 0 || stage1_budget % 2 != 0) {
    throw std::invalid_argument("volume problem: stage1 budget must be even");
  }
}

bool FeasibleSetCertificate::member(const std::vector<double>& a) const {
  return poly_a.evaluate(a) <= 1.0 - eps_a;
}

P21dProgram build_p21d(const VolumeProblem& problem) {
  problem.validate();
  const int n = problem.blocks.x_dim;
  const int m = problem.blocks.a_dim;
  const int nv = n + m;

  int max_gen_deg = 2;  // the ball polynomial
  for (const auto& p : problem.s1) max_gen_deg = std::max(max_gen_deg, p.degree());
  for (const auto& p : problem.s2) max_gen_deg = std::max(max_gen_deg, p.degree());

  P21dProgram out;
  out.budget_joint = problem.stage1_budget > 0
                         ? problem.stage1_budget
                         : std::max({even_ceil(problem.d), even_ceil(max_gen_deg) + 2, 4});
  out.budget_a = std::max(even_ceil(problem.d), 4);
  if (out.budget_joint < problem.d) {
    throw std::invalid_argument("build_p21d: stage1 budget below certificate degree");
  }

  ProgramBuilder pb;
  const auto& a_basis = monomial_basis(m, problem.d);
  out.pa_vars = pb.new_vars(static_cast<int>(a_basis.size()));

  // Objective: minimize the L1 mass of the certificate over A (closed forms).
  const MomentSequence mom_a = box_moments(MeasureSpec::lebesgue_box(m), problem.d);
  LinExpr objective;
  for (size_t k = 0; k < a_basis.size(); ++k) {
    objective.add_term(out.pa_vars[k], mom_a.at_rank(static_cast<std::int64_t>(k) + 1));
  }
  pb.set_objective(false, objective);

  // Constraint (38): one QM identity per complement piece, over the joint block.
  for (const auto& p2i : problem.s2) {
    PolyLin target(nv);
    for (size_t k = 0; k < a_basis.size(); ++k) {
      Exponent joint = lift_to_joint(a_basis[k], n);
      target.add_term(joint, LinExpr::var(out.pa_vars[k]));
    }
    target.add_constant_poly(Polynomial::constant(nv, 1.0), -1.0);

    std::vector<Polynomial> gens = problem.s1;
    Polynomial neg = -p2i;
    neg.set_coeff(Exponent(static_cast<size_t>(nv), 0),
                  neg.coeff(Exponent(static_cast<size_t>(nv), 0)) - problem.eps_k);
    gens.push_back(std::move(neg));
    gens.push_back(ball_polynomial(nv, static_cast<double>(nv)));
    add_qm_identity(pb, target, gens, out.budget_joint);
  }

  // Constraint (39): the certificate itself is in the QM of the box A.
  {
    PolyLin target(m);
    for (size_t k = 0; k < a_basis.size(); ++k) {
      target.add_term(a_basis[k], LinExpr::var(out.pa_vars[k]));
    }
    std::vector<Polynomial> gens;
    for (int i = 0; i < m; ++i) {
      Polynomial g = Polynomial::constant(m, 1.0);
      Exponent e(static_cast<size_t>(m), 0);
      e[static_cast<size_t>(i)] = 2;
      g.set_coeff(e, -1.0);
      gens.push_back(std::move(g));
    }
    if (m > 1) gens.push_back(ball_polynomial(m, static_cast<double>(m)));
    add_qm_identity(pb, target, gens, out.budget_a);
  }

  out.program = pb.build();
  return out;
}

FeasibleSetCertificate certificate_from_gamma(const VolumeProblem& problem,
                                              const P21dProgram& built,
                                              const SolveResult& result) {
  const int m = problem.blocks.a_dim;
  const auto& a_basis = monomial_basis(m, problem.d);
  FeasibleSetCertificate cert;
  cert.eps_a = problem.eps_a;
  cert.eps_k = problem.eps_k;
  cert.d = problem.d;
  cert.report = result.report;
  Polynomial p = Polynomial::constant(m, 0.0);
  for (size_t k = 0; k < a_basis.size(); ++k) {
    const double c = result.gamma[built.pa_vars[k]];
    if (c != 0.0) p.set_coeff(a_basis[k], c);
  }
  p.prune(1e-12);
  cert.poly_a = std::move(p);
  cert.objective = result.report.objective;
  return cert;
}

FeasibleSetCertificate solve_p21d(const VolumeProblem& problem, const SolveOptions& opts) {
  const P21dProgram built = build_p21d(problem);
  const SolveResult result = solve_auto(built.program, opts);
  return certificate_from_gamma(problem, built, result);
}

}  // namespace volopt
