#include "volopt/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "volopt/ipm.hpp"
#include "volopt/parallel.hpp"
#include "volopt/sos.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace volopt {

namespace {

bool has_closed_form_box_moments(const MeasureSpec& mu) {
  switch (mu.kind) {
    case MeasureSpec::Kind::LebesgueBox:
    case MeasureSpec::Kind::UniformBox:
      return true;
    case MeasureSpec::Kind::Product:
      return std::all_of(mu.components.begin(), mu.components.end(),
                         has_closed_form_box_moments);
    default:
      return false;
  }
}

Polynomial box_quadratic(int nvars, int index) {
  Polynomial p = Polynomial::constant(nvars, 1.0);
  Exponent e(static_cast<size_t>(nvars), 0);
  e[static_cast<size_t>(index)] = 2;
  p.set_coeff(e, -1.0);
  return p;
}

}  // namespace

Polynomial integrate_over_x(const Polynomial& w, const MeasureSpec& mu_x) {
  mu_x.validate();
  if (!has_closed_form_box_moments(mu_x)) {
    throw std::invalid_argument("integrate_over_x: measure must be of box type");
  }
  const int n = mu_x.nvars();
  if (w.nvars() < n) {
    throw std::invalid_argument("integrate_over_x: polynomial has fewer variables than mu_x");
  }
  const int m = w.nvars() - n;

  int x_degree = 0;
  for (const auto& [e, c] : w.terms()) {
    int dx = 0;
    for (int v = 0; v < n; ++v) dx += e[static_cast<size_t>(v)];
    x_degree = std::max(x_degree, dx);
  }
  const MomentSequence mom = moments(mu_x, x_degree);

  Polynomial out(m);
  for (const auto& [e, c] : w.terms()) {
    const Exponent ex(e.begin(), e.begin() + n);
    const Exponent ea(e.begin() + n, e.end());
    out.set_coeff(ea, out.coeff(ea) + c * mom[ex]);
  }
  return out;
}

PD2FProgram build_pd2f(const VolumeProblem& problem, const FeasibleSetCertificate& cert, int d_w,
                       GlobalNonnegMode mode) {
  problem.validate();
  const int n = problem.blocks.x_dim;
  const int m = problem.blocks.a_dim;
  const int nv = n + m;
  if (cert.poly_a.nvars() != m) {
    throw std::invalid_argument("pd2f: certificate is over the wrong number of parameters");
  }
  if (d_w < 2 || d_w % 2 != 0) {
    throw std::invalid_argument("pd2f: d_w must be a positive even degree");
  }
  for (const Polynomial& g : problem.s1) {
    if (g.degree() > d_w) {
      throw std::invalid_argument("pd2f: d_w below the degree of an S1 generator");
    }
  }
  if (cert.poly_a.degree() > d_w) {
    throw std::invalid_argument("pd2f: d_w below the certificate degree");
  }
  if (mode == GlobalNonnegMode::Auto) {
    mode = nv <= 4 ? GlobalNonnegMode::BoxQM : GlobalNonnegMode::PlainSOS;
  }

  ProgramBuilder pb;
  const auto& joint_basis = monomial_basis(nv, d_w);
  PD2FProgram out;
  out.d_w = d_w;
  out.mode = mode;
  out.w_vars = pb.new_vars(static_cast<int>(joint_basis.size()));
  out.beta_var = pb.new_var();
  pb.set_objective(false, LinExpr::var(out.beta_var));

  // (48a): W - 1 >= 0 on K1, certified over the S1 generators.
  PolyLin t48a(nv);
  for (size_t k = 0; k < joint_basis.size(); ++k) {
    t48a.add_term(joint_basis[k], LinExpr::var(out.w_vars[k]));
  }
  t48a.add_term(Exponent(static_cast<size_t>(nv), 0), LinExpr(-1.0));
  add_qm_identity(pb, t48a, problem.s1, d_w);

  // (48b): beta - int_chi W dmu_x >= 0 on A_d, certified over the shrunk
  // certificate sublevel polynomial and the parameter box quadratics.
  const MomentSequence xmom = moments(problem.mu_x, d_w);
  PolyLin t48b(m);
  t48b.add_term(Exponent(static_cast<size_t>(m), 0), LinExpr::var(out.beta_var));
  for (size_t k = 0; k < joint_basis.size(); ++k) {
    const Exponent& e = joint_basis[k];
    const Exponent ex(e.begin(), e.begin() + n);
    const Exponent ea(e.begin() + n, e.end());
    t48b.add_term(ea, LinExpr::var(out.w_vars[k], -xmom[ex]));
  }
  std::vector<Polynomial> gens_b;
  gens_b.push_back(Polynomial::constant(m, 1.0 - cert.eps_a) - cert.poly_a);
  for (int i = 0; i < m; ++i) gens_b.push_back(box_quadratic(m, i));
  add_qm_identity(pb, t48b, gens_b, d_w);

  // (48c): W >= 0 on chi x A.
  PolyLin t48c(nv);
  for (size_t k = 0; k < joint_basis.size(); ++k) {
    t48c.add_term(joint_basis[k], LinExpr::var(out.w_vars[k]));
  }
  std::vector<Polynomial> gens_c;
  if (mode == GlobalNonnegMode::BoxQM) {
    for (int v = 0; v < nv; ++v) gens_c.push_back(box_quadratic(nv, v));
  }
  add_qm_identity(pb, t48c, gens_c, d_w);

  out.program = pb.build();
  return out;
}

DualCertificate extract_certificate(const PD2FProgram& built, const VolumeProblem& problem,
                                    const SolveResult& result) {
  const int nv = problem.blocks.joint_dim();
  DualCertificate out;
  out.d_w = built.d_w;
  out.report = result.report;
  out.beta = result.gamma[built.beta_var];

  Polynomial w(nv);
  const auto& joint_basis = monomial_basis(nv, built.d_w);
  for (size_t k = 0; k < joint_basis.size(); ++k) {
    const double c = result.gamma[built.w_vars[k]];
    if (c != 0.0) w.set_coeff(joint_basis[k], c);
  }
  w.prune(1e-12);
  out.w_poly = w;
  out.integrated_w = integrate_over_x(out.w_poly, problem.mu_x);
  return out;
}

DualCertificate solve_pd2f(const VolumeProblem& problem, const FeasibleSetCertificate& cert,
                           int d_w, const SolveOptions& opts, GlobalNonnegMode mode) {
  const PD2FProgram built = build_pd2f(problem, cert, d_w, mode);
  const SolveResult result = solve_auto(built.program, opts);
  return extract_certificate(built, problem, result);
}

std::pair<std::vector<double>, double> argmax_over_ad(const Polynomial& integrated_w,
                                                      const FeasibleSetCertificate& cert) {
  const int m = integrated_w.nvars();
  if (cert.poly_a.nvars() != m) {
    throw std::invalid_argument("argmax_over_ad: certificate/polynomial variable mismatch");
  }
  if (m < 1 || m > 2) {
    throw std::invalid_argument("argmax_over_ad: grid extraction supports 1 or 2 parameters");
  }
  const long per_dim = 10000;
  const long total = m == 1 ? per_dim : per_dim * per_dim;
  const auto coord = [per_dim](long k) {
    return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(per_dim - 1);
  };

  long best_index = -1;
  double best_value = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel if (parallel_enabled() && m > 1)
#endif
  {
    long local_index = -1;
    double local_value = -std::numeric_limits<double>::infinity();
    std::vector<double> a(static_cast<size_t>(m));
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (long k = 0; k < total; ++k) {
      a[0] = coord(m == 1 ? k : k / per_dim);
      if (m == 2) a[1] = coord(k % per_dim);
      if (!cert.member(a)) continue;
      const double v = integrated_w.evaluate(a);
      // Strict improvement with index tie-break keeps the scan order result
      // identical for any thread count.
      if (v > local_value || (v == local_value && k < local_index)) {
        local_value = v;
        local_index = k;
      }
    }
#ifdef _OPENMP
#pragma omp critical(volopt_argmax_merge)
#endif
    {
      if (local_value > best_value ||
          (local_value == best_value && local_index >= 0 && local_index < best_index)) {
        best_value = local_value;
        best_index = local_index;
      }
    }
  }
  if (best_index < 0) {
    throw std::runtime_error("argmax_over_ad: no grid point lies in A_d");
  }
  std::vector<double> a(static_cast<size_t>(m));
  a[0] = coord(m == 1 ? best_index : best_index / per_dim);
  if (m == 2) a[1] = coord(best_index % per_dim);
  return {a, best_value};
}

}  // namespace volopt
