#include "volopt/sos.hpp"

#include <stdexcept>

namespace volopt {

PolyLin PolyLin::from(const Polynomial& p) {
  PolyLin out(p.nvars());
  out.add_constant_poly(p);
  return out;
}

int PolyLin::degree() const {
  int d = 0;
  for (const auto& [e, expr] : terms_) d = std::max(d, degree_of(e));
  return d;
}

void PolyLin::add_constant_poly(const Polynomial& p, double scale) {
  if (p.nvars() != nvars_) throw std::invalid_argument("poly-lin: variable count mismatch");
  for (const auto& [e, c] : p.terms()) terms_[e] += LinExpr(scale * c);
}

void PolyLin::add_variable_times_poly(int var, const Polynomial& p) {
  if (p.nvars() != nvars_) throw std::invalid_argument("poly-lin: variable count mismatch");
  for (const auto& [e, c] : p.terms()) terms_[e].add_term(var, c);
}

void PolyLin::add_term(const Exponent& e, const LinExpr& expr) {
  if (static_cast<int>(e.size()) != nvars_) {
    throw std::invalid_argument("poly-lin: exponent size mismatch");
  }
  terms_[e] += expr;
}

int multiplier_degree(int budget, int gen_degree) {
  const int slack = budget - gen_degree;
  if (slack < 0) return -1;
  return 2 * (slack / 2);
}

std::vector<ProgramBuilder::GramHandle> add_qm_identity(ProgramBuilder& pb, const PolyLin& target,
                                                        const std::vector<Polynomial>& gens,
                                                        int budget) {
  const int nv = target.nvars();
  if (budget < 0 || budget % 2 != 0) throw std::invalid_argument("qm identity: budget must be even");
  if (target.degree() > budget) throw std::invalid_argument("qm identity: budget below target degree");
  for (const auto& g : gens) {
    if (g.nvars() != nv) throw std::invalid_argument("qm identity: generator variable mismatch");
    if (g.is_zero()) throw std::invalid_argument("qm identity: zero generator");
    if (multiplier_degree(budget, g.degree()) < 0) {
      throw std::invalid_argument("qm identity: budget below generator degree");
    }
  }

  // residual(e) accumulates (QM expression - target) coefficient by coefficient.
  PolyLin::TermMap residual;
  for (const auto& [e, expr] : target.terms()) {
    residual[e] -= expr;
  }

  std::vector<ProgramBuilder::GramHandle> grams;
  grams.reserve(gens.size() + 1);

  // s(x) = b(x)^T G b(x) contributes (2 - [p==q]) * G_pq * b_p * b_q; when a
  // generator is present every contribution is further multiplied by its terms.
  auto accumulate = [&](const ProgramBuilder::GramHandle& G, const std::vector<Exponent>& basis,
                        const Polynomial* gen) {
    Exponent e(static_cast<size_t>(nv));
    for (size_t q = 0; q < basis.size(); ++q) {
      for (size_t p = 0; p <= q; ++p) {
        const double w = p == q ? 1.0 : 2.0;
        const int var = G(static_cast<int>(p), static_cast<int>(q));
        if (gen == nullptr) {
          for (int v = 0; v < nv; ++v) {
            e[static_cast<size_t>(v)] = basis[p][static_cast<size_t>(v)] + basis[q][static_cast<size_t>(v)];
          }
          residual[e].add_term(var, w);
        } else {
          for (const auto& [ge, gc] : gen->terms()) {
            for (int v = 0; v < nv; ++v) {
              e[static_cast<size_t>(v)] = basis[p][static_cast<size_t>(v)] +
                                          basis[q][static_cast<size_t>(v)] + ge[static_cast<size_t>(v)];
            }
            residual[e].add_term(var, w * gc);
          }
        }
      }
    }
  };

  {
    const auto& basis0 = monomial_basis(nv, budget / 2);
    grams.push_back(pb.add_gram(static_cast<int>(basis0.size())));
    accumulate(grams.back(), basis0, nullptr);
  }
  for (const auto& g : gens) {
    const int tg = multiplier_degree(budget, g.degree());
    const auto& basis_g = monomial_basis(nv, tg / 2);
    grams.push_back(pb.add_gram(static_cast<int>(basis_g.size())));
    accumulate(grams.back(), basis_g, &g);
  }

  for (const auto& [e, expr] : residual) {
    if (degree_of(e) > budget) {
      throw std::logic_error("qm identity: contribution above budget");
    }
    pb.add_equality(expr);
  }
  return grams;
}

Polynomial gram_polynomial(const ProgramBuilder::GramHandle& handle, int nvars,
                           const Eigen::VectorXd& gamma) {
  // Infer the basis order from the gram size: handle.size rows over `nvars`.
  int r = 0;
  while (basis_size(nvars, r) < handle.size) ++r;
  if (basis_size(nvars, r) != handle.size) {
    throw std::invalid_argument("gram_polynomial: size is not a full monomial basis");
  }
  const auto& b = monomial_basis(nvars, r);
  Polynomial s = Polynomial::constant(nvars, 0.0);
  Exponent e(static_cast<size_t>(nvars));
  for (size_t q = 0; q < b.size(); ++q) {
    for (size_t p = 0; p <= q; ++p) {
      const double g = gamma[handle(static_cast<int>(p), static_cast<int>(q))];
      if (g == 0.0) continue;
      for (int v = 0; v < nvars; ++v) {
        e[static_cast<size_t>(v)] = b[p][static_cast<size_t>(v)] + b[q][static_cast<size_t>(v)];
      }
      const double w = p == q ? 1.0 : 2.0;
      s.set_coeff(e, s.coeff(e) + w * g);
    }
  }
  s.prune(0.0);
  return s;
}

Polynomial ball_polynomial(int nvars, double radius_sq) {
  Polynomial p = Polynomial::constant(nvars, radius_sq);
  for (int i = 0; i < nvars; ++i) {
    Exponent e(static_cast<size_t>(nvars), 0);
    e[static_cast<size_t>(i)] = 2;
    p.set_coeff(e, -1.0);
  }
  return p;
}

}  // namespace volopt
