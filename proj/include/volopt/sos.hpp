#pragma once

#include <map>
#include <vector>

#include "volopt/conic.hpp"
#include "volopt/poly.hpp"

namespace volopt {

// Polynomial whose coefficients are affine expressions in the decision
// variables of a ProgramBuilder (e.g. an unknown certificate polynomial).
class PolyLin {
 public:
  using TermMap = std::map<Exponent, LinExpr, GrevlexLess>;

  explicit PolyLin(int nvars) : nvars_(nvars) {}
  static PolyLin from(const Polynomial& p);

  int nvars() const { return nvars_; }
  int degree() const;
  const TermMap& terms() const { return terms_; }

  void add_constant_poly(const Polynomial& p, double scale = 1.0);
  // += var * p
  void add_variable_times_poly(int var, const Polynomial& p);
  void add_term(const Exponent& e, const LinExpr& expr);

 private:
  int nvars_;
  TermMap terms_;
};

// Degree of the SOS multiplier paired with a generator of degree `gen_degree`
// at identity budget 2t: 2 * floor((2t - gen_degree) / 2).
int multiplier_degree(int budget, int gen_degree);

// Appends to `pb` the Gram matrices and coefficient-matching equalities of the
// quadratic-module identity
//   target == s0 + sum_j s_j * gens[j],
// with s0 and every s_j sum-of-squares, matched exactly on all grevlex
// monomials of total degree <= budget (budget must be even and >= deg target).
// Returns the Gram handles, s0 first, then one per generator in order.
std::vector<ProgramBuilder::GramHandle> add_qm_identity(ProgramBuilder& pb, const PolyLin& target,
                                                        const std::vector<Polynomial>& gens,
                                                        int budget);

// Reconstructs the SOS certificate polynomials from a solved decision vector:
// s(x) = b(x)^T G b(x) for the Gram matrix entries found in gamma.
Polynomial gram_polynomial(const ProgramBuilder::GramHandle& handle, int nvars,
                           const Eigen::VectorXd& gamma);

// The redundant ball polynomial R - ||v||^2 over `nvars` variables with
// squared radius `radius_sq` (Putinar regularization).
Polynomial ball_polynomial(int nvars, double radius_sq);

}  // namespace volopt
