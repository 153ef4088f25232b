#pragma once

// Sparse multivariate polynomial arithmetic over a fixed number of real
// variables, with graded reverse lexicographic (grevlex) monomial indexing.
//
// Monomials are exponent vectors; the grevlex order compares total degree
// first and breaks ties by lexicographic comparison of the exponent vector
// read right-to-left (equivalently: reversed lexicographic with sign flip).
// For n=2 this yields the basis order 1, x1, x2, x1^2, x1*x2, x2^2 used to
// lay out moment matrices.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace volopt {

using Exponent = std::vector<int>;

// Total degree |alpha|_1.
int degree_of(const Exponent& alpha);

// Grevlex "less than". Both exponents must have the same length.
bool grevlex_less(const Exponent& a, const Exponent& b);

struct GrevlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    return grevlex_less(a, b);
  }
};

// S_{n,d} = binomial(d+n, n). Throws std::overflow_error if the count does
// not fit in a signed 64-bit integer.
std::int64_t basis_size(int n, int d);

// All monomials of n variables with total degree <= d, sorted ascending in
// grevlex order. The returned reference is owned by an internal cache and
// stays valid for the lifetime of the program.
const std::vector<Exponent>& monomial_basis(int n, int d);

// 1-based grevlex rank; rank of the constant monomial is 1.
std::int64_t grevlex_rank(const Exponent& alpha);

// Inverse of grevlex_rank. k is 1-based; throws std::out_of_range when k < 1.
Exponent grevlex_unrank(int n, std::int64_t k);

class Polynomial {
 public:
  using TermMap = std::map<Exponent, double, GrevlexLess>;

  // Relative magnitude below which coefficients are pruned after multiply
  // and compose, to keep round-off noise out of SDP data.
  static constexpr double kDropTolerance = 1e-14;

  Polynomial() : nvars_(0) {}
  explicit Polynomial(int nvars);

  static Polynomial constant(int nvars, double value);
  static Polynomial variable(int nvars, int index);
  static Polynomial monomial(Exponent alpha, double coeff);

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Max total degree of a stored term; 0 for the zero polynomial by
  // convention.
  int degree() const;

  double coeff(const Exponent& alpha) const;
  void set_coeff(const Exponent& alpha, double value);

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend Polynomial operator-(Polynomial lhs, const Polynomial& rhs) {
    lhs -= rhs;
    return lhs;
  }
  friend Polynomial operator*(Polynomial lhs, double s) {
    lhs *= s;
    return lhs;
  }
  friend Polynomial operator*(double s, Polynomial rhs) {
    rhs *= s;
    return rhs;
  }
  friend Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs);
  Polynomial operator-() const;

  Polynomial pow(int k) const;

  // Plain monomial summation (no Horner rewriting); deterministic term order.
  double evaluate(std::span<const double> point) const;

  Polynomial differentiate(int var_index) const;

  // Substitute subs[i] for variable i. All substitutes must share a common
  // variable count, and subs.size() must equal nvars().
  Polynomial compose(const std::vector<Polynomial>& subs) const;

  // Remove terms whose magnitude is below rel_tol times the largest
  // coefficient magnitude (and exact zeros).
  void prune(double rel_tol = kDropTolerance);

  // Render using the given variable names, grevlex term order.
  std::string str(const std::vector<std::string>& names) const;

 private:
  int nvars_;
  TermMap terms_;

  void check_same_vars(const Polynomial& other) const;
};

// State/parameter variable layout: x-block of dimension n first, then
// a-block of dimension m. Names default to x1..xn, a1..am.
struct VariableBlocks {
  int x_dim = 0;
  int a_dim = 0;
  std::vector<std::string> names;  // size x_dim + a_dim

  static VariableBlocks make(int n, int m);
  int joint_dim() const { return x_dim + a_dim; }
  void validate() const;  // n >= 1, m >= 0, names unique
};

// Error from parse_polynomial, carrying the byte offset into the input.
struct PolyParseError : std::runtime_error {
  PolyParseError(std::size_t offset, const std::string& message)
      : std::runtime_error(message), offset(offset) {}
  std::size_t offset;
};

// Parse the textual polynomial syntax shared with the problem-file format:
// `+`/`-` separated terms, `^` powers, explicit `*` or implicit
// multiplication by juxtaposition, parentheses. Example:
//   0.25 - a1^2 - x1^2
// Unknown identifiers raise PolyParseError with the offending offset.
Polynomial parse_polynomial(std::string_view text,
                            const std::vector<std::string>& var_names);

}  // namespace volopt
