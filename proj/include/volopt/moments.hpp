#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "volopt/poly.hpp"

namespace volopt {

// Description of a finite Borel measure with box support.  Boxes default to
// [-1,1] per coordinate; `dirac` carries an atom point and `product` a list of
// component measures over disjoint variable blocks (components are juxtaposed
// in order, the first component owning the leading exponent slots).
struct MeasureSpec {
  enum class Kind { LebesgueBox, UniformBox, Dirac, Product };

  Kind kind = Kind::LebesgueBox;
  std::vector<double> lower;              // box kinds: per-coordinate bounds
  std::vector<double> upper;
  std::vector<double> atom;               // dirac only
  std::vector<MeasureSpec> components;    // product only

  static MeasureSpec lebesgue_box(int nvars);
  static MeasureSpec lebesgue_box(std::vector<double> lower, std::vector<double> upper);
  static MeasureSpec uniform_box(int nvars);
  static MeasureSpec uniform_box(std::vector<double> lower, std::vector<double> upper);
  static MeasureSpec dirac(std::vector<double> atom);
  static MeasureSpec product(std::vector<MeasureSpec> components);

  int nvars() const;
  double mass() const;
  bool is_unit_box() const;  // box kinds with all bounds exactly [-1,1]
  // Throws std::invalid_argument when bounds are inverted or sizes disagree.
  void validate() const;
};

// Truncated moment sequence: one real value per monomial exponent of total
// degree <= order, stored in grevlex rank order.
class MomentSequence {
 public:
  MomentSequence() = default;
  MomentSequence(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

  double& at_rank(std::int64_t rank1);         // 1-based grevlex rank
  double at_rank(std::int64_t rank1) const;
  double& operator[](const Exponent& alpha);
  double operator[](const Exponent& alpha) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Pads/truncates to a new order; new entries are zero.
  MomentSequence with_order(int order) const;

 private:
  int nvars_ = 0;
  int order_ = 0;
  std::vector<double> values_;
};

// Closed-form moments y_alpha = prod_i (u_i^{a_i+1} - l_i^{a_i+1})/(a_i+1) of a
// Lebesgue box measure, divided by the box volume for uniform-box.
MomentSequence box_moments(const MeasureSpec& spec, int order);

// Moments of a Dirac measure: y_alpha = atom^alpha.
MomentSequence dirac_moments(const std::vector<double>& atom, int order);

// Dispatches on the measure kind (product handled recursively).
MomentSequence moments(const MeasureSpec& spec, int order);

// Product sequence over juxtaposed variable blocks:
// (y)_(alpha,beta) = first_alpha * second_beta for |(alpha,beta)| <= order.
// Throws when either input's order is insufficient.
MomentSequence product_moments(const MomentSequence& first, const MomentSequence& second,
                               int order);

// Empirical moments (1/N) * sum_k x_k^alpha of a sample set (rows = points).
MomentSequence empirical_moments(const std::vector<std::vector<double>>& points, int nvars,
                                 int order);

// Dense symmetric matrix whose rows/columns are labelled by the grevlex
// monomials of degree <= r.
struct IndexedSymmetricMatrix {
  int nvars = 0;
  int r = 0;
  Eigen::MatrixXd mat;

  std::int64_t size() const { return mat.rows(); }
  double min_eigenvalue() const;
};

// Moment matrix M_r(y): entry (i,j) = y_{alpha(i)+alpha(j)}.
IndexedSymmetricMatrix moment_matrix(const MomentSequence& y, int r);

// Localizing matrix M_r(y;p): entry (i,j) = sum_gamma p_gamma y_{gamma+alpha(i)+alpha(j)}.
IndexedSymmetricMatrix localizing_matrix(const MomentSequence& y, const Polynomial& p,
                                         int r_loc);

// Affine change of variables mapping the unit box [-1,1]^n onto
// [lower,upper]^n: x_i = center_i + half_i * t_i.
struct BoxMap {
  std::vector<double> center;
  std::vector<double> half;

  static BoxMap from_bounds(const std::vector<double>& lower, const std::vector<double>& upper);
  static BoxMap identity(int nvars);

  int nvars() const { return static_cast<int>(center.size()); }
  bool is_identity() const;
  double jacobian() const;  // prod_i half_i
  std::vector<double> from_unit(const std::vector<double>& t) const;
  std::vector<double> to_unit(const std::vector<double>& x) const;
  // Substitution polynomials x_i(t) for Polynomial::compose over `total_vars`
  // variables, with this map occupying slots [offset, offset+nvars).
  std::vector<Polynomial> substitution(int total_vars, int offset) const;
};

}  // namespace volopt
