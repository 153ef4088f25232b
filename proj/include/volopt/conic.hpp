#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <string>
#include <vector>

namespace volopt {

enum class ConeType { PSD, Nonnegative };

// One cone membership constraint: the affine image B*gamma + d must lie in the
// cone.  PSD blocks are stored in svec coordinates (column-major upper
// triangle, off-diagonal entries scaled by sqrt(2), length k(k+1)/2);
// nonnegative blocks are plain componentwise vectors of length k.
struct ConeBlock {
  ConeType type = ConeType::PSD;
  int size = 0;  // matrix side length, or vector length for nonnegative
  Eigen::SparseMatrix<double> B;
  Eigen::VectorXd d;

  Eigen::Index rows() const { return B.rows(); }
};

// Standard-form conic program over a free decision vector gamma in R^N:
//   maximize/minimize c^T gamma  s.t.  A gamma = b,  B_k gamma + d_k in K_k.
struct ConicProgram {
  int num_vars = 0;
  bool maximize = false;
  Eigen::VectorXd c;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<ConeBlock> blocks;

  // Throws std::invalid_argument on dimension mismatches, NaN data, or an
  // empty constraint set.
  void validate() const;
};

// svec packing length for a k x k symmetric matrix.
inline Eigen::Index svec_len(int k) { return static_cast<Eigen::Index>(k) * (k + 1) / 2; }
// Flat svec index of entry (i,j), i <= j, column-major upper triangle.
inline Eigen::Index svec_index(int i, int j) {
  return static_cast<Eigen::Index>(j) * (j + 1) / 2 + i;
}

// Isometric symmetric-matrix vectorization (off-diagonals carry sqrt(2)).
Eigen::VectorXd svec(const Eigen::MatrixXd& S);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int k);

// Euclidean projection of an svec-packed symmetric matrix onto the PSD cone.
Eigen::VectorXd project_psd(const Eigen::VectorXd& v, int k);
// Minimum eigenvalue of an svec-packed symmetric matrix.
double min_eigenvalue_svec(const Eigen::VectorXd& v, int k);

struct Residuals {
  double primal = 0.0;         // ||A gamma - b||_inf (0 when no equalities)
  double psd_violation = 0.0;  // most negative eigenvalue / entry across blocks
};

// Exact recomputation from the program data; the single source of truth used
// by tests independently of any solver's self-report.
Residuals residuals(const ConicProgram& prog, const Eigen::VectorXd& gamma);

// Objective value c^T gamma (sign as stated in the program, not negated).
double objective_value(const ConicProgram& prog, const Eigen::VectorXd& gamma);

// Sparse linear expression in the decision variables plus a constant.
struct LinExpr {
  double constant = 0.0;
  std::map<int, double> coef;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}
  static LinExpr var(int index, double scale = 1.0);

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
  LinExpr& add_term(int index, double scale);
  bool is_constant() const { return coef.empty(); }
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(LinExpr a, double s);
LinExpr operator*(double s, LinExpr a);

// Incremental construction of a ConicProgram from scalar variables, affine
// expressions, equality constraints, and matrix cone blocks.
class ProgramBuilder {
 public:
  int new_var();
  std::vector<int> new_vars(int count);
  int num_vars() const { return num_vars_; }

  void set_objective(bool maximize, const LinExpr& objective);

  // expr == 0
  void add_equality(const LinExpr& expr);
  // fixes expr == value
  void add_equality(const LinExpr& expr, double value);

  // Upper-triangle entries (i <= j) of a symmetric k x k affine matrix in
  // column-major order: entries[svec_index(i,j)].  Declares it PSD.
  void add_psd_block(int k, const std::vector<LinExpr>& upper_entries);
  // Componentwise nonnegative affine vector.
  void add_nonneg_block(const std::vector<LinExpr>& entries);

  // Fresh k x k symmetric matrix of decision variables constrained PSD (a
  // Gram matrix); returns the variable index for each (i,j), i <= j
  // accessible via symmetric lookup.
  struct GramHandle {
    int size = 0;
    std::vector<int> var_index;  // svec layout
    int operator()(int i, int j) const {
      return var_index[static_cast<size_t>(svec_index(std::min(i, j), std::max(i, j)))];
    }
  };
  GramHandle add_gram(int k);

  std::int64_t num_equalities() const { return static_cast<std::int64_t>(equalities_.size()); }
  std::int64_t num_blocks() const { return static_cast<std::int64_t>(blocks_.size()); }

  ConicProgram build() const;

 private:
  struct BlockSpec {
    ConeType type;
    int size;
    std::vector<LinExpr> entries;  // svec layout for PSD, plain for nonneg
  };

  int num_vars_ = 0;
  bool maximize_ = false;
  LinExpr objective_;
  std::vector<LinExpr> equalities_;
  std::vector<BlockSpec> blocks_;
};

}  // namespace volopt
