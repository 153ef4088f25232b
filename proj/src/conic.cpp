#include "volopt/conic.hpp"

#include <cmath>
#include <stdexcept>

namespace volopt {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865475;
}  // namespace

void ConicProgram::validate() const {
  if (num_vars < 1) throw std::invalid_argument("conic program: no decision variables");
  if (c.size() != num_vars) throw std::invalid_argument("conic program: objective size mismatch");
  if (A.rows() != b.size()) throw std::invalid_argument("conic program: equality rhs mismatch");
  if (A.rows() > 0 && A.cols() != num_vars) {
    throw std::invalid_argument("conic program: equality lhs mismatch");
  }
  if (A.rows() == 0 && blocks.empty()) {
    throw std::invalid_argument("conic program: no constraints");
  }
  auto check_finite = [](const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string("conic program: NaN in ") + what);
  };
  check_finite(c, "objective");
  check_finite(b, "equality rhs");
  for (const auto& blk : blocks) {
    if (blk.size < 1) throw std::invalid_argument("conic program: empty cone block");
    const Eigen::Index expect = blk.type == ConeType::PSD ? svec_len(blk.size) : blk.size;
    if (blk.B.rows() != expect || blk.d.size() != expect) {
      throw std::invalid_argument("conic program: cone block row count mismatch");
    }
    if (blk.B.cols() != num_vars) {
      throw std::invalid_argument("conic program: cone block column count mismatch");
    }
    check_finite(blk.d, "cone offset");
    for (int k = 0; k < blk.B.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(blk.B, k); it; ++it) {
        if (!std::isfinite(it.value())) {
          throw std::invalid_argument("conic program: NaN in cone block data");
        }
      }
    }
  }
}

Eigen::VectorXd svec(const Eigen::MatrixXd& S) {
  const int k = static_cast<int>(S.rows());
  Eigen::VectorXd v(svec_len(k));
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i <= j; ++i) {
      v[svec_index(i, j)] = i == j ? S(i, j) : kSqrt2 * S(i, j);
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int k) {
  if (v.size() != svec_len(k)) throw std::invalid_argument("smat: length mismatch");
  Eigen::MatrixXd S(k, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double val = i == j ? v[svec_index(i, j)] : kInvSqrt2 * v[svec_index(i, j)];
      S(i, j) = val;
      S(j, i) = val;
    }
  }
  return S;
}

Eigen::VectorXd project_psd(const Eigen::VectorXd& v, int k) {
  if (k == 1) return Eigen::VectorXd::Constant(1, std::max(0.0, v[0]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(v, k));
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  if ((lam.array() == 0.0).all()) return Eigen::VectorXd::Zero(v.size());
  const Eigen::MatrixXd proj =
      es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return svec(proj);
}

double min_eigenvalue_svec(const Eigen::VectorXd& v, int k) {
  if (k == 1) return v[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(v, k), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Residuals residuals(const ConicProgram& prog, const Eigen::VectorXd& gamma) {
  if (gamma.size() != prog.num_vars) throw std::invalid_argument("residuals: dimension mismatch");
  Residuals r;
  if (prog.A.rows() > 0) r.primal = (prog.A * gamma - prog.b).cwiseAbs().maxCoeff();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& blk : prog.blocks) {
    const Eigen::VectorXd z = blk.B * gamma + blk.d;
    const double lo = blk.type == ConeType::PSD ? min_eigenvalue_svec(z, blk.size) : z.minCoeff();
    worst = std::min(worst, lo);
  }
  r.psd_violation = prog.blocks.empty() ? 0.0 : worst;
  return r;
}

double objective_value(const ConicProgram& prog, const Eigen::VectorXd& gamma) {
  return prog.c.dot(gamma);
}

LinExpr LinExpr::var(int index, double scale) {
  LinExpr e;
  e.coef[index] = scale;
  return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  constant += o.constant;
  for (const auto& [i, v] : o.coef) {
    auto [it, fresh] = coef.try_emplace(i, v);
    if (!fresh) {
      it->second += v;
      if (it->second == 0.0) coef.erase(it);
    }
  }
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  constant -= o.constant;
  for (const auto& [i, v] : o.coef) {
    auto [it, fresh] = coef.try_emplace(i, -v);
    if (!fresh) {
      it->second -= v;
      if (it->second == 0.0) coef.erase(it);
    }
  }
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  if (s == 0.0) {
    coef.clear();
    constant = 0.0;
    return *this;
  }
  constant *= s;
  for (auto& [i, v] : coef) v *= s;
  return *this;
}

LinExpr& LinExpr::add_term(int index, double scale) {
  if (scale == 0.0) return *this;
  auto [it, fresh] = coef.try_emplace(index, scale);
  if (!fresh) {
    it->second += scale;
    if (it->second == 0.0) coef.erase(it);
  }
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

int ProgramBuilder::new_var() { return num_vars_++; }

std::vector<int> ProgramBuilder::new_vars(int count) {
  std::vector<int> out(static_cast<size_t>(count));
  for (auto& v : out) v = new_var();
  return out;
}

void ProgramBuilder::set_objective(bool maximize, const LinExpr& objective) {
  maximize_ = maximize;
  objective_ = objective;
}

void ProgramBuilder::add_equality(const LinExpr& expr) { equalities_.push_back(expr); }

void ProgramBuilder::add_equality(const LinExpr& expr, double value) {
  LinExpr e = expr;
  e.constant -= value;
  equalities_.push_back(std::move(e));
}

void ProgramBuilder::add_psd_block(int k, const std::vector<LinExpr>& upper_entries) {
  if (static_cast<Eigen::Index>(upper_entries.size()) != svec_len(k)) {
    throw std::invalid_argument("add_psd_block: entry count mismatch");
  }
  blocks_.push_back({ConeType::PSD, k, upper_entries});
}

void ProgramBuilder::add_nonneg_block(const std::vector<LinExpr>& entries) {
  if (entries.empty()) throw std::invalid_argument("add_nonneg_block: empty");
  blocks_.push_back({ConeType::Nonnegative, static_cast<int>(entries.size()), entries});
}

ProgramBuilder::GramHandle ProgramBuilder::add_gram(int k) {
  GramHandle h;
  h.size = k;
  h.var_index.resize(static_cast<size_t>(svec_len(k)));
  std::vector<LinExpr> entries(h.var_index.size());
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i <= j; ++i) {
      const int v = new_var();
      h.var_index[static_cast<size_t>(svec_index(i, j))] = v;
      entries[static_cast<size_t>(svec_index(i, j))] = LinExpr::var(v);
    }
  }
  add_psd_block(k, entries);
  return h;
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram prog;
  prog.num_vars = num_vars_;
  prog.maximize = maximize_;
  prog.c = Eigen::VectorXd::Zero(num_vars_);
  for (const auto& [i, v] : objective_.coef) prog.c[i] = v;

  {
    std::vector<Eigen::Triplet<double>> trips;
    prog.b.resize(static_cast<Eigen::Index>(equalities_.size()));
    for (size_t r = 0; r < equalities_.size(); ++r) {
      prog.b[static_cast<Eigen::Index>(r)] = -equalities_[r].constant;
      for (const auto& [i, v] : equalities_[r].coef) {
        trips.emplace_back(static_cast<int>(r), i, v);
      }
    }
    prog.A.resize(static_cast<Eigen::Index>(equalities_.size()), num_vars_);
    prog.A.setFromTriplets(trips.begin(), trips.end());
  }

  prog.blocks.reserve(blocks_.size());
  for (const auto& spec : blocks_) {
    ConeBlock blk;
    blk.type = spec.type;
    blk.size = spec.size;
    const Eigen::Index rows = spec.type == ConeType::PSD ? svec_len(spec.size) : spec.size;
    blk.d.resize(rows);
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const LinExpr& e = spec.entries[static_cast<size_t>(r)];
      double scale = 1.0;
      if (spec.type == ConeType::PSD) {
        // svec isometry: off-diagonal slots carry sqrt(2).
        int j = 0;
        while (svec_index(0, j + 1) <= r) ++j;
        const int i = static_cast<int>(r - svec_index(0, j));
        if (i != j) scale = kSqrt2;
      }
      blk.d[r] = scale * e.constant;
      for (const auto& [idx, v] : e.coef) {
        trips.emplace_back(static_cast<int>(r), idx, scale * v);
      }
    }
    blk.B.resize(rows, num_vars_);
    blk.B.setFromTriplets(trips.begin(), trips.end());
    prog.blocks.push_back(std::move(blk));
  }
  prog.validate();
  return prog;
}

}  // namespace volopt
