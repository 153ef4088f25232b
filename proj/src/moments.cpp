#include "volopt/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace volopt {

namespace {

std::vector<double> filled(int n, double v) { return std::vector<double>(static_cast<size_t>(n), v); }

}  // namespace

MeasureSpec MeasureSpec::lebesgue_box(int nvars) {
  return lebesgue_box(filled(nvars, -1.0), filled(nvars, 1.0));
}

MeasureSpec MeasureSpec::lebesgue_box(std::vector<double> lower, std::vector<double> upper) {
  MeasureSpec s;
  s.kind = Kind::LebesgueBox;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::uniform_box(int nvars) {
  return uniform_box(filled(nvars, -1.0), filled(nvars, 1.0));
}

MeasureSpec MeasureSpec::uniform_box(std::vector<double> lower, std::vector<double> upper) {
  MeasureSpec s;
  s.kind = Kind::UniformBox;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::dirac(std::vector<double> atom) {
  MeasureSpec s;
  s.kind = Kind::Dirac;
  s.atom = std::move(atom);
  s.validate();
  return s;
}

MeasureSpec MeasureSpec::product(std::vector<MeasureSpec> components) {
  MeasureSpec s;
  s.kind = Kind::Product;
  s.components = std::move(components);
  s.validate();
  return s;
}

int MeasureSpec::nvars() const {
  switch (kind) {
    case Kind::LebesgueBox:
    case Kind::UniformBox:
      return static_cast<int>(lower.size());
    case Kind::Dirac:
      return static_cast<int>(atom.size());
    case Kind::Product: {
      int n = 0;
      for (const auto& c : components) n += c.nvars();
      return n;
    }
  }
  return 0;
}

double MeasureSpec::mass() const {
  switch (kind) {
    case Kind::LebesgueBox: {
      double v = 1.0;
      for (size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
      return v;
    }
    case Kind::UniformBox:
    case Kind::Dirac:
      return 1.0;
    case Kind::Product: {
      double v = 1.0;
      for (const auto& c : components) v *= c.mass();
      return v;
    }
  }
  return 0.0;
}

bool MeasureSpec::is_unit_box() const {
  if (kind != Kind::LebesgueBox && kind != Kind::UniformBox) return false;
  for (size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] != -1.0 || upper[i] != 1.0) return false;
  }
  return true;
}

void MeasureSpec::validate() const {
  switch (kind) {
    case Kind::LebesgueBox:
    case Kind::UniformBox:
      if (lower.size() != upper.size()) throw std::invalid_argument("measure: bound size mismatch");
      if (lower.empty()) throw std::invalid_argument("measure: empty box");
      for (size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw std::invalid_argument("measure: lower must be < upper");
      }
      break;
    case Kind::Dirac:
      if (atom.empty()) throw std::invalid_argument("measure: empty dirac atom");
      break;
    case Kind::Product:
      if (components.empty()) throw std::invalid_argument("measure: empty product");
      for (const auto& c : components) c.validate();
      break;
  }
}

MomentSequence::MomentSequence(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || order < 0) throw std::invalid_argument("moment sequence: bad dimensions");
  values_.assign(static_cast<size_t>(basis_size(nvars, order)), 0.0);
}

double& MomentSequence::at_rank(std::int64_t rank1) {
  if (rank1 < 1 || rank1 > size()) throw std::out_of_range("moment sequence: rank out of range");
  return values_[static_cast<size_t>(rank1 - 1)];
}

double MomentSequence::at_rank(std::int64_t rank1) const {
  if (rank1 < 1 || rank1 > size()) throw std::out_of_range("moment sequence: rank out of range");
  return values_[static_cast<size_t>(rank1 - 1)];
}

double& MomentSequence::operator[](const Exponent& alpha) {
  if (static_cast<int>(alpha.size()) != nvars_ || degree_of(alpha) > order_) {
    throw std::out_of_range("moment sequence: exponent outside truncation");
  }
  return at_rank(grevlex_rank(alpha));
}

double MomentSequence::operator[](const Exponent& alpha) const {
  if (static_cast<int>(alpha.size()) != nvars_ || degree_of(alpha) > order_) {
    throw std::out_of_range("moment sequence: exponent outside truncation");
  }
  return at_rank(grevlex_rank(alpha));
}

MomentSequence MomentSequence::with_order(int order) const {
  MomentSequence out(nvars_, order);
  const size_t keep = std::min(out.values_.size(), values_.size());
  for (size_t i = 0; i < keep; ++i) out.values_[i] = values_[i];
  return out;
}

MomentSequence box_moments(const MeasureSpec& spec, int order) {
  if (spec.kind != MeasureSpec::Kind::LebesgueBox && spec.kind != MeasureSpec::Kind::UniformBox) {
    throw std::invalid_argument("box_moments: measure is not a box measure");
  }
  spec.validate();
  const int n = spec.nvars();
  double volume = 1.0;
  for (size_t i = 0; i < spec.lower.size(); ++i) volume *= spec.upper[i] - spec.lower[i];
  const double scale = spec.kind == MeasureSpec::Kind::UniformBox ? 1.0 / volume : 1.0;
  MomentSequence y(n, order);
  const auto& basis = monomial_basis(n, order);
  for (size_t k = 0; k < basis.size(); ++k) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      const int a = basis[k][static_cast<size_t>(i)];
      v *= (std::pow(spec.upper[static_cast<size_t>(i)], a + 1) -
            std::pow(spec.lower[static_cast<size_t>(i)], a + 1)) /
           static_cast<double>(a + 1);
    }
    y.at_rank(static_cast<std::int64_t>(k) + 1) = v * scale;
  }
  return y;
}

MomentSequence dirac_moments(const std::vector<double>& atom, int order) {
  if (atom.empty()) throw std::invalid_argument("dirac_moments: empty atom");
  const int n = static_cast<int>(atom.size());
  MomentSequence y(n, order);
  const auto& basis = monomial_basis(n, order);
  for (size_t k = 0; k < basis.size(); ++k) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int p = 0; p < basis[k][static_cast<size_t>(i)]; ++p) v *= atom[static_cast<size_t>(i)];
    }
    y.at_rank(static_cast<std::int64_t>(k) + 1) = v;
  }
  return y;
}

MomentSequence moments(const MeasureSpec& spec, int order) {
  spec.validate();
  switch (spec.kind) {
    case MeasureSpec::Kind::LebesgueBox:
    case MeasureSpec::Kind::UniformBox:
      return box_moments(spec, order);
    case MeasureSpec::Kind::Dirac:
      return dirac_moments(spec.atom, order);
    case MeasureSpec::Kind::Product: {
      MomentSequence acc = moments(spec.components.front(), order);
      for (size_t i = 1; i < spec.components.size(); ++i) {
        acc = product_moments(acc, moments(spec.components[i], order), order);
      }
      return acc;
    }
  }
  throw std::invalid_argument("moments: unknown measure kind");
}

MomentSequence product_moments(const MomentSequence& first, const MomentSequence& second,
                               int order) {
  if (first.order() < order || second.order() < order) {
    throw std::invalid_argument("product_moments: input order insufficient");
  }
  const int n1 = first.nvars();
  const int n2 = second.nvars();
  MomentSequence out(n1 + n2, order);
  const auto& basis = monomial_basis(n1 + n2, order);
  Exponent a(static_cast<size_t>(n1));
  Exponent b(static_cast<size_t>(n2));
  for (size_t k = 0; k < basis.size(); ++k) {
    for (int i = 0; i < n1; ++i) a[static_cast<size_t>(i)] = basis[k][static_cast<size_t>(i)];
    for (int i = 0; i < n2; ++i) b[static_cast<size_t>(i)] = basis[k][static_cast<size_t>(n1 + i)];
    out.at_rank(static_cast<std::int64_t>(k) + 1) = first[a] * second[b];
  }
  return out;
}

MomentSequence empirical_moments(const std::vector<std::vector<double>>& points, int nvars,
                                 int order) {
  if (points.empty()) throw std::invalid_argument("empirical_moments: no samples");
  MomentSequence y(nvars, order);
  const auto& basis = monomial_basis(nvars, order);
  for (const auto& pt : points) {
    if (static_cast<int>(pt.size()) != nvars) {
      throw std::invalid_argument("empirical_moments: point dimension mismatch");
    }
    for (size_t k = 0; k < basis.size(); ++k) {
      double v = 1.0;
      for (int i = 0; i < nvars; ++i) {
        for (int p = 0; p < basis[k][static_cast<size_t>(i)]; ++p) v *= pt[static_cast<size_t>(i)];
      }
      y.at_rank(static_cast<std::int64_t>(k) + 1) += v;
    }
  }
  const double inv = 1.0 / static_cast<double>(points.size());
  for (auto& v : y.values()) v *= inv;
  return y;
}

double IndexedSymmetricMatrix::min_eigenvalue() const {
  if (mat.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

IndexedSymmetricMatrix moment_matrix(const MomentSequence& y, int r) {
  if (y.order() < 2 * r) throw std::invalid_argument("moment_matrix: order too low");
  const int n = y.nvars();
  const auto& basis = monomial_basis(n, r);
  const auto sz = static_cast<Eigen::Index>(basis.size());
  IndexedSymmetricMatrix m;
  m.nvars = n;
  m.r = r;
  m.mat.resize(sz, sz);
  Exponent sum(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < sz; ++i) {
    for (Eigen::Index j = i; j < sz; ++j) {
      for (int v = 0; v < n; ++v) {
        sum[static_cast<size_t>(v)] = basis[static_cast<size_t>(i)][static_cast<size_t>(v)] +
                                      basis[static_cast<size_t>(j)][static_cast<size_t>(v)];
      }
      const double val = y[sum];
      m.mat(i, j) = val;
      m.mat(j, i) = val;
    }
  }
  return m;
}

IndexedSymmetricMatrix localizing_matrix(const MomentSequence& y, const Polynomial& p,
                                         int r_loc) {
  if (p.nvars() != y.nvars()) throw std::invalid_argument("localizing_matrix: variable mismatch");
  if (y.order() < 2 * r_loc + p.degree()) {
    throw std::invalid_argument("localizing_matrix: order too low");
  }
  const int n = y.nvars();
  const auto& basis = monomial_basis(n, r_loc);
  const auto sz = static_cast<Eigen::Index>(basis.size());
  IndexedSymmetricMatrix m;
  m.nvars = n;
  m.r = r_loc;
  m.mat.resize(sz, sz);
  Exponent sum(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < sz; ++i) {
    for (Eigen::Index j = i; j < sz; ++j) {
      double val = 0.0;
      for (const auto& [gamma, coef] : p.terms()) {
        for (int v = 0; v < n; ++v) {
          sum[static_cast<size_t>(v)] = gamma[static_cast<size_t>(v)] +
                                        basis[static_cast<size_t>(i)][static_cast<size_t>(v)] +
                                        basis[static_cast<size_t>(j)][static_cast<size_t>(v)];
        }
        val += coef * y[sum];
      }
      m.mat(i, j) = val;
      m.mat(j, i) = val;
    }
  }
  return m;
}

BoxMap BoxMap::from_bounds(const std::vector<double>& lower, const std::vector<double>& upper) {
  if (lower.size() != upper.size() || lower.empty()) {
    throw std::invalid_argument("box map: bad bounds");
  }
  BoxMap m;
  m.center.resize(lower.size());
  m.half.resize(lower.size());
  for (size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw std::invalid_argument("box map: lower must be < upper");
    m.center[i] = 0.5 * (lower[i] + upper[i]);
    m.half[i] = 0.5 * (upper[i] - lower[i]);
  }
  return m;
}

BoxMap BoxMap::identity(int nvars) {
  BoxMap m;
  m.center.assign(static_cast<size_t>(nvars), 0.0);
  m.half.assign(static_cast<size_t>(nvars), 1.0);
  return m;
}

bool BoxMap::is_identity() const {
  for (size_t i = 0; i < center.size(); ++i) {
    if (center[i] != 0.0 || half[i] != 1.0) return false;
  }
  return true;
}

double BoxMap::jacobian() const {
  double j = 1.0;
  for (double h : half) j *= h;
  return j;
}

std::vector<double> BoxMap::from_unit(const std::vector<double>& t) const {
  if (t.size() != center.size()) throw std::invalid_argument("box map: dimension mismatch");
  std::vector<double> x(t.size());
  for (size_t i = 0; i < t.size(); ++i) x[i] = center[i] + half[i] * t[i];
  return x;
}

std::vector<double> BoxMap::to_unit(const std::vector<double>& x) const {
  if (x.size() != center.size()) throw std::invalid_argument("box map: dimension mismatch");
  std::vector<double> t(x.size());
  for (size_t i = 0; i < x.size(); ++i) t[i] = (x[i] - center[i]) / half[i];
  return t;
}

std::vector<Polynomial> BoxMap::substitution(int total_vars, int offset) const {
  if (offset < 0 || offset + nvars() > total_vars) {
    throw std::invalid_argument("box map: substitution slots out of range");
  }
  std::vector<Polynomial> subs;
  subs.reserve(center.size());
  for (size_t i = 0; i < center.size(); ++i) {
    Polynomial p = Polynomial::constant(total_vars, center[i]);
    p += Polynomial::variable(total_vars, offset + static_cast<int>(i)) * half[i];
    subs.push_back(std::move(p));
  }
  return subs;
}

}  // namespace volopt
