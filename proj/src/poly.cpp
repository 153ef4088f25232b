#include "volopt/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <sstream>

namespace volopt {

int degree_of(const Exponent& alpha) {
  int d = 0;
  for (int e : alpha) d += e;
  return d;
}

bool grevlex_less(const Exponent& a, const Exponent& b) {
  const int da = degree_of(a), db = degree_of(b);
  if (da != db) return da < db;
  // Tie-break: lexicographic on the exponent vector read right-to-left.
  // Within one degree this lists x1^t first and xn^t last, matching the
  // usual moment-matrix row layout (1, x1, x2, x1^2, x1 x2, x2^2 for n=2).
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

std::int64_t basis_size(int n, int d) {
  if (n < 0 || d < 0) throw std::invalid_argument("basis_size: n, d must be >= 0");
  // binomial(d+n, n) with overflow detection.
  std::int64_t result = 1;
  for (int i = 1; i <= n; ++i) {
    // result *= (d + i); result /= i;  -- keep exact by multiplying first.
    const std::int64_t num = d + i;
    if (result > INT64_MAX / num) {
      throw std::overflow_error("basis_size: binomial overflow");
    }
    result = result * num / i;  // exact: product of i consecutive ints is divisible by i!
  }
  return result;
}

namespace {

void enumerate_upto(int n, int d, std::vector<Exponent>& out) {
  Exponent cur(static_cast<std::size_t>(n), 0);
  // Depth-first enumeration of all exponents with total degree <= d; the
  // final sort establishes the grevlex order.
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == n) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      cur[static_cast<std::size_t>(pos)] = e;
      rec(pos + 1, remaining - e);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
  };
  rec(0, d);
  std::sort(out.begin(), out.end(), GrevlexLess{});
}

}  // namespace

const std::vector<Exponent>& monomial_basis(int n, int d) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::vector<Exponent>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(n, d);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<Exponent> basis;
    basis.reserve(static_cast<std::size_t>(basis_size(n, d)));
    enumerate_upto(n, d, basis);
    it = cache.emplace(key, std::move(basis)).first;
  }
  return it->second;
}

std::int64_t grevlex_rank(const Exponent& alpha) {
  const int n = static_cast<int>(alpha.size());
  const int d = degree_of(alpha);
  const auto& basis = monomial_basis(n, d);
  auto it = std::lower_bound(basis.begin(), basis.end(), alpha, GrevlexLess{});
  return static_cast<std::int64_t>(it - basis.begin()) + 1;
}

Exponent grevlex_unrank(int n, std::int64_t k) {
  if (k < 1) throw std::out_of_range("grevlex_unrank: rank must be >= 1");
  // Smallest d with S_{n,d} >= k, then index into that basis.
  int d = 0;
  while (basis_size(n, d) < k) ++d;
  const auto& basis = monomial_basis(n, d);
  return basis[static_cast<std::size_t>(k - 1)];
}

Polynomial::Polynomial(int nvars) : nvars_(nvars) {
  if (nvars < 0) throw std::invalid_argument("Polynomial: nvars must be >= 0");
}

Polynomial Polynomial::constant(int nvars, double value) {
  Polynomial p(nvars);
  if (value != 0.0) p.terms_.emplace(Exponent(static_cast<std::size_t>(nvars), 0), value);
  return p;
}

Polynomial Polynomial::variable(int nvars, int index) {
  if (index < 0 || index >= nvars) {
    throw std::invalid_argument("Polynomial::variable: index out of range");
  }
  Exponent e(static_cast<std::size_t>(nvars), 0);
  e[static_cast<std::size_t>(index)] = 1;
  return monomial(std::move(e), 1.0);
}

Polynomial Polynomial::monomial(Exponent alpha, double coeff) {
  Polynomial p(static_cast<int>(alpha.size()));
  if (coeff != 0.0) p.terms_.emplace(std::move(alpha), coeff);
  return p;
}

int Polynomial::degree() const {
  if (terms_.empty()) return 0;
  // Grevlex order is graded, so the last term has the maximal total degree.
  return degree_of(terms_.rbegin()->first);
}

double Polynomial::coeff(const Exponent& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set_coeff(const Exponent& alpha, double value) {
  if (static_cast<int>(alpha.size()) != nvars_) {
    throw std::invalid_argument("set_coeff: exponent length mismatch");
  }
  if (value == 0.0) {
    terms_.erase(alpha);
  } else {
    terms_[alpha] = value;
  }
}

void Polynomial::check_same_vars(const Polynomial& other) const {
  if (nvars_ != other.nvars_) {
    throw std::invalid_argument("polynomial variable-count mismatch");
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  check_same_vars(rhs);
  for (const auto& [e, c] : rhs.terms_) {
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  check_same_vars(rhs);
  for (const auto& [e, c] : rhs.terms_) {
    auto [it, inserted] = terms_.emplace(e, -c);
    if (!inserted) {
      it->second -= c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial Polynomial::operator-() const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) out.terms_.emplace(e, -c);
  return out;
}

Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs) {
  lhs.check_same_vars(rhs);
  Polynomial out(lhs.nvars_);
  Exponent sum(static_cast<std::size_t>(lhs.nvars_));
  for (const auto& [ea, ca] : lhs.terms_) {
    for (const auto& [eb, cb] : rhs.terms_) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = ea[i] + eb[i];
      out.terms_[sum] += ca * cb;
    }
  }
  out.prune();
  return out;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::pow: negative exponent");
  Polynomial result = constant(nvars_, 1.0);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != nvars_) {
    throw std::invalid_argument("evaluate: point length mismatch");
  }
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      double p = 1.0, base = point[i];
      for (int k = e[i]; k > 0; --k) p *= base;
      term *= p;
    }
    total += term;
  }
  return total;
}

Polynomial Polynomial::differentiate(int var_index) const {
  if (var_index < 0 || var_index >= nvars_) {
    throw std::invalid_argument("differentiate: variable index out of range");
  }
  Polynomial out(nvars_);
  const auto vi = static_cast<std::size_t>(var_index);
  for (const auto& [e, c] : terms_) {
    if (e[vi] == 0) continue;
    Exponent de = e;
    de[vi] -= 1;
    out.terms_.emplace(std::move(de), c * e[vi]);
  }
  return out;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& subs) const {
  if (static_cast<int>(subs.size()) != nvars_) {
    throw std::invalid_argument("compose: need one substitute per variable");
  }
  int target_vars = 0;
  if (!subs.empty()) {
    target_vars = subs.front().nvars();
    for (const auto& s : subs) {
      if (s.nvars() != target_vars) {
        throw std::invalid_argument("compose: substitutes must share a variable block");
      }
    }
  }
  // Cache powers of each substitute up to the largest exponent it receives.
  std::vector<int> max_pow(subs.size(), 0);
  for (const auto& [e, c] : terms_) {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      max_pow[i] = std::max(max_pow[i], e[i]);
    }
  }
  std::vector<std::vector<Polynomial>> powers(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    powers[i].reserve(static_cast<std::size_t>(max_pow[i]) + 1);
    powers[i].push_back(Polynomial::constant(target_vars, 1.0));
    for (int k = 1; k <= max_pow[i]; ++k) {
      powers[i].push_back(powers[i].back() * subs[i]);
    }
  }
  Polynomial out(target_vars);
  for (const auto& [e, c] : terms_) {
    Polynomial term = Polynomial::constant(target_vars, c);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (e[i] > 0) term = term * powers[i][static_cast<std::size_t>(e[i])];
    }
    out += term;
  }
  out.prune();
  return out;
}

void Polynomial::prune(double rel_tol) {
  double max_abs = 0.0;
  for (const auto& [e, c] : terms_) max_abs = std::max(max_abs, std::abs(c));
  if (max_abs == 0.0) {
    terms_.clear();
    return;
  }
  const double cutoff = rel_tol * max_abs;
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= cutoff) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

std::string Polynomial::str(const std::vector<std::string>& names) const {
  if (static_cast<int>(names.size()) != nvars_) {
    throw std::invalid_argument("str: name count mismatch");
  }
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    const bool is_const = degree_of(e) == 0;
    if (is_const || mag != 1.0) {
      os << mag;
      if (!is_const) os << "*";
    }
    bool first_var = true;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (!first_var) os << "*";
      first_var = false;
      os << names[i];
      if (e[i] > 1) os << "^" << e[i];
    }
  }
  return os.str();
}

VariableBlocks VariableBlocks::make(int n, int m) {
  VariableBlocks vb;
  vb.x_dim = n;
  vb.a_dim = m;
  for (int i = 1; i <= n; ++i) vb.names.push_back("x" + std::to_string(i));
  for (int i = 1; i <= m; ++i) vb.names.push_back("a" + std::to_string(i));
  vb.validate();
  return vb;
}

void VariableBlocks::validate() const {
  if (x_dim < 1) throw std::invalid_argument("VariableBlocks: need x_dim >= 1");
  if (a_dim < 0) throw std::invalid_argument("VariableBlocks: need a_dim >= 0");
  if (static_cast<int>(names.size()) != x_dim + a_dim) {
    throw std::invalid_argument("VariableBlocks: name count mismatch");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (names[i] == names[j]) {
        throw std::invalid_argument("VariableBlocks: duplicate name " + names[i]);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Polynomial expression parser.

namespace {

struct Token {
  enum Kind { Number, Ident, Plus, Minus, Star, Caret, LParen, RParen, End };
  Kind kind;
  std::size_t pos;
  double number = 0.0;
  std::string ident;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    current_.pos = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::End;
      return;
    }
    const char c = text_[pos_];
    switch (c) {
      case '+': current_.kind = Token::Plus; ++pos_; return;
      case '-': current_.kind = Token::Minus; ++pos_; return;
      case '*': current_.kind = Token::Star; ++pos_; return;
      case '^': current_.kind = Token::Caret; ++pos_; return;
      case '(': current_.kind = Token::LParen; ++pos_; return;
      case ')': current_.kind = Token::RParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.data() + pos_;
      char* end = nullptr;
      current_.number = std::strtod(begin, &end);
      if (end == begin) throw PolyParseError(pos_, "malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      current_.kind = Token::Number;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = pos_;
      while (j < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) {
        ++j;
      }
      current_.ident = std::string(text_.substr(pos_, j - pos_));
      current_.kind = Token::Ident;
      pos_ = j;
      return;
    }
    throw PolyParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_;
};

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& names)
      : lexer_(text), names_(names), nvars_(static_cast<int>(names.size())) {}

  Polynomial parse() {
    Polynomial p = parse_expr();
    const Token& t = lexer_.peek();
    if (t.kind != Token::End) {
      throw PolyParseError(t.pos, "unexpected trailing input");
    }
    return p;
  }

 private:
  Polynomial parse_expr() {
    Polynomial acc =
        lexer_.peek().kind == Token::Minus || lexer_.peek().kind == Token::Plus
            ? Polynomial::constant(nvars_, 0.0)
            : parse_term();
    while (true) {
      const Token& t = lexer_.peek();
      if (t.kind == Token::Plus) {
        lexer_.take();
        acc += parse_term();
      } else if (t.kind == Token::Minus) {
        lexer_.take();
        acc -= parse_term();
      } else {
        return acc;
      }
    }
  }

  Polynomial parse_term() {
    Polynomial acc = parse_factor();
    while (true) {
      const Token& t = lexer_.peek();
      if (t.kind == Token::Star) {
        lexer_.take();
        acc = acc * parse_factor();
      } else if (t.kind == Token::Number || t.kind == Token::Ident ||
                 t.kind == Token::LParen) {
        // Implicit multiplication by juxtaposition: `2 x1`, `x1 x2`, `2(x+1)`.
        acc = acc * parse_factor();
      } else {
        return acc;
      }
    }
  }

  Polynomial parse_factor() {
    const Token& t = lexer_.peek();
    if (t.kind == Token::Minus) {
      lexer_.take();
      return -parse_factor();
    }
    Polynomial base = parse_primary();
    if (lexer_.peek().kind == Token::Caret) {
      lexer_.take();
      const Token exp = lexer_.take();
      if (exp.kind != Token::Number || exp.number != std::floor(exp.number) ||
          exp.number < 0) {
        throw PolyParseError(exp.pos, "exponent must be a nonnegative integer");
      }
      base = base.pow(static_cast<int>(exp.number));
    }
    return base;
  }

  Polynomial parse_primary() {
    Token t = lexer_.take();
    switch (t.kind) {
      case Token::Number:
        return Polynomial::constant(nvars_, t.number);
      case Token::Ident: {
        for (int i = 0; i < nvars_; ++i) {
          if (names_[static_cast<std::size_t>(i)] == t.ident) {
            return Polynomial::variable(nvars_, i);
          }
        }
        throw PolyParseError(t.pos, "unknown identifier '" + t.ident + "'");
      }
      case Token::LParen: {
        Polynomial inner = parse_expr();
        const Token close = lexer_.take();
        if (close.kind != Token::RParen) {
          throw PolyParseError(close.pos, "expected ')'");
        }
        return inner;
      }
      default:
        throw PolyParseError(t.pos, "expected a number, variable, or '('");
    }
  }

  Lexer lexer_;
  const std::vector<std::string>& names_;
  int nvars_;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text,
                            const std::vector<std::string>& var_names) {
  ExprParser parser(text, var_names);
  return parser.parse();
}

}  // namespace volopt
