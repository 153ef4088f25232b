#include "volopt/vpfile.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace volopt {

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  explicit Cursor(const std::string& t) : text(t) {}

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }

  void advance() {
    if (eof()) return;
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (!eof()) {
      const char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw VpParseError(line, col, message);
  }

  bool at_word(const std::string& w) {
    skip_ws();
    if (text.compare(pos, w.size(), w) != 0) return false;
    const std::size_t after = pos + w.size();
    if (after < text.size()) {
      const char c = text[after];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return false;
    }
    return true;
  }

  void expect_word(const std::string& w) {
    skip_ws();
    if (!at_word(w)) fail("expected '" + w + "'");
    for (std::size_t i = 0; i < w.size(); ++i) advance();
  }

  bool accept_word(const std::string& w) {
    if (!at_word(w)) return false;
    for (std::size_t i = 0; i < w.size(); ++i) advance();
    return true;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  bool accept(char c) {
    skip_ws();
    if (peek() != c) return false;
    advance();
    return true;
  }

  std::string ident() {
    skip_ws();
    if (eof() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_'))
      fail("expected an identifier");
    std::string out;
    while (!eof() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      out.push_back(peek());
      advance();
    }
    return out;
  }

  double number() {
    skip_ws();
    const char* start = text.c_str() + pos;
    char* end = nullptr;
    const double value = std::strtod(start, &end);
    if (end == start) fail("expected a number");
    for (const char* p = start; p < end; ++p) advance();
    return value;
  }

  int integer() {
    skip_ws();
    const int save_line = line, save_col = col;
    const double v = number();
    if (v != std::floor(v)) throw VpParseError(save_line, save_col, "expected an integer");
    return static_cast<int>(v);
  }

  // Raw expression text up to (not including) the next ';'; records where it
  // started so polynomial diagnostics can be mapped to file coordinates.
  std::string raw_expression(int& start_line, int& start_col) {
    skip_ws();
    start_line = line;
    start_col = col;
    std::string out;
    while (!eof() && peek() != ';' && peek() != '}') {
      if (peek() == '#') {
        while (!eof() && peek() != '\n') advance();
        continue;
      }
      out.push_back(peek());
      advance();
    }
    if (eof() || peek() == '}') fail("expected ';' after expression");
    return out;
  }
};

// Position of `offset` within `raw` relative to its file location.
std::pair<int, int> offset_position(const std::string& raw, std::size_t offset, int line,
                                    int col) {
  for (std::size_t i = 0; i < offset && i < raw.size(); ++i) {
    if (raw[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Polynomial parse_expr(const std::string& raw, int line, int col,
                      const std::vector<std::string>& names) {
  try {
    return parse_polynomial(raw, names);
  } catch (const PolyParseError& err) {
    const auto [l, c] = offset_position(raw, err.offset, line, col);
    throw VpParseError(l, c, err.what());
  }
}

// `expr >= 0` inside set-style blocks.
Polynomial parse_inequality(Cursor& cur, const std::vector<std::string>& names) {
  int line = 0, col = 0;
  std::string raw = cur.raw_expression(line, col);
  const std::size_t ge = raw.rfind(">=");
  if (ge == std::string::npos) cur.fail("inequality must end with '>= 0'");
  std::string rhs = raw.substr(ge + 2);
  rhs.erase(0, rhs.find_first_not_of(" \t\r\n"));
  rhs.erase(rhs.find_last_not_of(" \t\r\n") + 1);
  if (rhs != "0") {
    const auto [l, c] = offset_position(raw, ge, line, col);
    throw VpParseError(l, c, "inequalities must be of the form 'poly >= 0'");
  }
  Polynomial p = parse_expr(raw.substr(0, ge), line, col, names);
  cur.expect(';');
  return p;
}

std::vector<std::string> indexed_names(const std::string& base, int count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (int i = 1; i <= count; ++i) names.push_back(base + std::to_string(i));
  return names;
}

struct BoxDecl {
  double lo = 0.0;
  double hi = 0.0;
};

// `[lo, hi]` with an optional `^k` replication suffix.
BoxDecl parse_box(Cursor& cur, int expect_power) {
  BoxDecl box;
  cur.expect('[');
  box.lo = cur.number();
  cur.expect(',');
  box.hi = cur.number();
  cur.expect(']');
  if (cur.accept('^')) {
    const int k = cur.integer();
    if (k != expect_power) cur.fail("box power does not match the declared dimension");
  }
  if (!(box.lo < box.hi)) cur.fail("box lower bound must be below the upper bound");
  return box;
}

std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that round-trips.
  for (int prec = 1; prec <= 16; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

// ---- application blocks ------------------------------------------------

void parse_roa_block(Cursor& cur, ProblemFile& out) {
  cur.expect('{');
  const auto x_names = indexed_names("x", out.blocks.x_dim);
  std::map<int, Polynomial> f;
  bool have_v = false;
  out.dynamics.mode = PolynomialDynamics::Mode::Continuous;

  while (!cur.accept('}')) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated roa block");
    if (cur.accept_word("continuous")) {
      out.dynamics.mode = PolynomialDynamics::Mode::Continuous;
      cur.expect(';');
    } else if (cur.accept_word("discrete")) {
      out.dynamics.mode = PolynomialDynamics::Mode::Discrete;
      cur.expect(';');
    } else if (cur.accept_word("level_c")) {
      cur.expect('=');
      out.level_c = cur.number();
      cur.expect(';');
    } else if (cur.accept_word("eps_r")) {
      cur.expect('=');
      out.eps_r = cur.number();
      cur.expect(';');
    } else if (cur.accept_word("V")) {
      cur.expect('=');
      int line = 0, col = 0;
      const std::string raw = cur.raw_expression(line, col);
      out.tmpl.v = parse_expr(raw, line, col, out.blocks.names);
      cur.expect(';');
      have_v = true;
    } else {
      const int at_line = cur.line, at_col = cur.col;
      const std::string key = cur.ident();
      if (key.size() > 1 && key[0] == 'f') {
        const int idx = std::atoi(key.c_str() + 1);
        cur.expect('=');
        int line = 0, col = 0;
        const std::string raw = cur.raw_expression(line, col);
        f.emplace(idx, parse_expr(raw, line, col, x_names));
        cur.expect(';');
      } else {
        throw VpParseError(at_line, at_col, "unknown roa statement '" + key + "'");
      }
    }
  }

  if (!have_v) cur.fail("roa block requires a template 'V = ...;'");
  if (static_cast<int>(f.size()) != out.blocks.x_dim)
    cur.fail("roa block requires one dynamics equation per state");
  out.dynamics.n_x = out.blocks.x_dim;
  out.dynamics.f.clear();
  for (int i = 1; i <= out.blocks.x_dim; ++i) {
    auto it = f.find(i);
    if (it == f.end()) cur.fail("missing dynamics equation f" + std::to_string(i));
    out.dynamics.f.push_back(it->second);
  }
  out.tmpl.x_dim = out.blocks.x_dim;
  out.tmpl.a_dim = out.blocks.a_dim;
}

void parse_invariant_block(Cursor& cur, ProblemFile& out) {
  cur.expect('{');
  const auto x_names = indexed_names("x", out.blocks.x_dim);
  std::map<int, Polynomial> f;
  bool have_p = false;
  out.dynamics.mode = PolynomialDynamics::Mode::Discrete;

  while (!cur.accept('}')) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated invariant block");
    if (cur.accept_word("discrete")) {
      cur.expect(';');
    } else if (cur.accept_word("P")) {
      cur.expect('=');
      int line = 0, col = 0;
      const std::string raw = cur.raw_expression(line, col);
      out.tmpl.v = parse_expr(raw, line, col, out.blocks.names);
      cur.expect(';');
      have_p = true;
    } else {
      const int at_line = cur.line, at_col = cur.col;
      const std::string key = cur.ident();
      if (key.size() > 1 && key[0] == 'f') {
        const int idx = std::atoi(key.c_str() + 1);
        cur.expect('=');
        int line = 0, col = 0;
        const std::string raw = cur.raw_expression(line, col);
        f.emplace(idx, parse_expr(raw, line, col, x_names));
        cur.expect(';');
      } else {
        throw VpParseError(at_line, at_col, "unknown invariant statement '" + key + "'");
      }
    }
  }

  if (!have_p) cur.fail("invariant block requires a template 'P = ...;'");
  if (static_cast<int>(f.size()) != out.blocks.x_dim)
    cur.fail("invariant block requires one map equation per state");
  out.dynamics.n_x = out.blocks.x_dim;
  out.dynamics.f.clear();
  for (int i = 1; i <= out.blocks.x_dim; ++i) {
    auto it = f.find(i);
    if (it == f.end()) cur.fail("missing map equation f" + std::to_string(i));
    out.dynamics.f.push_back(it->second);
  }
  out.tmpl.x_dim = out.blocks.x_dim;
  out.tmpl.a_dim = out.blocks.a_dim;
}

void parse_probctrl_block(Cursor& cur, ProblemFile& out) {
  cur.expect('{');
  const int n_x = out.blocks.x_dim;
  const int m = out.blocks.a_dim;
  const auto x_names = indexed_names("x", n_x);
  const auto a_names = indexed_names("a", m);

  struct RawExpr {
    std::string text;
    int line = 0, col = 0;
  };
  std::map<int, RawExpr> f_raw, u_raw;
  std::vector<std::pair<std::string, BoxDecl>> deltas;
  std::vector<RawExpr> target_raw, step_raw;
  int horizon = 3;

  // First pass gathers raw statements; expressions are parsed once the
  // control/disturbance dimensions (and so the name table) are known.
  while (!cur.accept('}')) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated probctrl block");
    if (cur.accept_word("horizon")) {
      cur.expect('=');
      horizon = cur.integer();
      cur.expect(';');
    } else if (cur.accept_word("delta")) {
      const std::string name = cur.ident();
      cur.expect_word("in");
      deltas.emplace_back(name, parse_box(cur, 1));
      cur.expect(';');
    } else if (cur.accept_word("target")) {
      cur.expect('{');
      while (!cur.accept('}')) {
        RawExpr e;
        e.text = cur.raw_expression(e.line, e.col);
        cur.expect(';');
        target_raw.push_back(std::move(e));
      }
    } else if (cur.accept_word("step")) {
      cur.expect('{');
      while (!cur.accept('}')) {
        RawExpr e;
        e.text = cur.raw_expression(e.line, e.col);
        cur.expect(';');
        step_raw.push_back(std::move(e));
      }
    } else {
      const int at_line = cur.line, at_col = cur.col;
      const std::string key = cur.ident();
      const bool is_f = key.size() > 1 && key[0] == 'f';
      const bool is_u = key.size() > 1 && key[0] == 'u';
      if (!is_f && !is_u)
        throw VpParseError(at_line, at_col, "unknown probctrl statement '" + key + "'");
      const int idx = std::atoi(key.c_str() + 1);
      cur.expect('=');
      RawExpr e;
      e.text = cur.raw_expression(e.line, e.col);
      cur.expect(';');
      (is_f ? f_raw : u_raw).emplace(idx, std::move(e));
    }
  }

  if (static_cast<int>(f_raw.size()) != n_x)
    cur.fail("probctrl block requires one dynamics equation per state");
  const int n_u = static_cast<int>(u_raw.size());
  const int n_delta = static_cast<int>(deltas.size());

  std::vector<std::string> dyn_names = x_names;
  for (int j = 1; j <= n_u; ++j) dyn_names.push_back("u" + std::to_string(j));
  for (const auto& [name, box] : deltas) dyn_names.push_back(name);
  std::vector<std::string> ctrl_names = x_names;
  ctrl_names.insert(ctrl_names.end(), a_names.begin(), a_names.end());

  ProbCtrlSpec& spec = out.probctrl;
  spec.dyn.mode = PolynomialDynamics::Mode::Discrete;
  spec.dyn.n_x = n_x;
  spec.dyn.n_u = n_u;
  spec.dyn.n_delta = n_delta;
  spec.horizon = horizon;
  spec.a_dim = m;
  spec.dyn.f.clear();
  for (int i = 1; i <= n_x; ++i) {
    auto it = f_raw.find(i);
    if (it == f_raw.end()) cur.fail("missing dynamics equation f" + std::to_string(i));
    spec.dyn.f.push_back(parse_expr(it->second.text, it->second.line, it->second.col, dyn_names));
  }
  spec.control.clear();
  for (int j = 1; j <= n_u; ++j) {
    auto it = u_raw.find(j);
    if (it == u_raw.end()) cur.fail("missing control template u" + std::to_string(j));
    spec.control.push_back(
        parse_expr(it->second.text, it->second.line, it->second.col, ctrl_names));
  }

  auto parse_ineq_raw = [&](const RawExpr& e) {
    const std::size_t ge = e.text.rfind(">=");
    if (ge == std::string::npos)
      throw VpParseError(e.line, e.col, "inequality must end with '>= 0'");
    std::string rhs = e.text.substr(ge + 2);
    rhs.erase(0, rhs.find_first_not_of(" \t\r\n"));
    rhs.erase(rhs.find_last_not_of(" \t\r\n") + 1);
    if (rhs != "0") throw VpParseError(e.line, e.col, "inequalities must be 'poly >= 0'");
    return parse_expr(e.text.substr(0, ge), e.line, e.col, x_names);
  };
  spec.target.clear();
  for (const RawExpr& e : target_raw) spec.target.push_back(parse_ineq_raw(e));
  spec.step_feasible.clear();
  for (const RawExpr& e : step_raw) spec.step_feasible.push_back(parse_ineq_raw(e));

  if (out.lebesgue) cur.fail("probctrl requires 'measure uniform on x'");
  spec.mu_x0 = MeasureSpec::uniform_box(out.x_lower, out.x_upper);
  if (n_delta > 0) {
    std::vector<double> lo, hi;
    out.delta_names.clear();
    for (const auto& [name, box] : deltas) {
      out.delta_names.push_back(name);
      lo.push_back(box.lo);
      hi.push_back(box.hi);
    }
    spec.mu_delta = MeasureSpec::uniform_box(lo, hi);
  }
}

void parse_gsos_block(Cursor& cur, ProblemFile& out) {
  cur.expect('{');
  bool have_target = false;
  while (!cur.accept('}')) {
    cur.skip_ws();
    if (cur.eof()) cur.fail("unterminated gsos block");
    cur.expect_word("target");
    cur.expect('=');
    int line = 0, col = 0;
    const std::string raw = cur.raw_expression(line, col);
    out.gsos_target = parse_expr(raw, line, col, out.blocks.names);
    cur.expect(';');
    have_target = true;
  }
  if (!have_target) cur.fail("gsos block requires 'target = ...;'");
}

}  // namespace

ProblemFile parse_vp_text(const std::string& text) {
  Cursor cur(text);
  ProblemFile out;

  cur.skip_ws();
  if (cur.eof()) cur.fail("expected 'vars' declaration");

  // vars x[n] in [lo,hi]^n;
  cur.expect_word("vars");
  const std::string x_base = cur.ident();
  cur.expect('[');
  const int n = cur.integer();
  if (n < 1) cur.fail("need at least one variable");
  cur.expect(']');
  cur.expect_word("in");
  const BoxDecl x_box = parse_box(cur, n);
  cur.expect(';');
  if (x_base != "x") cur.fail("the state block must be named 'x'");
  out.x_lower.assign(n, x_box.lo);
  out.x_upper.assign(n, x_box.hi);

  // params a[m] in [-1,1]^m;
  cur.expect_word("params");
  const std::string a_base = cur.ident();
  cur.expect('[');
  const int m = cur.integer();
  if (m < 1) cur.fail("need at least one parameter");
  cur.expect(']');
  cur.expect_word("in");
  const BoxDecl a_box = parse_box(cur, m);
  cur.expect(';');
  if (a_base != "a") cur.fail("the parameter block must be named 'a'");
  if (a_box.lo != -1.0 || a_box.hi != 1.0)
    cur.fail("the parameter box must be [-1,1] (the hierarchy normalizes A)");

  out.blocks = VariableBlocks::make(n, m);

  // measure (lebesgue|uniform) on x;
  cur.expect_word("measure");
  if (cur.accept_word("lebesgue")) {
    out.lebesgue = true;
  } else if (cur.accept_word("uniform")) {
    out.lebesgue = false;
  } else {
    cur.fail("expected 'lebesgue' or 'uniform'");
  }
  cur.expect_word("on");
  if (cur.ident() != "x") cur.fail("the measure must be declared on x");
  cur.expect(';');

  // Remaining top-level blocks in any order.
  bool have_s1 = false;
  while (true) {
    cur.skip_ws();
    if (cur.eof()) break;
    if (cur.accept_word("set")) {
      const std::string which = cur.ident();
      std::vector<Polynomial>* dest = nullptr;
      if (which == "S1") {
        dest = &out.s1;
        have_s1 = true;
      } else if (which == "S2") {
        dest = &out.s2;
      } else {
        cur.fail("expected S1 or S2");
      }
      cur.expect('{');
      while (!cur.accept('}')) {
        cur.skip_ws();
        if (cur.eof()) cur.fail("unterminated set block");
        dest->push_back(parse_inequality(cur, out.blocks.names));
      }
    } else if (cur.accept_word("options")) {
      cur.expect('{');
      while (!cur.accept('}')) {
        cur.skip_ws();
        if (cur.eof()) cur.fail("unterminated options block");
        const int at_line = cur.line, at_col = cur.col;
        const std::string key = cur.ident();
        cur.expect('=');
        if (key == "d") {
          out.d = cur.integer();
        } else if (key == "r") {
          out.r = cur.integer();
        } else if (key == "eps_a") {
          out.eps_a = cur.number();
        } else if (key == "eps_k") {
          out.eps_k = cur.number();
        } else if (key == "stage1_budget") {
          out.stage1_budget = cur.integer();
        } else {
          throw VpParseError(at_line, at_col, "unknown option '" + key + "'");
        }
        cur.expect(';');
      }
    } else if (cur.accept_word("roa")) {
      out.app = ProblemFile::Application::Roa;
      parse_roa_block(cur, out);
    } else if (cur.accept_word("invariant")) {
      out.app = ProblemFile::Application::Invariant;
      parse_invariant_block(cur, out);
    } else if (cur.accept_word("probctrl")) {
      out.app = ProblemFile::Application::ProbCtrl;
      parse_probctrl_block(cur, out);
    } else if (cur.accept_word("gsos")) {
      out.app = ProblemFile::Application::Gsos;
      parse_gsos_block(cur, out);
    } else {
      cur.fail("expected 'set', 'options', or an application block");
    }
  }

  if (out.app == ProblemFile::Application::None && !have_s1)
    cur.fail("file declares no S1 block and no application");
  if (out.app == ProblemFile::Application::Gsos && !have_s1)
    cur.fail("gsos files need a set S1 block");
  return out;
}

ProblemFile parse_vp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vp_text(buf.str());
}

VolumeProblem ProblemFile::to_problem(int degree_cap) const {
  auto measure = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    return lebesgue ? MeasureSpec::lebesgue_box(lo, hi) : MeasureSpec::uniform_box(lo, hi);
  };

  VolumeProblem prob;
  switch (app) {
    case Application::None: {
      prob.blocks = blocks;
      prob.s1 = s1;
      prob.s2 = s2;
      prob.mu_x = measure(x_lower, x_upper);
      break;
    }
    case Application::Roa: {
      prob = build_roa(dynamics, tmpl, level_c, eps_r, degree_cap);
      prob.mu_x = measure(x_lower, x_upper);
      break;
    }
    case Application::Invariant: {
      prob = build_invariant(dynamics, tmpl, degree_cap);
      prob.mu_x = measure(x_lower, x_upper);
      break;
    }
    case Application::ProbCtrl: {
      prob = build_probctrl(probctrl, degree_cap).problem;
      break;
    }
    case Application::Gsos: {
      prob = build_gsos(blocks, gsos_target, s1);
      prob.mu_x = measure(x_lower, x_upper);
      break;
    }
  }
  prob.d = d;
  prob.r = r;
  prob.eps_a = eps_a;
  prob.eps_k = eps_k;
  prob.stage1_budget = stage1_budget;
  prob.validate();
  return prob;
}

std::string format_polynomial(const Polynomial& p, const std::vector<std::string>& names) {
  if (p.terms().empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [alpha, c] : p.terms()) {
    const double mag = std::abs(c);
    std::string mono;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] == 0) continue;
      if (!mono.empty()) mono += " ";
      mono += names[i];
      if (alpha[i] > 1) mono += "^" + std::to_string(alpha[i]);
    }
    std::string body;
    if (mono.empty()) {
      body = fmt_number(mag);
    } else if (mag == 1.0) {
      body = mono;
    } else {
      body = fmt_number(mag) + " " + mono;
    }
    if (first) {
      out = (c < 0 ? "-" : "") + body;
      first = false;
    } else {
      out += (c < 0 ? " - " : " + ") + body;
    }
  }
  return out;
}

std::string format_vp(const ProblemFile& file) {
  std::ostringstream out;
  const int n = file.blocks.x_dim;
  const int m = file.blocks.a_dim;
  out << "vars x[" << n << "] in [" << fmt_number(file.x_lower[0]) << ","
      << fmt_number(file.x_upper[0]) << "]^" << n << ";\n";
  out << "params a[" << m << "] in [-1,1]^" << m << ";\n";
  out << "measure " << (file.lebesgue ? "lebesgue" : "uniform") << " on x;\n";

  const auto x_names = indexed_names("x", n);
  auto emit_set = [&](const char* name, const std::vector<Polynomial>& polys) {
    out << "set " << name << " {\n";
    for (const Polynomial& p : polys)
      out << "  " << format_polynomial(p, file.blocks.names) << " >= 0;\n";
    out << "}\n";
  };

  switch (file.app) {
    case ProblemFile::Application::None: {
      emit_set("S1", file.s1);
      if (!file.s2.empty()) emit_set("S2", file.s2);
      break;
    }
    case ProblemFile::Application::Roa: {
      out << "roa {\n  "
          << (file.dynamics.mode == PolynomialDynamics::Mode::Continuous ? "continuous"
                                                                         : "discrete")
          << ";\n";
      for (int i = 0; i < n; ++i)
        out << "  f" << (i + 1) << " = " << format_polynomial(file.dynamics.f[i], x_names)
            << ";\n";
      out << "  V = " << format_polynomial(file.tmpl.v, file.blocks.names) << ";\n";
      out << "  level_c = " << fmt_number(file.level_c) << ";\n";
      out << "  eps_r = " << fmt_number(file.eps_r) << ";\n";
      out << "}\n";
      break;
    }
    case ProblemFile::Application::Invariant: {
      out << "invariant {\n  discrete;\n";
      for (int i = 0; i < n; ++i)
        out << "  f" << (i + 1) << " = " << format_polynomial(file.dynamics.f[i], x_names)
            << ";\n";
      out << "  P = " << format_polynomial(file.tmpl.v, file.blocks.names) << ";\n";
      out << "}\n";
      break;
    }
    case ProblemFile::Application::ProbCtrl: {
      const ProbCtrlSpec& spec = file.probctrl;
      std::vector<std::string> dyn_names = x_names;
      for (int j = 1; j <= spec.dyn.n_u; ++j) dyn_names.push_back("u" + std::to_string(j));
      dyn_names.insert(dyn_names.end(), file.delta_names.begin(), file.delta_names.end());
      std::vector<std::string> ctrl_names = x_names;
      const auto a_names = indexed_names("a", m);
      ctrl_names.insert(ctrl_names.end(), a_names.begin(), a_names.end());

      out << "probctrl {\n";
      out << "  horizon = " << spec.horizon << ";\n";
      for (std::size_t j = 0; j < file.delta_names.size(); ++j) {
        out << "  delta " << file.delta_names[j] << " in ["
            << fmt_number(spec.mu_delta.lower[j]) << "," << fmt_number(spec.mu_delta.upper[j])
            << "];\n";
      }
      for (int j = 0; j < spec.dyn.n_u; ++j)
        out << "  u" << (j + 1) << " = " << format_polynomial(spec.control[j], ctrl_names)
            << ";\n";
      for (int i = 0; i < spec.dyn.n_x; ++i)
        out << "  f" << (i + 1) << " = " << format_polynomial(spec.dyn.f[i], dyn_names)
            << ";\n";
      out << "  target {\n";
      for (const Polynomial& p : spec.target)
        out << "    " << format_polynomial(p, x_names) << " >= 0;\n";
      out << "  }\n";
      if (!spec.step_feasible.empty()) {
        out << "  step {\n";
        for (const Polynomial& p : spec.step_feasible)
          out << "    " << format_polynomial(p, x_names) << " >= 0;\n";
        out << "  }\n";
      }
      out << "}\n";
      break;
    }
    case ProblemFile::Application::Gsos: {
      out << "gsos { target = " << format_polynomial(file.gsos_target, file.blocks.names)
          << "; }\n";
      emit_set("S1", file.s1);
      break;
    }
  }

  out << "options { d=" << file.d << "; r=" << file.r << "; eps_a=" << fmt_number(file.eps_a)
      << "; eps_k=" << fmt_number(file.eps_k);
  if (file.stage1_budget != 0) out << "; stage1_budget=" << file.stage1_budget;
  out << "; }\n";
  return out.str();
}

}  // namespace volopt
