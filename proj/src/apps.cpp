#include "volopt/apps.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace volopt {

namespace {

// Lift p over `inner` variables into a polynomial over `total` variables,
// with the inner block starting at `offset`.
Polynomial lift(const Polynomial& p, int total, int offset) {
  std::vector<Polynomial> subs;
  subs.reserve(p.nvars());
  for (int i = 0; i < p.nvars(); ++i) subs.push_back(Polynomial::variable(total, offset + i));
  return p.compose(subs);
}

void check_cap(const Polynomial& p, int degree_cap, const char* what) {
  if (p.degree() > degree_cap) {
    throw std::invalid_argument(std::string(what) + ": composed degree " +
                                std::to_string(p.degree()) + " exceeds the cap " +
                                std::to_string(degree_cap));
  }
}

int a_degree(const Exponent& alpha, int x_dim) {
  int deg = 0;
  for (std::size_t i = x_dim; i < alpha.size(); ++i) deg += alpha[i];
  return deg;
}

int x_degree(const Exponent& alpha, int x_dim) {
  int deg = 0;
  for (int i = 0; i < x_dim && i < static_cast<int>(alpha.size()); ++i) deg += alpha[i];
  return deg;
}

void require_affine_in_a(const Polynomial& p, int x_dim, const char* what) {
  for (const auto& [alpha, c] : p.terms()) {
    if (a_degree(alpha, x_dim) > 1) {
      throw std::invalid_argument(std::string(what) + ": template must be affine in a");
    }
  }
}

// |x|^2 over the joint (x,a) block.
Polynomial squared_norm_x(int x_dim, int joint) {
  Polynomial p(joint);
  for (int i = 0; i < x_dim; ++i) {
    Exponent alpha(joint, 0);
    alpha[i] = 2;
    p.set_coeff(alpha, 1.0);
  }
  return p;
}

}  // namespace

void PolynomialDynamics::validate() const {
  if (n_x < 1) throw std::invalid_argument("dynamics: need at least one state");
  if (n_u < 0 || n_w < 0 || n_delta < 0)
    throw std::invalid_argument("dynamics: negative block dimension");
  if (static_cast<int>(f.size()) != n_x)
    throw std::invalid_argument("dynamics: need one polynomial per state");
  for (const Polynomial& p : f) {
    if (p.nvars() != input_dim())
      throw std::invalid_argument("dynamics: polynomial over wrong variable count");
  }
}

void TemplateFunction::validate() const {
  if (x_dim < 1 || a_dim < 1)
    throw std::invalid_argument("template: needs x and a variables");
  if (v.nvars() != x_dim + a_dim)
    throw std::invalid_argument("template: polynomial over wrong variable count");
  require_affine_in_a(v, x_dim, "template");
}

VolumeProblem build_roa(const PolynomialDynamics& dyn, const TemplateFunction& tmpl,
                        double level_c, double eps_r, int degree_cap) {
  dyn.validate();
  tmpl.validate();
  if (dyn.n_u != 0 || dyn.n_w != 0 || dyn.n_delta != 0)
    throw std::invalid_argument("build_roa: dynamics must be autonomous");
  if (dyn.n_x != tmpl.x_dim)
    throw std::invalid_argument("build_roa: dynamics/template state dimension mismatch");
  // V(0, a) = 0: every term must carry at least one state power.
  for (const auto& [alpha, c] : tmpl.v.terms()) {
    if (x_degree(alpha, tmpl.x_dim) == 0)
      throw std::invalid_argument("build_roa: template must vanish at the origin");
  }

  const int n = dyn.n_x;
  const int m = tmpl.a_dim;
  const int joint = n + m;

  Polynomial dv(joint);
  if (dyn.mode == PolynomialDynamics::Mode::Continuous) {
    // dV = grad_x V . f(x); f is a-independent.
    for (int i = 0; i < n; ++i) dv += tmpl.v.differentiate(i) * lift(dyn.f[i], joint, 0);
  } else {
    // dV = V(f(x), a) - V(x, a).
    std::vector<Polynomial> subs;
    subs.reserve(joint);
    for (int i = 0; i < n; ++i) subs.push_back(lift(dyn.f[i], joint, 0));
    for (int j = 0; j < m; ++j) subs.push_back(Polynomial::variable(joint, n + j));
    dv = tmpl.v.compose(subs) + tmpl.v * -1.0;
  }
  check_cap(dv, degree_cap, "build_roa");

  VolumeProblem prob;
  prob.blocks = VariableBlocks::make(n, m);
  prob.s1 = {tmpl.v, Polynomial::constant(joint, level_c) + tmpl.v * -1.0};
  prob.s2 = {squared_norm_x(n, joint) * -eps_r + dv * -1.0};
  prob.mu_x = MeasureSpec::lebesgue_box(n);
  return prob;
}

VolumeProblem build_invariant(const PolynomialDynamics& dyn, const TemplateFunction& tmpl,
                              int degree_cap) {
  dyn.validate();
  tmpl.validate();
  if (dyn.mode != PolynomialDynamics::Mode::Discrete)
    throw std::invalid_argument("build_invariant: dynamics must be discrete");
  if (dyn.n_u != 0 || dyn.n_w != 0 || dyn.n_delta != 0)
    throw std::invalid_argument("build_invariant: dynamics must be autonomous");
  if (dyn.n_x != tmpl.x_dim)
    throw std::invalid_argument("build_invariant: dynamics/template dimension mismatch");

  const int n = dyn.n_x;
  const int m = tmpl.a_dim;
  const int joint = n + m;

  std::vector<Polynomial> subs;
  subs.reserve(joint);
  for (int i = 0; i < n; ++i) subs.push_back(lift(dyn.f[i], joint, 0));
  for (int j = 0; j < m; ++j) subs.push_back(Polynomial::variable(joint, n + j));
  Polynomial pushed = tmpl.v.compose(subs);
  check_cap(pushed, degree_cap, "build_invariant");

  VolumeProblem prob;
  prob.blocks = VariableBlocks::make(n, m);
  prob.s1 = {tmpl.v};
  prob.s2 = {std::move(pushed)};
  prob.mu_x = MeasureSpec::lebesgue_box(n);
  return prob;
}

ProbCtrlProblem build_probctrl(const ProbCtrlSpec& spec, int degree_cap) {
  spec.dyn.validate();
  if (spec.dyn.mode != PolynomialDynamics::Mode::Discrete)
    throw std::invalid_argument("build_probctrl: dynamics must be discrete");
  if (spec.horizon < 1) throw std::invalid_argument("build_probctrl: horizon must be >= 1");
  if (static_cast<int>(spec.control.size()) != spec.dyn.n_u)
    throw std::invalid_argument("build_probctrl: need one control polynomial per input");
  if (spec.a_dim < 1) throw std::invalid_argument("build_probctrl: needs parameters");

  const int n_x = spec.dyn.n_x;
  const int n_w = spec.dyn.n_w;
  const int n_delta = spec.dyn.n_delta;
  const int N = spec.horizon;
  const int m = spec.a_dim;

  for (const Polynomial& c : spec.control) {
    if (c.nvars() != n_x + m)
      throw std::invalid_argument("build_probctrl: control polynomial over wrong variables");
    require_affine_in_a(c, n_x, "build_probctrl");
  }
  for (const Polynomial& t : spec.target) {
    if (t.nvars() != n_x)
      throw std::invalid_argument("build_probctrl: target polynomial over wrong variables");
  }
  for (const Polynomial& g : spec.step_feasible) {
    if (g.nvars() != n_x)
      throw std::invalid_argument("build_probctrl: step polynomial over wrong variables");
  }

  // Joint layout: x0 | omega_0 .. omega_{N-1} | delta | a.
  const int x_dim = n_x + N * n_w + n_delta;
  const int joint = x_dim + m;
  const int omega_offset = n_x;
  const int delta_offset = n_x + N * n_w;
  const int a_offset = x_dim;

  // Assemble the sampling measure as one uniform box; probability semantics
  // require every distribution to be box-uniform.
  auto box_bounds = [](const MeasureSpec& mu, int want, const char* what) {
    mu.validate();
    if (mu.kind != MeasureSpec::Kind::UniformBox)
      throw std::invalid_argument(std::string("build_probctrl: ") + what +
                                  " distribution must be box-uniform");
    if (mu.nvars() != want)
      throw std::invalid_argument(std::string("build_probctrl: ") + what +
                                  " distribution has the wrong dimension");
    return std::make_pair(mu.lower, mu.upper);
  };

  std::vector<double> lower, upper;
  auto append = [&](const std::pair<std::vector<double>, std::vector<double>>& b) {
    lower.insert(lower.end(), b.first.begin(), b.first.end());
    upper.insert(upper.end(), b.second.begin(), b.second.end());
  };
  append(box_bounds(spec.mu_x0, n_x, "initial state"));
  if (n_w > 0) {
    if (static_cast<int>(spec.mu_w.size()) != N)
      throw std::invalid_argument("build_probctrl: need one disturbance measure per step");
    for (int k = 0; k < N; ++k) append(box_bounds(spec.mu_w[k], n_w, "disturbance"));
  }
  if (n_delta > 0) append(box_bounds(spec.mu_delta, n_delta, "parameter"));

  ProbCtrlProblem out;
  out.x0_offset = 0;
  out.omega_offset = omega_offset;
  out.delta_offset = delta_offset;

  // Unroll the closed loop symbolically.
  out.states.resize(N + 1);
  out.states[0].reserve(n_x);
  for (int i = 0; i < n_x; ++i) out.states[0].push_back(Polynomial::variable(joint, i));

  for (int k = 0; k < N; ++k) {
    // u_j(x_k, a) via the control template.
    std::vector<Polynomial> ctrl_subs;
    ctrl_subs.reserve(n_x + m);
    for (int i = 0; i < n_x; ++i) ctrl_subs.push_back(out.states[k][i]);
    for (int j = 0; j < m; ++j) ctrl_subs.push_back(Polynomial::variable(joint, a_offset + j));

    std::vector<Polynomial> f_subs;
    f_subs.reserve(spec.dyn.input_dim());
    for (int i = 0; i < n_x; ++i) f_subs.push_back(out.states[k][i]);
    for (const Polynomial& c : spec.control) f_subs.push_back(c.compose(ctrl_subs));
    for (int j = 0; j < n_w; ++j)
      f_subs.push_back(Polynomial::variable(joint, omega_offset + k * n_w + j));
    for (int j = 0; j < n_delta; ++j)
      f_subs.push_back(Polynomial::variable(joint, delta_offset + j));

    out.states[k + 1].reserve(n_x);
    for (int i = 0; i < n_x; ++i) {
      Polynomial next = spec.dyn.f[i].compose(f_subs);
      check_cap(next, degree_cap, "build_probctrl");
      out.states[k + 1].push_back(std::move(next));
    }
  }

  // S1 over (x0, omegas, delta): target at step N, feasibility at 1..N-1.
  std::vector<Polynomial> s1;
  auto at_step = [&](const Polynomial& g, int k) {
    Polynomial composed = g.compose(out.states[k]);
    check_cap(composed, degree_cap, "build_probctrl");
    return composed;
  };
  for (const Polynomial& t : spec.target) s1.push_back(at_step(t, N));
  for (int k = 1; k < N; ++k)
    for (const Polynomial& g : spec.step_feasible) s1.push_back(at_step(g, k));
  if (s1.empty()) s1.push_back(Polynomial::constant(joint, 1.0));  // whole-space target

  out.problem.blocks = VariableBlocks::make(x_dim, m);
  out.problem.s1 = std::move(s1);
  out.problem.s2 = {};  // whole space: no feasible-set stage
  out.problem.mu_x = MeasureSpec::uniform_box(std::move(lower), std::move(upper));
  return out;
}

std::vector<std::vector<double>> simulate_closed_loop(
    const ProbCtrlSpec& spec, const std::vector<double>& a, const std::vector<double>& x0,
    const std::vector<std::vector<double>>& omegas, const std::vector<double>& delta) {
  spec.dyn.validate();
  const int n_x = spec.dyn.n_x;
  if (static_cast<int>(x0.size()) != n_x)
    throw std::invalid_argument("simulate: initial state dimension mismatch");
  if (static_cast<int>(a.size()) != spec.a_dim)
    throw std::invalid_argument("simulate: parameter dimension mismatch");
  if (static_cast<int>(delta.size()) != spec.dyn.n_delta)
    throw std::invalid_argument("simulate: delta dimension mismatch");
  if (spec.dyn.n_w > 0 && static_cast<int>(omegas.size()) < spec.horizon)
    throw std::invalid_argument("simulate: need one disturbance per step");

  std::vector<std::vector<double>> states;
  states.push_back(x0);
  for (int k = 0; k < spec.horizon; ++k) {
    std::vector<double> ctrl_pt = states[k];
    ctrl_pt.insert(ctrl_pt.end(), a.begin(), a.end());

    std::vector<double> f_pt = states[k];
    for (const Polynomial& c : spec.control) f_pt.push_back(c.evaluate(ctrl_pt));
    if (spec.dyn.n_w > 0) f_pt.insert(f_pt.end(), omegas[k].begin(), omegas[k].end());
    f_pt.insert(f_pt.end(), delta.begin(), delta.end());

    std::vector<double> next(n_x);
    for (int i = 0; i < n_x; ++i) next[i] = spec.dyn.f[i].evaluate(f_pt);
    states.push_back(std::move(next));
  }
  return states;
}

VolumeProblem build_gsos(const VariableBlocks& blocks, const Polynomial& target,
                         const std::vector<Polynomial>& s1) {
  blocks.validate();
  if (blocks.a_dim < 1) throw std::invalid_argument("build_gsos: needs parameters");
  const int joint = blocks.joint_dim();
  if (target.nvars() != joint)
    throw std::invalid_argument("build_gsos: target over wrong variables");
  for (const Polynomial& p : s1) {
    if (p.nvars() != joint)
      throw std::invalid_argument("build_gsos: S1 polynomial over wrong variables");
  }

  VolumeProblem prob;
  prob.blocks = blocks;
  prob.s1 = s1;
  prob.s2 = {target};
  prob.mu_x = MeasureSpec::lebesgue_box(blocks.x_dim);
  return prob;
}

}  // namespace volopt
