#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "volopt/apps.hpp"
#include "volopt/mc.hpp"
#include "volopt/volume.hpp"

using namespace volopt;

namespace {

// The Example-1 system: dx1 = -x2, dx2 = x1 + (4 x1^2 - 1) x2.
PolynomialDynamics roa_dynamics() {
  PolynomialDynamics dyn;
  dyn.mode = PolynomialDynamics::Mode::Continuous;
  dyn.n_x = 2;
  dyn.f = {parse_polynomial("0 - x2", {"x1", "x2"}),
           parse_polynomial("x1 + 4 x1^2 x2 - x2", {"x1", "x2"})};
  return dyn;
}

// V = 3|x|^2 + 3 a1 x1 x2 + 3 a2 x1^3 x2 + 3 a3 x1 x2^3.
TemplateFunction roa_template() {
  TemplateFunction tmpl;
  tmpl.x_dim = 2;
  tmpl.a_dim = 3;
  tmpl.v = parse_polynomial("3 x1^2 + 3 x2^2 + 3 a1 x1 x2 + 3 a2 x1^3 x2 + 3 a3 x1 x2^3",
                            {"x1", "x2", "a1", "a2", "a3"});
  return tmpl;
}

std::vector<double> random_point(std::mt19937& rng, int dim, double scale = 1.0) {
  std::vector<double> pt(dim);
  for (int i = 0; i < dim; ++i)
    pt[i] = scale * (2.0 * (rng() * 0x1.0p-32) - 1.0);
  return pt;
}

// The uncertain three-state system of Example 2 with u = a . x feedback.
ProbCtrlSpec control_spec(int horizon) {
  ProbCtrlSpec spec;
  spec.dyn.mode = PolynomialDynamics::Mode::Discrete;
  spec.dyn.n_x = 3;
  spec.dyn.n_u = 1;
  spec.dyn.n_delta = 1;
  // Blocks (x1, x2, x3, u, delta).
  const std::vector<std::string> names = {"x1", "x2", "x3", "u", "dl"};
  spec.dyn.f = {parse_polynomial("dl x2", names), parse_polynomial("x1 x3", names),
                parse_polynomial("x1 - x2 + x3 + u", names)};
  spec.horizon = horizon;
  spec.a_dim = 3;
  const std::vector<std::string> ctrl_names = {"x1", "x2", "x3", "a1", "a2", "a3"};
  spec.control = {parse_polynomial("a1 x1 + a2 x2 + a3 x3", ctrl_names)};
  // Cube target of half-width 0.1 at the origin.
  const std::vector<std::string> xn = {"x1", "x2", "x3"};
  for (int i = 0; i < 3; ++i) {
    Polynomial up(3), lo(3);
    Exponent e(3, 0);
    e[i] = 1;
    up.set_coeff(Exponent(3, 0), 0.1);
    up.set_coeff(e, -1.0);
    lo.set_coeff(Exponent(3, 0), 0.1);
    lo.set_coeff(e, 1.0);
    spec.target.push_back(up);
    spec.target.push_back(lo);
  }
  // Sphere obstacle centered at (-0.5, -0.5, 0) with radius 0.3.
  spec.step_feasible = {parse_polynomial(
      "x1^2 + x2^2 + x3^2 + x1 + x2 + 0.25 + 0.25 - 0.09", xn)};
  spec.mu_x0 = MeasureSpec::uniform_box(3);
  spec.mu_delta = MeasureSpec::uniform_box({-0.2}, {0.2});
  return spec;
}

}  // namespace

TEST_SUITE("apps") {

TEST_CASE("roa problem matches the hand-derived inequalities") {
  const VolumeProblem prob = build_roa(roa_dynamics(), roa_template(), 1.0, 0.001);
  REQUIRE(prob.blocks.x_dim == 2);
  REQUIRE(prob.blocks.a_dim == 3);
  REQUIRE(prob.s1.size() == 2);
  REQUIRE(prob.s2.size() == 1);

  // Hand-derived pieces: V, 1 - V, and -eps_r |x|^2 - grad V . f with the
  // partial derivatives expanded manually.
  const std::vector<std::string> names = {"x1", "x2", "a1", "a2", "a3"};
  const Polynomial v = parse_polynomial(
      "3 x1^2 + 3 x2^2 + 3 a1 x1 x2 + 3 a2 x1^3 x2 + 3 a3 x1 x2^3", names);
  const Polynomial dv_dx1 =
      parse_polynomial("6 x1 + 3 a1 x2 + 9 a2 x1^2 x2 + 3 a3 x2^3", names);
  const Polynomial dv_dx2 =
      parse_polynomial("6 x2 + 3 a1 x1 + 3 a2 x1^3 + 9 a3 x1 x2^2", names);
  const Polynomial f1 = parse_polynomial("0 - x2", names);
  const Polynomial f2 = parse_polynomial("x1 + 4 x1^2 x2 - x2", names);
  const Polynomial vdot = dv_dx1 * f1 + dv_dx2 * f2;
  const Polynomial p21 =
      parse_polynomial("0 - 0.001 x1^2 - 0.001 x2^2", names) + vdot * -1.0;
  const Polynomial p12 = parse_polynomial("1", names) + v * -1.0;

  std::mt19937 rng(2718);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> pt = random_point(rng, 5);
    CHECK(prob.s1[0].evaluate(pt) == doctest::Approx(v.evaluate(pt)).epsilon(1e-10));
    CHECK(prob.s1[1].evaluate(pt) == doctest::Approx(p12.evaluate(pt)).epsilon(1e-10));
    CHECK(prob.s2[0].evaluate(pt) == doctest::Approx(p21.evaluate(pt)).epsilon(1e-10));
  }
}

TEST_CASE("lyapunov derivative at a=0 matches the closed form") {
  const VolumeProblem prob = build_roa(roa_dynamics(), roa_template(), 1.0, 0.001);
  // At a = 0: Vdot = 6 x2^2 (4 x1^2 - 1), so P21 = -0.001|x|^2 - Vdot.
  std::mt19937 rng(31);
  for (int k = 0; k < 25; ++k) {
    std::vector<double> pt = random_point(rng, 5);
    pt[2] = pt[3] = pt[4] = 0.0;
    const double vdot = 6.0 * pt[1] * pt[1] * (4.0 * pt[0] * pt[0] - 1.0);
    const double expected = -0.001 * (pt[0] * pt[0] + pt[1] * pt[1]) - vdot;
    CHECK(prob.s2[0].evaluate(pt) == doctest::Approx(expected).epsilon(1e-12));
  }

  // Finite differences confirm the symbolic chain rule on the joint V.
  const Polynomial v = roa_template().v;
  const Polynomial d1 = v.differentiate(0);
  std::mt19937 rng2(32);
  for (double h : {1e-3, 1e-4}) {
    const std::vector<double> pt = random_point(rng2, 5, 0.8);
    std::vector<double> plus = pt, minus = pt;
    plus[0] += h;
    minus[0] -= h;
    const double fd = (v.evaluate(plus) - v.evaluate(minus)) / (2.0 * h);
    CHECK(std::abs(fd - d1.evaluate(pt)) <= 50.0 * h * h);
  }
}

TEST_CASE("zero-parameter template cuts the radius 1/sqrt(3) disk") {
  const VolumeProblem prob = build_roa(roa_dynamics(), roa_template(), 1.0, 0.001);
  // S1(0) = {0 <= 3|x|^2 <= 1}: inside at |x| < 1/sqrt(3), outside beyond.
  const double r = 1.0 / std::sqrt(3.0);
  const std::vector<double> inside = {0.9 * r, 0.0, 0.0, 0.0, 0.0};
  const std::vector<double> outside = {1.1 * r, 0.0, 0.0, 0.0, 0.0};
  CHECK(prob.s1[0].evaluate(inside) >= 0.0);
  CHECK(prob.s1[1].evaluate(inside) >= 0.0);
  CHECK(prob.s1[1].evaluate(outside) < 0.0);
}

TEST_CASE("discrete mode uses the difference lyapunov function") {
  PolynomialDynamics dyn;
  dyn.mode = PolynomialDynamics::Mode::Discrete;
  dyn.n_x = 1;
  dyn.f = {parse_polynomial("0.5 x1", {"x1"})};
  TemplateFunction tmpl;
  tmpl.x_dim = 1;
  tmpl.a_dim = 1;
  tmpl.v = parse_polynomial("3 x1^2 + a1 x1^2", {"x1", "a1"});

  const VolumeProblem prob = build_roa(dyn, tmpl, 1.0, 0.001);
  // dV = V(x/2) - V(x) = -(3 + a1) 0.75 x^2; P21 = -0.001 x^2 - dV.
  for (double x : {-0.8, 0.3, 1.0}) {
    for (double a : {-0.5, 0.0, 0.7}) {
      const std::vector<double> pt = {x, a};
      const double expected = -0.001 * x * x + (3.0 + a) * 0.75 * x * x;
      CHECK(prob.s2[0].evaluate(pt) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("roa rejects malformed templates and dynamics") {
  TemplateFunction bad = roa_template();
  bad.v = parse_polynomial("3 x1^2 + a1^2 x1 x2", {"x1", "x2", "a1", "a2", "a3"});
  CHECK_THROWS_AS(build_roa(roa_dynamics(), bad, 1.0, 0.001), std::invalid_argument);

  TemplateFunction offset = roa_template();
  offset.v = parse_polynomial("3 x1^2 + a1", {"x1", "x2", "a1", "a2", "a3"});
  CHECK_THROWS_AS(build_roa(roa_dynamics(), offset, 1.0, 0.001), std::invalid_argument);

  PolynomialDynamics controlled = roa_dynamics();
  controlled.n_u = 1;
  controlled.f = {parse_polynomial("u", {"x1", "x2", "u"}),
                  parse_polynomial("x1", {"x1", "x2", "u"})};
  CHECK_THROWS_AS(build_roa(controlled, roa_template(), 1.0, 0.001), std::invalid_argument);
}

TEST_CASE("invariant set of the identity map is the template set itself") {
  PolynomialDynamics dyn;
  dyn.mode = PolynomialDynamics::Mode::Discrete;
  dyn.n_x = 1;
  dyn.f = {parse_polynomial("x1", {"x1"})};
  TemplateFunction tmpl;
  tmpl.x_dim = 1;
  tmpl.a_dim = 1;
  tmpl.v = parse_polynomial("a1 - x1^2", {"x1", "a1"});

  const VolumeProblem prob = build_invariant(dyn, tmpl);
  std::mt19937 rng(7);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> pt = random_point(rng, 2);
    CHECK(prob.s2[0].evaluate(pt) == doctest::Approx(prob.s1[0].evaluate(pt)).epsilon(1e-12));
  }
}

TEST_CASE("contracting map keeps the sublevel set invariant pointwise") {
  PolynomialDynamics dyn;
  dyn.mode = PolynomialDynamics::Mode::Discrete;
  dyn.n_x = 1;
  dyn.f = {parse_polynomial("0.5 x1", {"x1"})};
  TemplateFunction tmpl;
  tmpl.x_dim = 1;
  tmpl.a_dim = 1;
  tmpl.v = parse_polynomial("a1 - x1^2", {"x1", "a1"});

  const VolumeProblem prob = build_invariant(dyn, tmpl);
  // P(f(x)) = a1 - x^2/4 >= P(x) = a1 - x^2 for every x.
  std::mt19937 rng(8);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> pt = random_point(rng, 2);
    const double pushed = prob.s2[0].evaluate(pt);
    CHECK(pushed == doctest::Approx(pt[1] - 0.25 * pt[0] * pt[0]).epsilon(1e-12));
    CHECK(pushed >= prob.s1[0].evaluate(pt) - 1e-12);
  }

  CHECK_THROWS_AS(build_invariant(roa_dynamics(), tmpl), std::invalid_argument);
}

TEST_CASE("stable linear map yields an invariant ellipse containing the origin") {
  PolynomialDynamics dyn;
  dyn.mode = PolynomialDynamics::Mode::Discrete;
  dyn.n_x = 2;
  dyn.f = {parse_polynomial("0.5 x1 + 0.1 x2", {"x1", "x2"}),
           parse_polynomial("0.5 x2", {"x1", "x2"})};
  TemplateFunction tmpl;
  tmpl.x_dim = 2;
  tmpl.a_dim = 1;
  tmpl.v = parse_polynomial("a1 - x1^2 - x2^2", {"x1", "x2", "a1"});

  VolumeProblem prob = build_invariant(dyn, tmpl);
  prob.d = 4;
  prob.eps_a = 0.05;
  prob.eps_k = 0.1;

  SolveOptions opts;
  opts.max_iter = 200000;
  const FeasibleSetCertificate cert = solve_p21d(prob, opts);
  const VolumeSolution sol = solve_p2m(prob, &cert, 3, opts);
  REQUIRE(sol.reliable);
  // The spectral norm of the map is ~0.52 < 1, so every disk is invariant and
  // the volume maximizer pushes a1 toward 1: the recovered disk has positive
  // radius and contains the origin.
  CHECK(sol.a_hat[0] >= 0.5);
  CHECK(sol.a_hat[0] <= 1.0 + 1e-6);
  const std::vector<double> origin_a = {0.0, 0.0, sol.a_hat[0]};
  CHECK(tmpl.v.evaluate(origin_a) > 0.0);
  CHECK(cert.member(sol.a_hat));
}

TEST_CASE("composition degree cap fails fast") {
  PolynomialDynamics dyn;
  dyn.mode = PolynomialDynamics::Mode::Discrete;
  dyn.n_x = 1;
  dyn.f = {parse_polynomial("x1^3", {"x1"})};
  TemplateFunction tmpl;
  tmpl.x_dim = 1;
  tmpl.a_dim = 1;
  tmpl.v = parse_polynomial("a1 x1^6 - x1^6", {"x1", "a1"});

  CHECK_THROWS_AS(build_invariant(dyn, tmpl), std::invalid_argument);  // a1 x1^18: 19 > 12
  CHECK_NOTHROW(build_invariant(dyn, tmpl, 19));
}

TEST_CASE("probctrl unrolls the paper instance to 8 inequalities of degree 8") {
  const ProbCtrlProblem built = build_probctrl(control_spec(3));
  REQUIRE(built.problem.blocks.x_dim == 4);  // (x0, delta)
  REQUIRE(built.problem.blocks.a_dim == 3);
  CHECK(built.problem.s2.empty());
  REQUIRE(built.problem.s1.size() == 8);
  int max_degree = 0;
  for (const Polynomial& p : built.problem.s1) max_degree = std::max(max_degree, p.degree());
  CHECK(max_degree == 8);
  // Uniform product measure over [-1,1]^3 x [-0.2, 0.2].
  CHECK(built.problem.mu_x.kind == MeasureSpec::Kind::UniformBox);
  CHECK(built.problem.mu_x.lower == std::vector<double>{-1.0, -1.0, -1.0, -0.2});
  CHECK(built.problem.mu_x.upper == std::vector<double>{1.0, 1.0, 1.0, 0.2});
}

TEST_CASE("symbolic unrolling agrees with step-by-step simulation") {
  const ProbCtrlSpec spec = control_spec(3);
  const ProbCtrlProblem built = build_probctrl(spec);

  std::mt19937 rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> x0 = random_point(rng, 3);
    const std::vector<double> a = random_point(rng, 3);
    const std::vector<double> delta = random_point(rng, 1, 0.2);

    const auto states = simulate_closed_loop(spec, a, x0, {}, delta);
    std::vector<double> joint = x0;
    joint.push_back(delta[0]);
    joint.insert(joint.end(), a.begin(), a.end());

    for (int k = 0; k <= 3; ++k) {
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(built.states[k][i].evaluate(joint) - states[k][i]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("unrolling is associative across horizons") {
  const ProbCtrlProblem two = build_probctrl(control_spec(2));
  const ProbCtrlProblem three = build_probctrl(control_spec(3));
  // Without disturbances the joint layout is horizon-independent, so the
  // step-k states must match coefficient for coefficient.
  for (int k = 0; k <= 2; ++k) {
    for (int i = 0; i < 3; ++i) {
      const Polynomial diff = two.states[k][i] + three.states[k][i] * -1.0;
      for (const auto& [alpha, c] : diff.terms()) CHECK(std::abs(c) <= 1e-14);
    }
  }
}

TEST_CASE("whole-space target gives probability one for any feedback") {
  ProbCtrlSpec spec;
  spec.dyn.mode = PolynomialDynamics::Mode::Discrete;
  spec.dyn.n_x = 1;
  spec.dyn.n_u = 1;
  spec.dyn.f = {parse_polynomial("u", {"x1", "u"})};
  spec.horizon = 1;
  spec.a_dim = 1;
  spec.control = {parse_polynomial("a1 x1", {"x1", "a1"})};
  spec.mu_x0 = MeasureSpec::uniform_box(1);

  const ProbCtrlProblem built = build_probctrl(spec);
  REQUIRE(built.problem.s1.size() == 1);
  CHECK(built.problem.s1[0].degree() == 0);
  for (double a : {-1.0, 0.0, 0.5}) {
    const SemialgebraicSet section = at_parameters(built.problem.s1, 1, {a});
    const McEstimate est = mc_volume(section, built.problem.mu_x, SampleBudget{2000, 4});
    CHECK(est.estimate == 1.0);
  }
}

TEST_CASE("paper controller reaches the reported success probability") {
  const ProbCtrlProblem built = build_probctrl(control_spec(3));
  const std::vector<double> a_star = {-0.2820, 0.4766, -0.8602};
  const SemialgebraicSet section = at_parameters(built.problem.s1, 4, a_star);
  const McEstimate est = mc_volume(section, built.problem.mu_x, SampleBudget{100000, 12});
  CHECK(std::abs(est.estimate - 0.95) <= 0.02);
}

TEST_CASE("probctrl validates distributions and the degree cap") {
  ProbCtrlSpec spec = control_spec(3);
  spec.mu_x0 = MeasureSpec::lebesgue_box(3);  // not a probability measure
  CHECK_THROWS_AS(build_probctrl(spec), std::invalid_argument);

  CHECK_THROWS_AS(build_probctrl(control_spec(3), 6), std::invalid_argument);
}

TEST_CASE("gsos with constant target accepts every parameter") {
  VariableBlocks blocks = VariableBlocks::make(1, 1);
  const Polynomial p11 = parse_polynomial("0.25 - x1^2 - a1^2", blocks.names);
  const VolumeProblem prob =
      build_gsos(blocks, Polynomial::constant(2, 1.0), {p11});
  REQUIRE(prob.s2.size() == 1);
  CHECK(prob.s2[0].degree() == 0);
  CHECK(prob.s1.size() == 1);
}

TEST_CASE("roa expressed as gsos reproduces the builder output") {
  const VolumeProblem roa = build_roa(roa_dynamics(), roa_template(), 1.0, 0.001);
  const VolumeProblem gsos =
      build_gsos(roa.blocks, roa.s2[0], {roa.s1[0], roa.s1[1]});
  std::mt19937 rng(606);
  for (int k = 0; k < 30; ++k) {
    const std::vector<double> pt = random_point(rng, 5);
    CHECK(gsos.s1[0].evaluate(pt) == doctest::Approx(roa.s1[0].evaluate(pt)).epsilon(1e-12));
    CHECK(gsos.s1[1].evaluate(pt) == doctest::Approx(roa.s1[1].evaluate(pt)).epsilon(1e-12));
    CHECK(gsos.s2[0].evaluate(pt) == doctest::Approx(roa.s2[0].evaluate(pt)).epsilon(1e-12));
  }
}

TEST_CASE("illustrative sets as gsos solve to the direct answer") {
  VariableBlocks blocks = VariableBlocks::make(1, 1);
  const Polynomial p11 = parse_polynomial("0.25 - x1^2 - a1^2", blocks.names);
  const Polynomial p21 = parse_polynomial("0.09 - 0.8 a1 - a1^2 - x1^2", blocks.names);

  VolumeProblem direct;
  direct.blocks = blocks;
  direct.s1 = {p11};
  direct.s2 = {p21};
  direct.d = 7;
  direct.eps_a = 0.05;
  direct.eps_k = 0.1;

  VolumeProblem gsos = build_gsos(blocks, p21, {p11});
  gsos.d = 7;
  gsos.eps_a = 0.05;
  gsos.eps_k = 0.1;

  SolveOptions opts;
  opts.max_iter = 200000;
  const FeasibleSetCertificate cd = solve_p21d(direct, opts);
  const FeasibleSetCertificate cg = solve_p21d(gsos, opts);
  const VolumeSolution sd = solve_p2m(direct, &cd, 4, opts);
  const VolumeSolution sg = solve_p2m(gsos, &cg, 4, opts);
  REQUIRE(sd.reliable);
  REQUIRE(sg.reliable);
  CHECK(sd.volume_estimate == doctest::Approx(sg.volume_estimate).epsilon(1e-9));
  CHECK(sd.a_hat[0] == doctest::Approx(sg.a_hat[0]).epsilon(1e-8));
}

}  // TEST_SUITE
