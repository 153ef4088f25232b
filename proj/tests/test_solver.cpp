#include <cmath>
#include <random>

#include "doctest.h"
#include "volopt/moments.hpp"
#include "volopt/ipm.hpp"
#include "volopt/parallel.hpp"
#include "volopt/solver.hpp"

using namespace volopt;

TEST_SUITE("solver") {

TEST_CASE("svec and smat are mutually inverse isometries") {
  std::mt19937_64 rng(3u);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k : {1, 2, 5, 9}) {
    Eigen::MatrixXd S(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = i; j < k; ++j) {
        S(i, j) = u(rng);
        S(j, i) = S(i, j);
      }
    }
    const Eigen::VectorXd v = svec(S);
    REQUIRE(v.size() == svec_len(k));
    CHECK(v.norm() == doctest::Approx(S.norm()).epsilon(1e-13));
    CHECK((smat(v, k) - S).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("psd projection clamps negative eigenvalues only") {
  Eigen::MatrixXd S(2, 2);
  S << 1.0, 0.0, 0.0, -3.0;
  const Eigen::VectorXd p = project_psd(svec(S), 2);
  Eigen::MatrixXd P = smat(p, 2);
  CHECK(P(0, 0) == doctest::Approx(1.0));
  CHECK(P(1, 1) == doctest::Approx(0.0));
  // Idempotent.
  CHECK((project_psd(p, 2) - p).norm() == doctest::Approx(0.0));
  // Already-PSD input is untouched.
  Eigen::MatrixXd Q(2, 2);
  Q << 2.0, 0.5, 0.5, 1.0;
  CHECK((smat(project_psd(svec(Q), 2), 2) - Q).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("minimize t with [[t,1],[1,t]] psd attains t = 1") {
  ProgramBuilder pb;
  const int t = pb.new_var();
  pb.set_objective(false, LinExpr::var(t));
  std::vector<LinExpr> entries(static_cast<size_t>(svec_len(2)));
  entries[static_cast<size_t>(svec_index(0, 0))] = LinExpr::var(t);
  entries[static_cast<size_t>(svec_index(0, 1))] = LinExpr(1.0);
  entries[static_cast<size_t>(svec_index(1, 1))] = LinExpr::var(t);
  pb.add_psd_block(2, entries);
  auto prog = pb.build();

  auto res = solve(prog);
  CHECK(res.report.status == SolveStatus::Optimal);
  CHECK(res.report.objective == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.report.primal_residual <= 1e-6);
  CHECK(res.report.psd_violation >= -1e-7);
}

TEST_CASE("dominated moment problem attains the full box mass") {
  // maximize y_0 s.t. M_1(y) psd and M_1(ybar - y) psd, ybar = Lebesgue[-1,1]
  // moments: the bound measure itself is optimal, y_0* = 2.
  auto ybar = box_moments(MeasureSpec::lebesgue_box(1), 2);
  ProgramBuilder pb;
  auto y = pb.new_vars(3);  // y_0, y_1, y_2
  pb.set_objective(true, LinExpr::var(y[0]));
  std::vector<LinExpr> m(static_cast<size_t>(svec_len(2)));
  m[static_cast<size_t>(svec_index(0, 0))] = LinExpr::var(y[0]);
  m[static_cast<size_t>(svec_index(0, 1))] = LinExpr::var(y[1]);
  m[static_cast<size_t>(svec_index(1, 1))] = LinExpr::var(y[2]);
  pb.add_psd_block(2, m);
  std::vector<LinExpr> dom(static_cast<size_t>(svec_len(2)));
  dom[static_cast<size_t>(svec_index(0, 0))] = LinExpr(ybar[{0}]) - LinExpr::var(y[0]);
  dom[static_cast<size_t>(svec_index(0, 1))] = LinExpr(ybar[{1}]) - LinExpr::var(y[1]);
  dom[static_cast<size_t>(svec_index(1, 1))] = LinExpr(ybar[{2}]) - LinExpr::var(y[2]);
  pb.add_psd_block(2, dom);
  auto prog = pb.build();

  auto res = solve(prog);
  CHECK(res.report.status == SolveStatus::Optimal);
  CHECK(res.report.objective == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("equality-constrained lp on the simplex") {
  ProgramBuilder pb;
  auto x = pb.new_vars(2);
  LinExpr c = LinExpr::var(x[0]) + LinExpr::var(x[1]) * 2.0;
  pb.set_objective(false, c);
  pb.add_equality(LinExpr::var(x[0]) + LinExpr::var(x[1]), 1.0);
  pb.add_nonneg_block({LinExpr::var(x[0]), LinExpr::var(x[1])});
  auto res = solve(pb.build());
  CHECK(res.report.status == SolveStatus::Optimal);
  CHECK(res.report.objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.gamma[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.gamma[1] == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("maximize flag flips the reported objective sense") {
  ProgramBuilder pb;
  const int x = pb.new_var();
  pb.set_objective(true, LinExpr::var(x));
  pb.add_nonneg_block({LinExpr(1.0) - LinExpr::var(x), LinExpr::var(x)});
  auto res = solve(pb.build());
  CHECK(res.report.status == SolveStatus::Optimal);
  CHECK(res.report.objective == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("identical seeds reproduce bitwise-identical iterates") {
  ProgramBuilder pb;
  const int t = pb.new_var();
  pb.set_objective(false, LinExpr::var(t));
  std::vector<LinExpr> entries(static_cast<size_t>(svec_len(2)));
  entries[static_cast<size_t>(svec_index(0, 0))] = LinExpr::var(t);
  entries[static_cast<size_t>(svec_index(0, 1))] = LinExpr(1.0);
  entries[static_cast<size_t>(svec_index(1, 1))] = LinExpr::var(t);
  pb.add_psd_block(2, entries);
  auto prog = pb.build();

  SolveOptions opts;
  opts.seed = 1234;
  auto r1 = solve(prog, opts);
  auto r2 = solve(prog, opts);
  REQUIRE(r1.gamma.size() == r2.gamma.size());
  CHECK((r1.gamma - r2.gamma).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r1.report.iterations == r2.report.iterations);

  SolveOptions other = opts;
  other.seed = 99;
  auto r3 = solve(prog, other);
  CHECK(r3.report.objective == doctest::Approx(r1.report.objective).epsilon(1e-4));
}

TEST_CASE("parallel and serial projection paths agree bitwise") {
  auto ybar = box_moments(MeasureSpec::lebesgue_box(2), 4);
  ProgramBuilder pb;
  auto y = pb.new_vars(static_cast<int>(basis_size(2, 4)));
  pb.set_objective(true, LinExpr::var(y[0]));
  const auto& basis = monomial_basis(2, 2);
  auto entry = [&](size_t i, size_t j) {
    Exponent sum(2);
    for (int v = 0; v < 2; ++v) sum[v] = basis[i][v] + basis[j][v];
    return static_cast<int>(grevlex_rank(sum)) - 1;
  };
  std::vector<LinExpr> m(static_cast<size_t>(svec_len(6))), dom(static_cast<size_t>(svec_len(6)));
  for (size_t j = 0; j < basis.size(); ++j) {
    for (size_t i = 0; i <= j; ++i) {
      const int idx = entry(i, j);
      Exponent sum(2);
      for (int v = 0; v < 2; ++v) sum[v] = basis[i][v] + basis[j][v];
      m[static_cast<size_t>(svec_index(static_cast<int>(i), static_cast<int>(j)))] =
          LinExpr::var(y[static_cast<size_t>(idx)]);
      dom[static_cast<size_t>(svec_index(static_cast<int>(i), static_cast<int>(j)))] =
          LinExpr(ybar[sum]) - LinExpr::var(y[static_cast<size_t>(idx)]);
    }
  }
  pb.add_psd_block(6, m);
  pb.add_psd_block(6, dom);
  auto prog = pb.build();

  SolveOptions opts;
  opts.max_iter = 500;  // fixed budget; compare trajectories, not convergence
  auto rp = solve(prog, opts);
  Eigen::VectorXd gp = rp.gamma;
  {
    SerialGuard serial;
    auto rs = solve(prog, opts);
    CHECK((rs.gamma - gp).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("infeasible program is reported as infeasible-suspected") {
  ProgramBuilder pb;
  const int x = pb.new_var();
  pb.set_objective(false, LinExpr::var(x));
  pb.add_equality(LinExpr::var(x), -1.0);
  pb.add_nonneg_block({LinExpr::var(x)});
  SolveOptions opts;
  opts.max_iter = 40000;
  auto res = solve(pb.build(), opts);
  CHECK(res.report.status == SolveStatus::InfeasibleSuspected);
}

TEST_CASE("divergence is reported as max-iterations, never a crash") {
  // Unbounded below: minimize -x with x >= 0 only.
  ProgramBuilder pb;
  const int x = pb.new_var();
  pb.set_objective(false, LinExpr::var(x) * -1.0);
  pb.add_nonneg_block({LinExpr::var(x)});
  SolveOptions opts;
  opts.max_iter = 2000;
  auto res = solve(pb.build(), opts);
  CHECK(res.report.status == SolveStatus::MaxIterations);
  CHECK(res.report.iterations == 2000);
}

TEST_CASE("residuals recompute exactly from program data") {
  ProgramBuilder pb;
  auto x = pb.new_vars(2);
  pb.set_objective(false, LinExpr::var(x[0]));
  pb.add_equality(LinExpr::var(x[0]) + LinExpr::var(x[1]) * 2.0, 3.0);
  std::vector<LinExpr> entries(static_cast<size_t>(svec_len(2)));
  entries[static_cast<size_t>(svec_index(0, 0))] = LinExpr::var(x[0]);
  entries[static_cast<size_t>(svec_index(0, 1))] = LinExpr::var(x[1]);
  entries[static_cast<size_t>(svec_index(1, 1))] = LinExpr(2.0);
  pb.add_psd_block(2, entries);
  auto prog = pb.build();

  Eigen::VectorXd gamma(2);
  gamma << 1.0, 0.5;
  auto r = residuals(prog, gamma);
  CHECK(r.primal == doctest::Approx(std::abs(1.0 + 2.0 * 0.5 - 3.0)).epsilon(1e-15));
  Eigen::MatrixXd S(2, 2);
  S << 1.0, 0.5, 0.5, 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  CHECK(r.psd_violation == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-13));
  CHECK_THROWS_AS(residuals(prog, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("builder gram handles give symmetric variable lookup") {
  ProgramBuilder pb;
  auto g = pb.add_gram(3);
  CHECK(g(0, 2) == g(2, 0));
  CHECK(g(1, 1) != g(0, 0));
  CHECK(pb.num_vars() == 6);
  // Pin the gram to a known PSD matrix via equalities and solve feasibility.
  pb.set_objective(false, LinExpr(0.0));
  Eigen::MatrixXd target(3, 3);
  target << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i <= j; ++i) pb.add_equality(LinExpr::var(g(i, j)), target(i, j));
  }
  auto res = solve(pb.build());
  CHECK(res.report.status == SolveStatus::Optimal);
  CHECK(res.gamma[g(0, 1)] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("program validation rejects malformed data") {
  ConicProgram prog;
  prog.num_vars = 1;
  prog.c = Eigen::VectorXd::Zero(1);
  prog.A.resize(0, 1);
  prog.b.resize(0);
  CHECK_THROWS_AS(prog.validate(), std::invalid_argument);  // no constraints

  ProgramBuilder pb;
  const int x = pb.new_var();
  pb.set_objective(false, LinExpr::var(x));
  pb.add_nonneg_block({LinExpr::var(x)});
  auto ok = pb.build();
  ok.c[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ok.validate(), std::invalid_argument);
}

TEST_CASE("backend registry dispatches by name") {
  ProgramBuilder pb;
  const int x = pb.new_var();
  pb.set_objective(true, LinExpr::var(x));
  pb.add_nonneg_block({LinExpr(1.0) - LinExpr::var(x)});
  auto prog = pb.build();

  auto names = backend_names();
  CHECK(std::find(names.begin(), names.end(), "admm") != names.end());
  auto res = solve_with("admm", prog);
  CHECK(res.report.objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(solve_with("nope", prog), std::invalid_argument);

  register_backend("fixed", [](const ConicProgram& p, const SolveOptions&) {
    SolveResult r;
    r.gamma = Eigen::VectorXd::Zero(p.num_vars);
    r.report.status = SolveStatus::Optimal;
    r.report.objective = 42.0;
    return r;
  });
  CHECK(solve_with("fixed", prog).report.objective == doctest::Approx(42.0));
}

TEST_CASE("status strings match the documented set") {
  CHECK(std::string(to_string(SolveStatus::Optimal)) == "optimal");
  CHECK(std::string(to_string(SolveStatus::MaxIterations)) == "max-iterations");
  CHECK(std::string(to_string(SolveStatus::InfeasibleSuspected)) == "infeasible-suspected");
}

namespace {

// max gamma1 s.t. gamma1 + gamma2 = 3, gamma2 - 1 >= 0, diag(gamma1, gamma2)
// psd: optimum gamma = (2, 1).
ConicProgram mixed_reference_program() {
  ProgramBuilder pb;
  auto g = pb.new_vars(2);
  pb.set_objective(true, LinExpr::var(g[0]));
  pb.add_equality(LinExpr::var(g[0]) + LinExpr::var(g[1]), 3.0);
  pb.add_nonneg_block({LinExpr::var(g[1]) - LinExpr(1.0)});
  std::vector<LinExpr> entries(static_cast<size_t>(svec_len(2)));
  entries[static_cast<size_t>(svec_index(0, 0))] = LinExpr::var(g[0]);
  entries[static_cast<size_t>(svec_index(1, 1))] = LinExpr::var(g[1]);
  pb.add_psd_block(2, entries);
  return pb.build();
}

}  // namespace

TEST_CASE("interior-point backend reaches tight accuracy on mixed cones") {
  auto prog = mixed_reference_program();
  auto res = solve_ipm(prog);
  CHECK(res.report.status == SolveStatus::Optimal);
  CHECK(res.report.objective == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(res.gamma[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(res.gamma[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(res.report.primal_residual <= 1e-6);
  CHECK(res.report.psd_violation >= -1e-7);
  CHECK(res.report.iterations < 60);
}

TEST_CASE("interior-point and first-order backends agree") {
  // Pure-SDP instance (no equalities): minimize t with [[t,1],[1,t]] psd.
  ProgramBuilder pb;
  const int t = pb.new_var();
  pb.set_objective(false, LinExpr::var(t));
  std::vector<LinExpr> entries(static_cast<size_t>(svec_len(2)));
  entries[static_cast<size_t>(svec_index(0, 0))] = LinExpr::var(t);
  entries[static_cast<size_t>(svec_index(0, 1))] = LinExpr(1.0);
  entries[static_cast<size_t>(svec_index(1, 1))] = LinExpr::var(t);
  pb.add_psd_block(2, entries);
  auto prog = pb.build();

  auto fo = solve(prog);
  auto ip = solve_ipm(prog);
  CHECK(ip.report.status == SolveStatus::Optimal);
  // The optimal matrix [[1,1],[1,1]] is singular, so the duality-gap exit
  // bounds the attainable digits here.
  CHECK(ip.report.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(ip.report.objective == doctest::Approx(fo.report.objective).epsilon(1e-4));
}

TEST_CASE("interior-point backend is deterministic") {
  auto prog = mixed_reference_program();
  auto r1 = solve_ipm(prog);
  auto r2 = solve_ipm(prog);
  CHECK((r1.gamma - r2.gamma).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r1.report.iterations == r2.report.iterations);
}

TEST_CASE("suitability gate sizes the dense newton system") {
  CHECK(ipm_suitable(mixed_reference_program()));
  // A variable count past the dense-factorization envelope must be refused.
  ProgramBuilder pb;
  auto xs = pb.new_vars(3100);
  pb.set_objective(false, LinExpr::var(xs[0]));
  std::vector<LinExpr> nn;
  nn.reserve(xs.size());
  for (int v : xs) nn.push_back(LinExpr::var(v));
  pb.add_nonneg_block(nn);
  const auto big = pb.build();
  CHECK_FALSE(ipm_suitable(big));
  // solve_auto falls back to the first-order method on such programs and
  // dispatches to the dense method inside the envelope.
  auto routed = solve_auto(mixed_reference_program());
  CHECK(routed.report.status == SolveStatus::Optimal);
  CHECK(routed.report.objective == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("anderson acceleration option preserves the solution and determinism") {
  auto prog = mixed_reference_program();
  SolveOptions opts;
  opts.accel_memory = 10;
  auto r1 = solve(prog, opts);
  auto r2 = solve(prog, opts);
  CHECK(r1.report.status == SolveStatus::Optimal);
  CHECK(r1.report.objective == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(r1.report.primal_residual <= 1e-6);
  CHECK((r1.gamma - r2.gamma).lpNorm<Eigen::Infinity>() == 0.0);
}

}  // TEST_SUITE
