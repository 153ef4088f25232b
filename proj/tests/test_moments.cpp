#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "volopt/moments.hpp"
#include "volopt/poly.hpp"

using namespace volopt;

namespace {

std::vector<std::vector<double>> sample_box(int n, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> pts(static_cast<size_t>(count), std::vector<double>(static_cast<size_t>(n)));
  for (auto& pt : pts) {
    for (auto& c : pt) c = u(rng);
  }
  return pts;
}

}  // namespace

TEST_SUITE("moments") {

TEST_CASE("lebesgue box closed forms on [-1,1]") {
  auto y = box_moments(MeasureSpec::lebesgue_box(1), 6);
  CHECK(y[{0}] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(y[{1}] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(y[{2}] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(y[{3}] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(y[{4}] == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
  // General formula (u^{a+1} - l^{a+1})/(a+1) against direct evaluation.
  for (int a = 0; a <= 6; ++a) {
    const double expect = (1.0 - std::pow(-1.0, a + 1)) / (a + 1);
    CHECK(y[{a}] == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("uniform box has unit mass and scaled moments") {
  auto y = box_moments(MeasureSpec::uniform_box(2), 4);
  CHECK(y[{0, 0}] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[{2, 0}] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(y[{2, 2}] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("lebesgue moment on [-1,1]^2 matches Monte Carlo quadrature") {
  // y_(2,2) = 4/9; independent 1e6-sample quadrature estimate, tol 1e-2.
  auto y = box_moments(MeasureSpec::lebesgue_box(2), 4);
  CHECK(y[{2, 2}] == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

  std::mt19937_64 rng(20260814u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double acc = 0.0;
  const int kSamples = 1000000;
  for (int k = 0; k < kSamples; ++k) {
    const double x1 = u(rng), x2 = u(rng);
    acc += x1 * x1 * x2 * x2;
  }
  const double mc = 4.0 * acc / kSamples;  // box volume times sample mean
  CHECK(std::abs(mc - y[{2, 2}]) < 1e-2);
}

TEST_CASE("non-unit boxes use the general antiderivative formula") {
  auto y = box_moments(MeasureSpec::lebesgue_box({0.0, -2.0}, {3.0, 1.0}), 3);
  CHECK(y[{0, 0}] == doctest::Approx(9.0).epsilon(1e-15));          // 3 * 3
  CHECK(y[{1, 0}] == doctest::Approx((9.0 / 2.0) * 3.0).epsilon(1e-15));
  CHECK(y[{0, 1}] == doctest::Approx(3.0 * (1.0 - 4.0) / 2.0).epsilon(1e-15));
  CHECK(y[{2, 1}] == doctest::Approx(9.0 * (-3.0 / 2.0)).epsilon(1e-15));
}

TEST_CASE("dirac moments are monomial evaluations") {
  auto y = dirac_moments({0.5, -2.0}, 3);
  CHECK(y[{0, 0}] == doctest::Approx(1.0));
  CHECK(y[{1, 0}] == doctest::Approx(0.5));
  CHECK(y[{0, 1}] == doctest::Approx(-2.0));
  CHECK(y[{2, 1}] == doctest::Approx(0.25 * -2.0));
}

TEST_CASE("product of dirac at zero with lebesgue reproduces lebesgue slots") {
  auto ya = dirac_moments({0.0}, 4);
  auto yx = box_moments(MeasureSpec::lebesgue_box(1), 4);
  auto bar = product_moments(ya, yx, 4);
  REQUIRE(bar.nvars() == 2);
  for (int b = 0; b <= 4; ++b) {
    CHECK(bar[{0, b}] == doctest::Approx(yx[{b}]).epsilon(1e-15));
  }
  // Any positive power of the dirac slot kills the entry.
  CHECK(bar[{1, 0}] == doctest::Approx(0.0));
  CHECK(bar[{2, 2}] == doctest::Approx(0.0));
  CHECK(bar[{3, 1}] == doctest::Approx(0.0));
}

TEST_CASE("product of uniform and lebesgue multiplies closed forms") {
  auto ya = box_moments(MeasureSpec::uniform_box(1), 4);
  auto yx = box_moments(MeasureSpec::lebesgue_box(1), 4);
  auto bar = product_moments(ya, yx, 4);
  CHECK(bar[{2, 2}] == doctest::Approx((1.0 / 3.0) * (2.0 / 3.0)).epsilon(1e-15));
  CHECK(bar[{0, 0}] == doctest::Approx(ya[{0}] * yx[{0}]).epsilon(1e-15));
  CHECK_THROWS_AS(product_moments(ya, yx, 5), std::invalid_argument);
}

TEST_CASE("product moments are bilinear in each input") {
  auto ya = box_moments(MeasureSpec::uniform_box(1), 4);
  auto yx = box_moments(MeasureSpec::lebesgue_box(1), 4);
  auto ya2 = ya;
  for (auto& v : ya2.values()) v *= 3.5;
  auto lhs = product_moments(ya2, yx, 4);
  auto rhs = product_moments(ya, yx, 4);
  for (std::int64_t k = 1; k <= lhs.size(); ++k) {
    CHECK(lhs.at_rank(k) == doctest::Approx(3.5 * rhs.at_rank(k)).epsilon(1e-14));
  }
}

TEST_CASE("measure dispatch handles product kind recursively") {
  auto spec = MeasureSpec::product({MeasureSpec::uniform_box(1), MeasureSpec::lebesgue_box(1)});
  CHECK(spec.nvars() == 2);
  CHECK(spec.mass() == doctest::Approx(2.0));
  auto bar = moments(spec, 4);
  CHECK(bar[{2, 2}] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("moment matrix layout matches the grevlex basis") {
  // n=2, r=2: rows/cols are 1, x1, x2, x1^2, x1 x2, x2^2.  Entry at
  // (row x1, col x2) must be y_(1,1).
  MomentSequence y(2, 4);
  const auto& basis = monomial_basis(2, 4);
  for (size_t k = 0; k < basis.size(); ++k) {
    y.at_rank(static_cast<std::int64_t>(k) + 1) = static_cast<double>(k + 1);  // distinct tags
  }
  auto M = moment_matrix(y, 2);
  REQUIRE(M.size() == 6);
  CHECK(M.mat(1, 2) == doctest::Approx(y[{1, 1}]));
  CHECK(M.mat(0, 0) == doctest::Approx(y[{0, 0}]));
  CHECK(M.mat(3, 5) == doctest::Approx(y[{2, 2}]));
  CHECK(M.mat(4, 4) == doctest::Approx(y[{2, 2}]));
  CHECK((M.mat - M.mat.transpose()).norm() == doctest::Approx(0.0));
}

TEST_CASE("dirac at origin gives rank-one moment matrix e1 e1^T") {
  auto y = dirac_moments({0.0, 0.0}, 6);
  auto M = moment_matrix(y, 3);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(M.size(), M.size());
  expect(0, 0) = 1.0;
  CHECK((M.mat - expect).norm() == doctest::Approx(0.0));
}

TEST_CASE("empirical moment matrices are PSD up to sampling slack") {
  auto pts = sample_box(2, 100000, 777u);
  auto y = empirical_moments(pts, 2, 6);
  auto M = moment_matrix(y, 3);
  CHECK(M.min_eigenvalue() >= -1e-3);
}

TEST_CASE("localizing matrix entries follow the defining sum") {
  const double b = 1.7, c = 0.3;
  MomentSequence y(2, 4);
  const auto& basis = monomial_basis(2, 4);
  std::mt19937_64 rng(5u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::int64_t k = 1; k <= y.size(); ++k) y.at_rank(k) = u(rng);
  (void)basis;

  auto names = std::vector<std::string>{"x1", "x2"};
  auto p = parse_polynomial("1.7 x1 - 0.3 x2^2", names);
  auto L = localizing_matrix(y, p, 1);
  REQUIRE(L.size() == 3);
  CHECK(L.mat(0, 0) == doctest::Approx(b * y[{1, 0}] - c * y[{0, 2}]).epsilon(1e-14));
  CHECK(L.mat(1, 2) == doctest::Approx(b * y[{2, 1}] - c * y[{1, 3}]).epsilon(1e-14));
  CHECK(L.mat(2, 2) == doctest::Approx(b * y[{1, 2}] - c * y[{0, 4}]).epsilon(1e-14));
}

TEST_CASE("localizing with the constant one equals the moment matrix") {
  auto y = box_moments(MeasureSpec::lebesgue_box(2), 6);
  auto M = moment_matrix(y, 3);
  auto L = localizing_matrix(y, Polynomial::constant(2, 1.0), 3);
  CHECK((M.mat - L.mat).norm() == doctest::Approx(0.0));
}

TEST_CASE("rejection-sampled disk measure keeps the disk localizer PSD") {
  // Samples uniform on {x in [-1,1]^2 : 0.25 - x1^2 - x2^2 >= 0}; the
  // localizing matrix of the defining polynomial must be PSD up to slack.
  std::mt19937_64 rng(4242u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> pts;
  while (pts.size() < 100000) {
    const double x1 = u(rng), x2 = u(rng);
    if (0.25 - x1 * x1 - x2 * x2 >= 0.0) pts.push_back({x1, x2});
  }
  auto y = empirical_moments(pts, 2, 6);
  auto names = std::vector<std::string>{"x1", "x2"};
  auto p = parse_polynomial("0.25 - x1^2 - x2^2", names);
  auto L = localizing_matrix(y, p, 2);
  CHECK(L.min_eigenvalue() >= -1e-3);
  auto M = moment_matrix(y, 3);
  CHECK(M.min_eigenvalue() >= -1e-3);
}

TEST_CASE("bounded-box moment sequences obey the diagonal-dominance bound") {
  // Whenever M_d(y) is PSD, |y_alpha| <= max(y_0, max_i y_{2d e_i}) + 1e-9.
  for (int n : {1, 2, 3}) {
    auto y = box_moments(MeasureSpec::uniform_box(n), 6);
    auto M = moment_matrix(y, 3);
    REQUIRE(M.min_eigenvalue() >= -1e-12);
    double bound = y.at_rank(1);
    for (int i = 0; i < n; ++i) {
      Exponent e(static_cast<size_t>(n), 0);
      e[static_cast<size_t>(i)] = 6;
      bound = std::max(bound, y[e]);
    }
    for (std::int64_t k = 1; k <= y.size(); ++k) {
      CHECK(std::abs(y.at_rank(k)) <= bound + 1e-9);
    }
  }
}

TEST_CASE("moment and localizing constructors reject insufficient order") {
  auto y = box_moments(MeasureSpec::lebesgue_box(2), 4);
  CHECK_THROWS_AS(moment_matrix(y, 3), std::invalid_argument);
  auto p = Polynomial::variable(2, 0);
  CHECK_THROWS_AS(localizing_matrix(y, p, 2), std::invalid_argument);
  CHECK_NOTHROW(localizing_matrix(y, p, 1));
}

TEST_CASE("measure validation rejects inverted and mismatched boxes") {
  CHECK_THROWS_AS(MeasureSpec::lebesgue_box({0.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeasureSpec::lebesgue_box({0.0, 1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeasureSpec::uniform_box({2.0}, {1.0}), std::invalid_argument);
  CHECK(MeasureSpec::lebesgue_box(3).is_unit_box());
  CHECK_FALSE(MeasureSpec::lebesgue_box({0.0}, {1.0}).is_unit_box());
}

TEST_CASE("box map round-trips points and rescales polynomials") {
  auto map = BoxMap::from_bounds({0.0, -2.0}, {3.0, 1.0});
  CHECK(map.jacobian() == doctest::Approx(1.5 * 1.5));
  auto x = map.from_unit({1.0, -1.0});
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[1] == doctest::Approx(-2.0));
  auto t = map.to_unit(x);
  CHECK(t[0] == doctest::Approx(1.0));
  CHECK(t[1] == doctest::Approx(-1.0));

  // Composing p(x) with x = c + h t evaluates consistently.
  auto names = std::vector<std::string>{"x1", "x2"};
  auto p = parse_polynomial("x1^2 x2 - 0.5 x1 + 2", names);
  auto q = p.compose(map.substitution(2, 0));
  std::mt19937_64 rng(9u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> tt{u(rng), u(rng)};
    auto xx = map.from_unit(tt);
    CHECK(q.evaluate(tt) == doctest::Approx(p.evaluate(xx)).epsilon(1e-12));
  }

  CHECK(BoxMap::identity(2).is_identity());
  CHECK_FALSE(map.is_identity());
}

}  // TEST_SUITE
