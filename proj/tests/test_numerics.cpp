#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "oracles/gauss_width.hpp"
#include "widthlab/numerics.hpp"

using namespace widthlab;
using namespace widthlab::numerics;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("adaptive quadrature on closed-form integrals") {
  const QuadratureConfig cfg{1e-10, 50};
  CHECK(std::abs(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, kPi, cfg) - 2.0) <= 1e-10);
  CHECK(std::abs(integrate_adaptive([](double x) { return std::sin(x) * std::sin(x); }, 0.0, kPi, cfg) -
                 kPi / 2.0) <= 1e-10);
  // Berger width integrand at rho = 1 collapses to sin
  auto collapsed = [](double s) {
    const double sn = std::sin(s);
    return sn * std::sqrt((1.0 - sn * sn) + sn * sn);
  };
  CHECK(std::abs(integrate_adaptive(collapsed, 0.0, kPi, cfg) - 2.0) <= 1e-10);
}

TEST_CASE("adaptive quadrature is linear and respects symmetry") {
  const QuadratureConfig cfg{1e-10, 50};
  auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
  auto g = [](double x) { return 1.0 / (1.0 + x * x); };
  const double alpha = 2.5, beta = -0.75;
  const double lhs = integrate_adaptive([&](double x) { return alpha * f(x) + beta * g(x); }, -1.0, 2.0, cfg);
  const double rhs = alpha * integrate_adaptive(f, -1.0, 2.0, cfg) + beta * integrate_adaptive(g, -1.0, 2.0, cfg);
  CHECK(std::abs(lhs - rhs) <= 2e-10 * (1.0 + std::abs(alpha) + std::abs(beta)));

  auto even = [](double x) { return std::cosh(x - 1.0) * std::cos(x - 1.0); };
  const double whole = integrate_adaptive(even, 0.0, 2.0, cfg);
  const double half = integrate_adaptive(even, 0.0, 1.0, cfg);
  CHECK(std::abs(whole - 2.0 * half) <= 2e-10);
}

TEST_CASE("adaptive quadrature reports depth exhaustion with its best estimate") {
  const QuadratureConfig cfg{1e-14, 3};
  try {
    integrate_adaptive([](double x) { return std::sin(x); }, 0.0, kPi, cfg);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(std::abs(e.best_estimate() - 2.0) < 1e-3);
    CHECK(e.error_bound() > 0.0);
  }
}

TEST_CASE("adaptive quadrature validates its inputs") {
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 1.0, {}), ValidationError);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, {0.0, 10}), ValidationError);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, {1e-8, 0}), ValidationError);
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / x; }, 0.0, 1.0, {}), NumericalError);
}

TEST_CASE("central second difference") {
  CHECK(central_second_difference([](double x) { return x * x; }, 0.0, 0.1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(central_second_difference([](double x) { return x * x * x; }, 0.0, 0.1) == 0.0);
  CHECK_THROWS_AS(central_second_difference([](double x) { return x; }, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(central_second_difference([](double x) { return std::log(x); }, 0.0, 0.1),
                  NumericalError);

  // Berger normalized width at rho = 1 with an independent Gauss rule
  const double h = 1e-3;
  const double d2 = central_second_difference(
      [](double r) { return oracle::berger_normalized_width_gl(r); }, 1.0, h);
  CHECK(d2 > 0.0);
}

TEST_CASE("grid functions") {
  CHECK_THROWS_AS(GridFunction(std::vector<double>(4, 1.0)), ValidationError);
  CHECK_THROWS_AS(GridFunction({1.0, 2.0, NAN, 1.0, 1.0}), ValidationError);
  const auto g = GridFunction::sample([](double t) { return t; }, 5);
  CHECK(g.size() == 5);
  CHECK(g.spacing() == doctest::Approx(kPi / 4));
  CHECK(g.node(4) == kPi);
  CHECK(g[2] == doctest::Approx(kPi / 2));
}

TEST_CASE("critical points of sampled functions") {
  const auto bump = GridFunction::sample([](double t) { return std::sin(t) * std::sin(t); }, 101);
  auto cps = critical_points(bump);
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].index == 50);
  CHECK(cps[0].kind == CriticalKind::kMax);

  const auto flat = GridFunction(std::vector<double>(11, 3.0));
  cps = critical_points(flat);
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].kind == CriticalKind::kSaddleFlat);

  // sin^2 (1 + 0.3 cos)^4 against a dense scan at 1e5 nodes
  auto f = [](double t) { return std::sin(t) * std::sin(t) * std::pow(1.0 + 0.3 * std::cos(t), 4); };
  const auto g = GridFunction::sample(f, 401);
  cps = critical_points(g);
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].kind == CriticalKind::kMax);
  double best = 0.0, best_t = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double t = kPi * i / 100000.0;
    if (f(t) > best) {
      best = f(t);
      best_t = t;
    }
  }
  CHECK(std::abs(g.node(cps[0].index) - best_t) <= g.spacing());
}

TEST_CASE("critical points ignore additive constants") {
  auto f = [](double t) { return std::cos(3.0 * t) + 0.2 * std::sin(t); };
  const auto g = GridFunction::sample(f, 201);
  for (double c : {-5.0, 0.5, 100.0}) {
    const auto shifted = GridFunction::sample([&](double t) { return f(t) + c; }, 201);
    const auto a = critical_points(g);
    const auto b = critical_points(shifted);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].index == b[i].index);
      CHECK(a[i].kind == b[i].kind);
    }
  }
}

TEST_CASE("flat runs between a rise and a fall are extrema") {
  const GridFunction g({0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0, 0.5, 0.5, 1.0});
  const auto cps = critical_points(g);
  REQUIRE(cps.size() == 3);
  CHECK(cps[0].kind == CriticalKind::kMax);
  CHECK(cps[0].index == 3);
  CHECK(cps[1].kind == CriticalKind::kMin);
  CHECK(cps[1].index == 6);
  CHECK(cps[2].kind == CriticalKind::kSaddleFlat);  // rise, plateau, rise
}

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  for (std::size_t order : {1u, 2u, 5u, 8u, 96u}) {
    const auto rule = gauss_legendre(order);
    for (std::size_t deg = 0; deg < 2 * order; ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < order; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1.0);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), ValidationError);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw NumericalError("boom");
                  }),
                  NumericalError);
  setenv("WIDTHLAB_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  unsetenv("WIDTHLAB_THREADS");
}
