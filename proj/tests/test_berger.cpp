#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles/berger_volume_mc.hpp"
#include "oracles/gauss_width.hpp"
#include "widthlab/berger.hpp"

using namespace widthlab;
using namespace widthlab::berger;

namespace {
constexpr double kPi = std::numbers::pi;
const numerics::QuadratureConfig kCfg{};
const double kRoundNw = std::cbrt(16.0 / kPi);
}  // namespace

TEST_CASE("parameter must be positive") {
  CHECK_THROWS_AS(BergerParameter(0.0), ValidationError);
  CHECK_THROWS_AS(BergerParameter(-1.0), ValidationError);
  CHECK_THROWS_AS(BergerParameter{INFINITY}, ValidationError);
}

TEST_CASE("scalar curvature and Ricci sign") {
  CHECK(scalar_curvature(BergerParameter(1.0)) == 6.0);
  CHECK(scalar_curvature(BergerParameter(std::sqrt(2.0))) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(scalar_curvature(BergerParameter(2.0)) == 0.0);
  CHECK(has_positive_ricci(BergerParameter(1.0)));
  CHECK_FALSE(has_positive_ricci(BergerParameter(std::sqrt(2.0))));
  CHECK(has_positive_ricci(BergerParameter(0.01)));
  for (double rho = 0.01; rho < 3.0; rho *= 1.1) {
    const BergerParameter p(rho);
    if (has_positive_ricci(p)) CHECK(scalar_curvature(p) > 4.0);
  }
}

TEST_CASE("volume agrees with a Monte Carlo integral of the metric") {
  CHECK(volume(BergerParameter(1.0)) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-15));
  for (double rho : {0.5, 1.0, 2.0}) {
    const double mc = oracle::berger_volume_mc(rho, 200000, 7);
    CHECK(std::abs(mc / volume(BergerParameter(rho)) - 1.0) < 1e-2);
  }
}

TEST_CASE("normalized width") {
  CHECK(std::abs(normalized_width(BergerParameter(1.0), kCfg) - kRoundNw) < 1e-6);
  for (double rho : {1e-3, 0.3, 0.5, 1.7, 1e4}) {
    const double nw = normalized_width(BergerParameter(rho), kCfg);
    CHECK(std::abs(nw - oracle::berger_normalized_width_gl(rho, 20000)) < 1e-8 * nw);
  }
  CHECK(normalized_width(BergerParameter(1e-3), kCfg) > 5.0 * kRoundNw);
  CHECK(normalized_width(BergerParameter(1e4), kCfg) > 5.0 * kRoundNw);
}

TEST_CASE("width") {
  CHECK(std::abs(width(BergerParameter(1.0), kCfg) - 4.0 * kPi) < 1e-5);
  const auto r = report(BergerParameter(1.0), kCfg);
  CHECK(std::abs(r.width / std::pow(r.volume, 2.0 / 3.0) - kRoundNw) < 1e-6);
  // golden value at rho = 0.5, tol 1e-10
  const double w = width(BergerParameter(0.5), kCfg);
  CHECK(w == doctest::Approx(8.671882703345052).epsilon(1e-10));
  CHECK(std::abs(w - oracle::berger_normalized_width_gl(0.5, 20000) * std::pow(kPi * kPi, 2.0 / 3.0)) < 1e-8);
}

TEST_CASE("report fields are consistent") {
  for (double rho : {1e-2, 0.5, 1.0, 1.5, 30.0}) {
    const auto r = report(BergerParameter(rho), kCfg);
    CHECK(r.volume > 0.0);
    CHECK(r.width > 0.0);
    CHECK(std::abs(r.normalized_width - r.width / std::pow(r.volume, 2.0 / 3.0)) <= 1e-12 * r.normalized_width);
  }
}

TEST_CASE("scan") {
  const auto s = scan(1.0 / 1.1, 1.1, 3, kCfg);
  REQUIRE(s.size() == 3);
  CHECK(s[1].rho == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s[1].normalized_width < s[0].normalized_width);
  CHECK(s[1].normalized_width < s[2].normalized_width);
  CHECK_THROWS_AS(scan(1.0, 1.0, 3, kCfg), ValidationError);
  CHECK_THROWS_AS(scan(0.5, 2.0, 1, kCfg), ValidationError);

  const auto wide = scan(1e-3, 1e4, 50, kCfg);
  REQUIRE(wide.size() == 50);
  CHECK(wide.front().rho == 1e-3);
  CHECK(wide.back().rho == 1e4);
  double top = 0.0;
  for (std::size_t i = 0; i < wide.size(); ++i) {
    if (i) CHECK(wide[i].rho > wide[i - 1].rho);
    top = std::max(top, wide[i].normalized_width);
  }
  CHECK(top > 10.0 * kRoundNw);
}

TEST_CASE("normalized width diverges at both ends") {
  for (double rho = 1e-2; rho >= 1e-5; rho /= 10.0) {
    CHECK(normalized_width(BergerParameter(rho / 10.0), kCfg) > normalized_width(BergerParameter(rho), kCfg));
  }
  for (double rho = 1e2; rho <= 1e6; rho *= 10.0) {
    CHECK(normalized_width(BergerParameter(rho * 10.0), kCfg) > normalized_width(BergerParameter(rho), kCfg));
  }
}

TEST_CASE("strict local minimum at the round metric") {
  for (double h : {1e-3, 1e-2}) {
    const auto c = local_min_certificate(h, kCfg);
    CHECK(c.pass);
    CHECK(std::abs(c.first_diff) < 1e-4);
    CHECK(c.second_diff > 0.0);
    // independent second difference
    auto nw = [](double r) { return oracle::berger_normalized_width_gl(r, 20000); };
    const double d2 = (nw(1.0 - h) - 2.0 * nw(1.0) + nw(1.0 + h)) / (h * h);
    CHECK(std::abs(c.second_diff - d2) < 1e-2 * d2);
  }
  CHECK_THROWS_AS(local_min_certificate(0.6, kCfg), ValidationError);
  CHECK_THROWS_AS(local_min_certificate(0.0, kCfg), ValidationError);
}

TEST_CASE("width times scalar curvature against 24 pi") {
  const auto round = scalar_normalized_bound_check(BergerParameter(1.0), kCfg);
  CHECK(round.equality);
  CHECK(round.pass);
  CHECK(std::abs(round.product - 24.0 * kPi) < 1e-4);
  for (double rho : {0.5, 1.9}) {
    const auto c = scalar_normalized_bound_check(BergerParameter(rho), kCfg);
    CHECK(c.pass);
    CHECK_FALSE(c.equality);
  }
  CHECK_THROWS_AS(scalar_normalized_bound_check(BergerParameter(2.0), kCfg), ValidationError);

  const double step = -std::log(1e-3) / 90.0;
  for (int k = 0; k < 100; ++k) {
    const double rho = std::exp(std::log(1e-3) + k * step);
    const auto c = scalar_normalized_bound_check(BergerParameter(rho), kCfg);
    CHECK(c.pass);
    CHECK(c.equality == (k == 90));
  }
}
