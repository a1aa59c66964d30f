#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles/farkas_bruteforce.hpp"
#include "widthlab/equidist.hpp"

using namespace widthlab;
using namespace widthlab::equidist;

namespace {

MeasureFamily family(std::vector<std::vector<double>> ws) {
  MeasureFamily y;
  for (auto& w : ws) y.members.emplace_back(std::move(w));
  return y;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void check_sound(const FiniteMeasure& mu0, const MeasureFamily& Y, const MembershipCertificate& c) {
  if (c.verdict == Verdict::kMember) {
    std::vector<double> recon(mu0.size(), 0.0);
    for (const auto& [j, lambda] : c.coefficients) {
      CHECK(lambda >= 0.0);
      for (std::size_t x = 0; x < mu0.size(); ++x) recon[x] += lambda * Y.members[j][x];
    }
    double scale = 1.0;
    for (double w : mu0.weights()) scale = std::max(scale, w);
    CHECK(sup_diff(recon, mu0.weights()) <= c.tol * scale);
  } else {
    CHECK(pair(c.separating_f, mu0) > 0.0);
    for (const auto& y : Y.members) CHECK(pair(c.separating_f, y) <= 0.0);
  }
}

FiniteMeasure random_measure(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (double& x : w) x = u(rng) < 0.3 ? 0.0 : u(rng);
  w[0] += 0.1;
  return FiniteMeasure(std::move(w));
}

}  // namespace

TEST_CASE("finite measures") {
  const FiniteMeasure m({1.0, 3.0});
  CHECK(m.total_mass() == 4.0);
  CHECK(m.normalized() == std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(FiniteMeasure({1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(FiniteMeasure(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(FiniteMeasure({0.0, 0.0}).normalized(), ValidationError);
  CHECK(pair({2.0, -1.0}, m) == -1.0);
  CHECK_THROWS_AS(pair({1.0}, m), ValidationError);
  CHECK(to_string(Verdict::kMember) == "member");
  CHECK(to_string(Verdict::kNonMember) == "non_member");
}

TEST_CASE("membership on two points") {
  {
    const auto Y = family({{1.0, 1.0}});
    const FiniteMeasure mu0({3.0, 3.0});
    const auto c = cone_hull_membership(mu0, Y);
    CHECK(c.verdict == Verdict::kMember);
    REQUIRE(c.coefficients.size() == 1);
    CHECK(c.coefficients[0].first == 0);
    CHECK(std::abs(c.coefficients[0].second - 3.0) < 1e-12);
    check_sound(mu0, Y, c);
  }
  {
    const auto Y = family({{1.0, 0.0}, {0.0, 1.0}});
    const FiniteMeasure mu0({2.0, 5.0});
    const auto c = cone_hull_membership(mu0, Y);
    CHECK(c.verdict == Verdict::kMember);
    REQUIRE(c.coefficients.size() == 2);
    CHECK(std::abs(c.coefficients[0].second - 2.0) < 1e-12);
    CHECK(std::abs(c.coefficients[1].second - 5.0) < 1e-12);
  }
  {
    // (1,2) is off the ray through (1,1); any f = (-a, a) with a > 0 separates
    const auto Y = family({{1.0, 1.0}});
    const FiniteMeasure mu0({1.0, 2.0});
    const auto c = cone_hull_membership(mu0, Y);
    CHECK(c.verdict == Verdict::kNonMember);
    check_sound(mu0, Y, c);
    CHECK(c.separating_f[1] > c.separating_f[0]);
    CHECK(c.f_dot_mu0 == pair(c.separating_f, mu0));
    CHECK(c.max_f_dot_member <= 0.0);
    CHECK_FALSE(oracle::cone_member_bruteforce(mu0, Y.members));
  }
}

TEST_CASE("membership validation") {
  const FiniteMeasure mu0({1.0, 1.0});
  CHECK_THROWS_AS(cone_hull_membership(mu0, family({{0.0, 0.0}})), ValidationError);
  CHECK_THROWS_AS(cone_hull_membership(mu0, MeasureFamily{}), ValidationError);
  CHECK_THROWS_AS(cone_hull_membership(mu0, family({{1.0, 1.0, 1.0}})), ValidationError);
  CHECK_THROWS_AS(cone_hull_membership(mu0, family({{1.0, 1.0}}), 0.0), ValidationError);
  CHECK_THROWS_AS(cone_hull_membership(FiniteMeasure(std::vector<double>(65, 1.0)),
                                       family({std::vector<double>(65, 1.0)})),
                  ValidationError);
  // zero mu0 is the cone apex
  CHECK(cone_hull_membership(FiniteMeasure({0.0, 0.0}), family({{1.0, 0.0}})).verdict == Verdict::kMember);
}

TEST_CASE("membership agrees with exhaustive Farkas search") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> nd(2, 6), md(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int members = 0, non_members = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = nd(rng), m = md(rng);
    MeasureFamily Y;
    for (std::size_t j = 0; j < m; ++j) Y.members.push_back(random_measure(rng, n));
    FiniteMeasure mu0;
    if (trial % 2) {
      std::vector<double> w(n, 0.0);
      for (const auto& y : Y.members) {
        const double l = u(rng) < 0.3 ? 0.0 : u(rng);
        for (std::size_t x = 0; x < n; ++x) w[x] += l * y[x];
      }
      if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w = Y.members[0].weights();
      mu0 = FiniteMeasure(w);
    } else {
      mu0 = random_measure(rng, n);
    }
    const auto c = cone_hull_membership(mu0, Y);
    check_sound(mu0, Y, c);
    CHECK((c.verdict == Verdict::kMember) == oracle::cone_member_bruteforce(mu0, Y.members));
    (c.verdict == Verdict::kMember ? members : non_members) += 1;
  }
  CHECK(members > 50);
  CHECK(non_members > 50);
}

TEST_CASE("membership is scale equivariant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    MeasureFamily Y;
    for (int j = 0; j < 3; ++j) Y.members.push_back(random_measure(rng, 4));
    const auto mu0 = trial % 2 ? random_measure(rng, 4)
                               : FiniteMeasure({Y.members[0][0] + 2.0 * Y.members[1][0],
                                                Y.members[0][1] + 2.0 * Y.members[1][1],
                                                Y.members[0][2] + 2.0 * Y.members[1][2],
                                                Y.members[0][3] + 2.0 * Y.members[1][3]});
    const auto base = cone_hull_membership(mu0, Y).verdict;
    std::vector<double> w = mu0.weights();
    const double lambda = s(rng);
    for (double& x : w) x *= lambda;
    CHECK(cone_hull_membership(FiniteMeasure(w), Y).verdict == base);
    MeasureFamily Z;
    for (const auto& y : Y.members) {
      std::vector<double> v = y.weights();
      const double c = s(rng);
      for (double& x : v) x *= c;
      Z.members.emplace_back(v);
    }
    CHECK(cone_hull_membership(mu0, Z).verdict == base);
  }
}

TEST_CASE("condition i") {
  const auto Y = family({{1.0, 1.0}});
  const FiniteMeasure member({2.0, 2.0});
  CHECK(condition_i_predicate(member, Y, {1.0, 1.0}));
  CHECK(condition_i_predicate(member, Y, {-1.0, 0.5}));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) CHECK(condition_i_predicate(member, Y, {u(rng), u(rng)}));

  const FiniteMeasure off({1.0, 2.0});
  const auto cert = cone_hull_membership(off, Y);
  REQUIRE(cert.verdict == Verdict::kNonMember);
  const auto f0 = condition_ii_violator(off, cert.separating_f);
  CHECK(std::abs(pair(f0, off)) < 1e-12);
  CHECK(pair(f0, Y.members[0]) > 0.0);
  const double margin = pair(f0, Y.members[0]) / Y.members[0].total_mass();
  std::vector<double> g = f0;
  for (double& v : g) v -= 0.5 * margin;
  CHECK(pair(g, off) < 0.0);
  CHECK_FALSE(condition_i_predicate(off, Y, g));
  CHECK_THROWS_AS(condition_ii_violator(FiniteMeasure({0.0, 0.0}), {1.0, 1.0}), ValidationError);
}

TEST_CASE("rational approximation") {
  auto r = rational_approximation({0.5, 0.5}, 0.1);
  CHECK(r.d == 2);
  CHECK(r.c == std::vector<std::int64_t>{1, 1});

  r = rational_approximation({1.0 / 3.0, 2.0 / 3.0}, 1e-6);
  CHECK(r.d % 3 == 0);
  CHECK(r.c[0] * 3 == r.d);
  CHECK(r.c[1] * 3 == 2 * r.d);

  const double q = std::numbers::pi / 4.0;
  r = rational_approximation({q, 1.0 - q}, 1e-4);
  CHECK(std::abs(q - double(r.c[0]) / double(r.d)) < 5e-5);
  CHECK(std::abs(1.0 - q - double(r.c[1]) / double(r.d)) < 5e-5);
  // minimality of d by brute force
  for (std::int64_t d = 1; d < r.d; ++d) {
    bool ok = true;
    for (double a : {q, 1.0 - q}) {
      const auto c = std::max<std::int64_t>(1, std::llround(a * d));
      ok = ok && std::abs(a - double(c) / double(d)) < 5e-5;
    }
    CHECK_FALSE(ok);
  }

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1e-3, 3.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a{u(rng), u(rng), u(rng)};
    const auto s = rational_approximation(a, 1e-3);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(s.c[k] >= 1);
      CHECK(std::abs(a[k] - double(s.c[k]) / double(s.d)) < 1e-3 / 3.0);
    }
  }
  CHECK_THROWS_AS(rational_approximation({}, 0.1), ValidationError);
  CHECK_THROWS_AS(rational_approximation({0.5, 0.0}, 0.1), ValidationError);
  CHECK_THROWS_AS(rational_approximation({0.5}, 0.0), ValidationError);
}

TEST_CASE("Cesaro sequences") {
  {
    const FiniteMeasure mu0({1.0, 2.0, 3.0});
    const auto Y = family({{1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0}});
    const auto t = cesaro_sequence(mu0, Y, 50);
    REQUIRE(t.sequence.size() == 50);
    for (double e : t.cesaro_errors) CHECK(e < 1e-15);
  }
  {
    const FiniteMeasure mu0({1.0, 1.0});
    const auto Y = family({{1.0, 0.0}, {0.0, 1.0}});
    const auto t = cesaro_sequence(mu0, Y, 10000);
    REQUIRE(t.sequence.size() == 10000);
    REQUIRE(t.cesaro_errors.size() == 10000);
    for (std::size_t k = 0; k < 10000; ++k) {
      CHECK(t.sequence[k] == k % 2);
      // alternating means: 1/2 at odd k, exact at even k
      const double expect = (k % 2 == 0) ? 0.5 / double(k + 1) : 0.0;
      CHECK(std::abs(t.cesaro_errors[k] - expect) < 1e-12);
    }
    CHECK(t.cesaro_errors.back() < 1e-3);
  }
  CHECK_THROWS_AS(cesaro_sequence(FiniteMeasure({1.0, 2.0}), family({{1.0, 1.0}}), 10), ValidationError);
  CHECK_THROWS_AS(cesaro_sequence(FiniteMeasure({1.0, 1.0}), family({{1.0, 1.0}}), 0), ValidationError);
}

TEST_CASE("Cesaro means of random member instances converge") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MeasureFamily Y;
    for (int j = 0; j < 4; ++j) Y.members.push_back(random_measure(rng, 5));
    std::vector<double> w(5, 0.0);
    for (const auto& y : Y.members) {
      const double l = u(rng);
      for (std::size_t x = 0; x < 5; ++x) w[x] += l * y[x];
    }
    const auto t = cesaro_sequence(FiniteMeasure(w), Y, 10000);
    CHECK(t.cesaro_errors.back() < 5e-2);
    for (double e : t.cesaro_errors) CHECK(e >= 0.0);
  }
}

TEST_CASE("normalization: the mean of the constant 1 is 1") {
  const FiniteMeasure mu0({0.2, 0.5, 0.3});
  const auto Y = family({{1.0, 0.0, 0.0}, {0.0, 2.0, 1.0}, {0.5, 0.5, 0.5}});
  const auto t = cesaro_sequence(mu0, Y, 200);
  std::vector<double> mean(3, 0.0);
  for (std::size_t k = 0; k < t.sequence.size(); ++k) {
    const auto nm = Y.members[t.sequence[k]].normalized();
    for (std::size_t x = 0; x < 3; ++x) mean[x] += (nm[x] - mean[x]) / double(k + 1);
    CHECK(std::abs(mean[0] + mean[1] + mean[2] - 1.0) < 1e-14);
  }
}

TEST_CASE("weighted Cesaro over a structured family") {
  {
    const FiniteMeasure mu0({1.0, 3.0});
    MeasureFamily Y = family({{2.5, 7.5}});
    Y.structure = Structure{{FiniteMeasure({2.5, 7.5})}, 1, 1.0, 20.0};
    const auto t = weighted_cesaro_structured(mu0, Y, 100);
    for (double e : t.cesaro_errors) CHECK(e < 1e-15);
  }
  {
    // two atoms of masses 1 and 3, mu0 a conic mix of them
    const FiniteMeasure a({1.0, 0.0}), b({0.0, 3.0});
    MeasureFamily Y = family({{1.0, 0.0}, {0.0, 3.0}, {1.0, 3.0}, {2.0, 3.0}});
    Y.structure = Structure{{a, b}, 2, 0.5, 4.0};
    CHECK_NOTHROW(Y.validate());
    const FiniteMeasure mu0({0.7 * 1.0, 1.3 * 3.0});
    const auto t = weighted_cesaro_structured(mu0, Y, 10000);
    CHECK(t.cesaro_errors.back() < 5e-2);
    CHECK(t.cesaro_errors.back() < 1e-3);
    for (std::size_t i : t.sequence) CHECK(i < 2);
  }
  {
    MeasureFamily Y = family({{1.0, 0.0}});
    Y.structure = Structure{{FiniteMeasure({1.0, 0.0})}, 1, 2.0, 4.0};
    CHECK_THROWS_AS(Y.validate(), ValidationError);
    CHECK_THROWS_AS(weighted_cesaro_structured(FiniteMeasure({1.0, 0.0}), Y, 10), ValidationError);
  }
  {
    MeasureFamily Y = family({{3.0, 0.0}});
    Y.structure = Structure{{FiniteMeasure({1.0, 0.0})}, 2, 0.5, 4.0};
    CHECK_THROWS_AS(Y.validate(), ValidationError);  // needs multiplicity 3
  }
  CHECK_THROWS_AS(weighted_cesaro_structured(FiniteMeasure({1.0, 1.0}), family({{1.0, 1.0}}), 10),
                  ValidationError);
}

TEST_CASE("equivalence harness") {
  HarnessConfig cfg;
  cfg.trials = 40;
  cfg.k_max = 2000;
  cfg.oracle = [](const FiniteMeasure& mu0, const std::vector<FiniteMeasure>& Y) {
    return oracle::cone_member_bruteforce(mu0, Y);
  };
  const auto rep = equivalence_harness(cfg);
  CHECK(rep.trials == 40);
  CHECK(rep.records.size() == 40);
  CHECK(rep.members + rep.non_members == 40);
  CHECK(rep.members > 0);
  CHECK(rep.non_members > 0);
  CHECK(rep.inconsistencies == 0);
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    CHECK(rep.records[i].trial == i);
    CHECK(rep.records[i].oracle_member.has_value());
    if (rep.records[i].lp == Verdict::kNonMember) CHECK(rep.records[i].hull_distance_lower_bound > 0.0);
  }
  // deterministic under reruns and thread counts
  setenv("WIDTHLAB_THREADS", "1", 1);
  const auto again = equivalence_harness(cfg);
  unsetenv("WIDTHLAB_THREADS");
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    CHECK(again.records[i].seed == rep.records[i].seed);
    CHECK(again.records[i].plain_error == rep.records[i].plain_error);
  }
  cfg.trials = 0;
  CHECK_THROWS_AS(equivalence_harness(cfg), ValidationError);
}
