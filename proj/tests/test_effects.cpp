#include <doctest.h>

#include "ordcert/effects.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace ordcert;

namespace {

ConfidenceSet make_set(int p, double alpha, std::vector<std::vector<Var>> perms) {
  ConfidenceSet cs;
  cs.p = p;
  cs.alpha = alpha;
  std::sort(perms.begin(), perms.end());
  for (auto& perm : perms) cs.orderings.push_back({Ordering(std::move(perm)), 0.5, 0.5});
  return cs;
}

Dataset linear_data(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(n, 3);
  for (int i = 0; i < n; ++i) {
    m(i, 0) = normal(rng);
    m(i, 1) = 0.5 * m(i, 0) + normal(rng);
    m(i, 2) = 0.8 * m(i, 1) - 0.3 * m(i, 0) + normal(rng);
  }
  return Dataset(m);
}

}  // namespace

TEST_CASE("interval unions") {
  IntervalUnion u({{0.5, 1.0}, {-1.0, 0.0}, {0.9, 2.0}});
  REQUIRE(u.intervals().size() == 2);
  CHECK(u.intervals()[1] == Interval{0.5, 2.0});
  CHECK(u.length() == doctest::Approx(2.5));
  CHECK(u.contains(-0.5));
  CHECK_FALSE(u.contains(0.25));
  CHECK(u.contains(2.0));
  u.add({0.0, 0.5});  // touching intervals merge
  CHECK(u.intervals().size() == 1);

  IntervalUnion atom;
  CHECK(atom.empty());
  atom.add_zero_point();
  CHECK(atom.contains(0.0));
  CHECK_FALSE(atom.contains(1e-9));
  CHECK(atom.length() == 0.0);
  CHECK_THROWS_AS(IntervalUnion({{1.0, 0.0}}), Error);
  CHECK_THROWS_AS(u.add({0.0, std::numeric_limits<double>::infinity()}), Error);
}

TEST_CASE("OLS interval matches the closed form for one regressor") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  Matrix m(12, 2);
  for (int i = 0; i < 12; ++i) {
    m(i, 0) = normal(rng);
    m(i, 1) = 1.5 * m(i, 0) + normal(rng);
  }
  const Dataset d(m);
  const Interval iv = ols_coefficient_ci(d, 1, VarSet::of({0}), 0, 0.9);

  const Vector x = d.column(0);
  const Vector y = d.column(1);
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  const double beta = ((x.array() - xm) * (y.array() - ym)).sum() / sxx;
  const double a = ym - beta * xm;
  const double s2 = (y.array() - a - beta * x.array()).square().sum() / 10.0;
  const double half = 1.8124611228107335 * std::sqrt(s2 / sxx);  // t_{0.95, 10}
  CHECK(iv.lo == doctest::Approx(beta - half).epsilon(1e-10));
  CHECK(iv.hi == doctest::Approx(beta + half).epsilon(1e-10));
  CHECK_THROWS_AS(ols_coefficient_ci(d, 1, VarSet::of({0}), 1, 0.9), Error);
}

TEST_CASE("total effect adjustment sets and the zero atom") {
  const Dataset d = linear_data(300, 1);
  // Cause 0 first everywhere, pr(0) = {} for all: one interval, no atom.
  auto cs = make_set(3, 0.05, {{0, 1, 2}, {0, 2, 1}});
  auto e = total_effect_ci(d, cs, 0, 2, 0.1);
  CHECK(e.adjustment_sets_used == 1);
  CHECK(e.ci.intervals().size() == 1);
  CHECK_FALSE(e.ci.include_zero_point());
  const Interval expected = ols_coefficient_ci(d, 2, VarSet::of({0}), 0, 0.95);
  CHECK(e.ci.intervals()[0] == expected);

  // Effect before cause everywhere: exactly {0}.
  cs = make_set(3, 0.05, {{2, 0, 1}, {2, 1, 0}});
  e = total_effect_ci(d, cs, 0, 2, 0.1);
  CHECK(e.ci.intervals().empty());
  CHECK(e.ci.include_zero_point());
  CHECK(e.adjustment_sets_used == 0);

  // Mixed: pr(0) in {{}, {1}} plus one ordering with 2 before 0.
  cs = make_set(3, 0.05, {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
  e = total_effect_ci(d, cs, 0, 2, 0.1);
  CHECK(e.adjustment_sets_used == 2);
  CHECK(e.ci.include_zero_point());

  CHECK_THROWS_AS(total_effect_ci(d, make_set(3, 0.1, {{0, 1, 2}}), 0, 2, 0.1), Error);
  CHECK_THROWS_AS(total_effect_ci(d, make_set(3, 0.05, {}), 0, 2, 0.1), EmptyConfidenceSet);
  CHECK_THROWS_AS(total_effect_ci(d, cs, 0, 0, 0.1), Error);
}

TEST_CASE("direct effect") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  Matrix m(100, 2);
  for (int i = 0; i < 100; ++i) {
    m(i, 0) = normal(rng);
    m(i, 1) = m(i, 0) + normal(rng);
  }
  const Dataset d(m);
  const auto cs = make_set(2, 0.05, {{0, 1}});
  const auto direct = direct_effect_ci(d, cs, 0, 1, 0.1);
  const auto total = total_effect_ci(d, cs, 0, 1, 0.1);
  CHECK(direct.ci.intervals() == total.ci.intervals());
  CHECK(direct_effect_ci(d, make_set(2, 0.05, {{1, 0}}), 0, 1, 0.1).ci.include_zero_point());

  // Direct effect of 0 on 2 adjusts for 1 as well.
  const Dataset d3 = linear_data(400, 5);
  const auto e = direct_effect_ci(d3, make_set(3, 0.05, {{0, 1, 2}}), 0, 2, 0.1);
  CHECK(e.ci.intervals()[0] == ols_coefficient_ci(d3, 2, VarSet::of({0, 1}), 0, 0.95));
}

TEST_CASE("ancestral bounds") {
  auto b = ancestral_bounds(make_set(3, 0.1, {{1, 0, 2}}));
  CHECK(b.lower.size() == 3);
  CHECK(b.lower == b.upper);
  CHECK(std::find(b.lower.begin(), b.lower.end(), VarPair{1, 0}) != b.lower.end());

  std::vector<std::vector<Var>> all;
  std::vector<Var> perm{0, 1, 2, 3};
  do all.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  b = ancestral_bounds(make_set(4, 0.1, all));
  CHECK(b.lower.empty());
  CHECK(b.upper.size() == 12);
  CHECK_THROWS_AS(ancestral_bounds(make_set(3, 0.1, {})), EmptyConfidenceSet);
}

TEST_CASE("ordering distance axioms") {
  CHECK(ordering_distance(Ordering({0, 1, 2}), Ordering({0, 1, 2})) == 0);
  CHECK(ordering_distance(Ordering({0, 1, 2}), Ordering({2, 1, 0})) == 3);
  CHECK(ordering_distance(Ordering({0, 1, 2, 3}), Ordering({0, 2, 1, 3})) == 1);
  CHECK_THROWS_AS(ordering_distance(Ordering({0, 1}), Ordering({0, 1, 2})), Error);
  std::mt19937_64 rng(8);
  std::vector<Var> a(7), b(7), c(7);
  std::iota(a.begin(), a.end(), 0);
  b = c = a;
  for (int rep = 0; rep < 100; ++rep) {
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    std::shuffle(c.begin(), c.end(), rng);
    const Ordering x(a), y(b), z(c);
    CHECK(ordering_distance(x, y) == ordering_distance(y, x));
    CHECK(ordering_distance(x, z) <= ordering_distance(x, y) + ordering_distance(y, z));
    CHECK((ordering_distance(x, y) == 0) == (x == y));
  }
}

TEST_CASE("Frechet medoid") {
  const auto one = frechet_mean(make_set(3, 0.1, {{2, 0, 1}}));
  CHECK(one.mean == Ordering({2, 0, 1}));
  CHECK(one.sum_squared_distance == 0);

  const auto three = frechet_mean(make_set(3, 0.1, {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}}));
  CHECK(three.mean == Ordering({0, 1, 2}));
  CHECK(three.sum_squared_distance == 2);
  CHECK(three.distance_histogram == std::vector<std::int64_t>{1, 2, 0, 0});

  // Tie between the two members: lexicographically smallest wins.
  CHECK(frechet_mean(make_set(2, 0.1, {{1, 0}, {0, 1}})).mean == Ordering({0, 1}));
  CHECK_THROWS_AS(frechet_mean(make_set(3, 0.1, {})), EmptyConfidenceSet);
}

TEST_CASE("property: medoid matches brute force") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const int p = 3 + rep % 4;
    std::vector<std::vector<Var>> perms;
    std::vector<Var> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), 0);
    const int count = 1 + static_cast<int>(rng() % 25);
    for (int k = 0; k < count; ++k) {
      std::shuffle(perm.begin(), perm.end(), rng);
      if (std::find(perms.begin(), perms.end(), perm) == perms.end()) perms.push_back(perm);
    }
    const auto cs = make_set(p, 0.1, perms);
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    Ordering arg;
    for (const auto& a : cs.orderings) {
      std::uint64_t s = 0;
      for (const auto& b : cs.orderings) {
        const auto dd = static_cast<std::uint64_t>(ordering_distance(a.theta, b.theta));
        s += dd * dd;
      }
      if (s < best) {
        best = s;
        arg = a.theta;
      }
    }
    const auto fm = frechet_mean(cs);
    CHECK(fm.sum_squared_distance == best);
    CHECK(fm.mean == arg);
  }
}
