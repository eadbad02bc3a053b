#include <doctest.h>

#include "ordcert/gof.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace ordcert;

namespace {

// Linear chain Y_v = 0.7 Y_{v-1} + gamma error, standardized.
Dataset chain(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Matrix m(n, p);
  for (int i = 0; i < n; ++i) {
    for (int v = 0; v < p; ++v) m(i, v) = (v ? 0.7 * m(i, v - 1) : 0.0) + gamma(rng) - 1.0;
  }
  return standardize(Dataset(m));
}

}  // namespace

TEST_CASE("tau_j arithmetic") {
  Vector h(3), r(3);
  h << 1, 1, 1;
  r << -1, 0, 1;
  CHECK(tau_j(h, r, std::sqrt(3.0)) == doctest::Approx(0.0));
  h << 1, 2, 3;
  r << 1, 1, 1;
  CHECK(tau_j(h, r, std::sqrt(3.0)) == doctest::Approx(3.464101615137755).epsilon(1e-14));
  CHECK_THROWS_AS(tau_j(h, r, 0.0), Error);
}

TEST_CASE("tau aggregation") {
  const std::vector<double> one{0.37};
  CHECK(combine_tau(one, Statistic::T1, false) == doctest::Approx(0.37));
  CHECK(combine_tau(one, Statistic::T2, false) == doctest::Approx(0.37));
  const std::vector<double> two{3.0, 4.0};
  CHECK(combine_tau(two, Statistic::T1, false) == doctest::Approx(3.5));
  CHECK(combine_tau(two, Statistic::T2, false) == doctest::Approx(std::sqrt(25.0 / std::sqrt(2.0))));
  CHECK(combine_tau(two, Statistic::T2, true) == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("rank p-value") {
  const std::vector<double> reps{0.1, 0.5, 0.9, 1.3};
  CHECK(rank_pvalue(0.7, reps) == doctest::Approx(0.6));
  CHECK(rank_pvalue(2.0, reps) == doctest::Approx(0.2));
  CHECK(rank_pvalue(0.0, reps) == doctest::Approx(1.0));
  CHECK(rank_pvalue(0.5, reps) == doctest::Approx(0.6));  // ties do not count
}

TEST_CASE("Beta(1, p-1) quantile and aggregation") {
  CHECK(min_pvalue_quantile(0.1, 11) == doctest::Approx(0.010480741793785553).epsilon(1e-14));
  CHECK(min_pvalue_quantile(0.1, 11) == doctest::Approx(1.0 - std::pow(0.9, 0.1)).epsilon(1e-14));
  CHECK(min_pvalue_quantile(0.05, 2) == doctest::Approx(0.05));
  CHECK(min_pvalue_quantile(1e-12, 5) < 1e-12);
  CHECK(aggregate_pvalue(1.0, 7) == 1.0);
  CHECK(aggregate_pvalue(0.010480741793785553, 11) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(min_pvalue_quantile(0.0, 3), Error);
  CHECK_THROWS_AS(min_pvalue_quantile(0.1, 1), Error);
  CHECK_THROWS_AS(aggregate_pvalue(0.0, 3), Error);
}

TEST_CASE("aggregated min of independent uniforms is uniform") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr int kSims = 10000;
  constexpr int kP = 6;
  std::vector<double> g;
  for (int s = 0; s < kSims; ++s) {
    double m = 1.0;
    for (int k = 0; k < kP - 1; ++k) m = std::min(m, 1.0 - unif(rng));
    g.push_back(aggregate_pvalue(m, kP));
  }
  std::sort(g.begin(), g.end());
  double ks = 0.0;
  for (int i = 0; i < kSims; ++i) {
    ks = std::max({ks, std::abs(g[i] - static_cast<double>(i) / kSims),
                   std::abs(g[i] - static_cast<double>(i + 1) / kSims)});
  }
  CHECK(ks < 0.02);
}

TEST_CASE("test functions") {
  CHECK(TestFunctionSet::defaults().size() == 3);
  CHECK(TestFunctionSet::defaults().signature() == "square,spow:2.5,cube;std");
  CHECK(TestFunctionSet::parse("abs,tanh").size() == 2);
  CHECK_THROWS_AS(TestFunctionSet::parse("nope"), Error);
  CHECK_THROWS_AS(TestFunctionSet::parse(""), Error);
  CHECK_THROWS_AS(TestFunctionSet::parse("pow:1"), Error);  // affine
  CHECK_THROWS_AS(TestFunctionSet({{"lin", [](double y) { return 3 * y - 1; }}}), Error);
  CHECK(TestFunctionSet::named("spow:2").map(-2.0) == doctest::Approx(-4.0));
}

TEST_CASE("statistic agrees with a direct computation") {
  const Dataset d = chain(80, 4, 9);
  const TestFunctionSet tf = TestFunctionSet::defaults();
  GofConfig cfg;
  const VarSet u = VarSet::of({0, 2});
  const auto res = statistic(d, 3, u, tf, cfg);

  // Oracle: normal equations and explicit loops.
  Matrix x(80, 3);
  x.col(0).setOnes();
  x.col(1) = d.column(0);
  x.col(2) = d.column(2);
  const Vector y = d.column(3);
  const Vector beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  const Vector r = y - x * beta;
  const double denom = std::sqrt(80.0 - 3.0);
  double sum_sq = 0.0;
  for (Var var : {0, 2}) {
    double tau_sq = 0.0;
    for (const auto& f : tf.functions()) {
      Vector hv(80);
      for (int i = 0; i < 80; ++i) hv(i) = f.map(d.column(var)(i));
      hv.array() -= hv.mean();
      hv /= std::sqrt(hv.squaredNorm() / 79.0);
      const double t = hv.dot(r) / denom;
      tau_sq += t * t;
    }
    sum_sq += tau_sq;
  }
  CHECK(res.t == doctest::Approx(std::sqrt(sum_sq / std::sqrt(2.0))).epsilon(1e-10));
  CHECK(res.tau.size() == 2);
}

TEST_CASE("affine test functions give zero statistics") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = chain(60, 3, rng());
    const auto tf = TestFunctionSet::unchecked({{"affine", [](double y) { return 2.5 * y + 4.0; }}}, false);
    GofConfig cfg;
    const auto res = statistic(d, 2, VarSet::of({0, 1}), tf, cfg);
    for (double t : res.tau) CHECK(std::abs(t) < 1e-8);
  }
}

TEST_CASE("test_an is deterministic and on the lattice") {
  const Dataset d = chain(100, 4, 3);
  const TestFunctionSet tf = TestFunctionSet::defaults();
  GofConfig cfg;
  cfg.reps = 99;
  cfg.seed = 17;
  const auto a = test_an(d, 3, VarSet::range(0, 3), tf, cfg);
  const auto b = test_an(d, 3, VarSet::range(0, 3), tf, cfg);
  CHECK(a.p_value == b.p_value);
  CHECK(a.t_reps == b.t_reps);
  const double k = a.p_value * 100.0;
  CHECK(std::abs(k - std::round(k)) < 1e-9);
  CHECK(a.p_value >= 0.01);
  cfg.seed = 18;
  CHECK(test_an(d, 3, VarSet::range(0, 3), tf, cfg).t_reps != a.t_reps);
}

TEST_CASE("p-values are invariant to exact rescaling of the response") {
  const Dataset d = chain(90, 3, 8);
  Matrix scaled = d.values();
  scaled.col(2) *= 4.0;
  const Dataset d4(scaled);
  GofConfig cfg;
  cfg.reps = 199;
  for (Calibration c : {Calibration::bootstrap, Calibration::gaussian_plugin}) {
    cfg.calibration = c;
    const auto a = test_an(d, 2, VarSet::of({0, 1}), TestFunctionSet::defaults(), cfg);
    const auto b = test_an(d4, 2, VarSet::of({0, 1}), TestFunctionSet::defaults(), cfg);
    CHECK(a.p_value == b.p_value);
    CHECK(b.t_obs == doctest::Approx(4.0 * a.t_obs));
  }
}

TEST_CASE("the denominator choice does not move p-values") {
  const Dataset d = chain(70, 4, 4);
  GofConfig cfg;
  cfg.reps = 99;
  const auto a = test_an(d, 0, VarSet::of({1, 2, 3}), TestFunctionSet::defaults(), cfg);
  cfg.denominator = Denominator::sqrt_n;
  const auto b = test_an(d, 0, VarSet::of({1, 2, 3}), TestFunctionSet::defaults(), cfg);
  CHECK(a.p_value == b.p_value);
  CHECK(b.t_obs < a.t_obs);
}

TEST_CASE("reversed chain direction is rejected at n = 1000") {
  const Dataset d = chain(1000, 2, 12);
  GofConfig cfg;
  cfg.reps = 199;
  CHECK(test_an(d, 0, VarSet::of({1}), TestFunctionSet::defaults(), cfg).p_value < 0.05);
}

TEST_CASE("oracle calibration draws from the sampler") {
  const Dataset d = chain(60, 3, 2);
  GofConfig cfg;
  cfg.reps = 49;
  cfg.calibration = Calibration::oracle;
  CHECK_THROWS_AS(test_an(d, 2, VarSet::of({0, 1}), TestFunctionSet::defaults(), cfg), Error);
  const ErrorSampler zero = [](CounterRng&) { return 0.0; };
  const auto out = test_an(d, 2, VarSet::of({0, 1}), TestFunctionSet::defaults(), cfg, zero);
  for (double t : out.t_reps) CHECK(std::abs(t) < 1e-9);
  CHECK(out.p_value == doctest::Approx(1.0 / 50.0));
}

TEST_CASE("argument validation") {
  const Dataset d = chain(30, 3, 1);
  GofConfig cfg;
  const auto tf = TestFunctionSet::defaults();
  CHECK_THROWS_AS(test_an(d, 0, VarSet{}, tf, cfg), Error);
  CHECK_THROWS_AS(test_an(d, 0, VarSet::of({0, 1}), tf, cfg), Error);
  CHECK_THROWS_AS(test_an(d, 5, VarSet::of({0}), tf, cfg), Error);
  cfg.reps = 0;
  CHECK_THROWS_AS(test_an(d, 0, VarSet::of({1}), tf, cfg), Error);
  CHECK(parse_statistic("T1") == Statistic::T1);
  CHECK_THROWS_AS(parse_statistic("t3"), Error);
  CHECK(parse_calibration("gaussian_plugin") == Calibration::gaussian_plugin);
  CHECK(parse_denominator("sqrt_n") == Denominator::sqrt_n);
}

TEST_CASE("replicate keys separate tests and replicates") {
  const auto k = replicate_key(1, 2, VarSet::of({0, 1}), 3);
  CHECK(k != replicate_key(1, 2, VarSet::of({0, 1}), 4));
  CHECK(k != replicate_key(1, 3, VarSet::of({0, 1}), 3));
  CHECK(k != replicate_key(1, 2, VarSet::of({0, 2}), 3));
  CHECK(k != replicate_key(2, 2, VarSet::of({0, 1}), 3));
  CounterRng rng(k);
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
}
