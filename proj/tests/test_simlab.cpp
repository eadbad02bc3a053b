#include <doctest.h>

#include "ordcert/simlab.hpp"

#include <cmath>
#include <random>

using namespace ordcert;
using namespace ordcert::sim;

TEST_CASE("error laws have mean 0 and variance 1") {
  for (ErrorDist dist : kAllErrorDists) {
    std::mt19937_64 rng(1);
    constexpr int kDraws = 400000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double e = draw_error(dist, rng);
      sum += e;
      sq += e * e;
    }
    const double mean = sum / kDraws;
    CAPTURE(to_string(dist));
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(sq / kDraws - mean * mean - 1.0) < 0.04);
    CHECK(parse_error_dist(to_string(dist)) == dist);
  }
  CHECK(std::exp(kLognormalLogVariance) * std::expm1(kLognormalLogVariance) == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_error_dist("cauchy"), Error);
  CHECK(ErrorChoice::parse("mixed").mixed);
}

TEST_CASE("lognormal errors are skewed") {
  std::mt19937_64 rng(4);
  std::vector<double> e(10000);
  for (auto& x : e) x = draw_error(ErrorDist::lognormal, rng);
  double m = 0.0;
  for (double x : e) m += x;
  m /= static_cast<double>(e.size());
  double m2 = 0.0, m3 = 0.0;
  for (double x : e) {
    m2 += (x - m) * (x - m);
    m3 += (x - m) * (x - m) * (x - m);
  }
  m2 /= static_cast<double>(e.size());
  m3 /= static_cast<double>(e.size());
  CHECK(m3 / std::pow(m2, 1.5) > 1.0);
}

TEST_CASE("graph generators") {
  CHECK(confset_gamma_shape(10000) == doctest::Approx(0.3981071705534972).epsilon(1e-14));
  const Dag two = gen_graph_gof(2, 5);
  REQUIRE(two.edges().size() == 1);
  CHECK(two.has_edge(0, 1));
  CHECK(gen_graph_confset(2, 100, 3).edges().size() == 1);

  int extra_gof = 0, extra_conf = 0, eligible = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const Dag g = gen_graph_gof(10, s);
    const Dag c = gen_graph_confset(10, 1000, s);
    for (Var v = 1; v < 10; ++v) {
      CHECK(g.has_edge(v - 1, v));
      CHECK(c.has_edge(v - 1, v));
    }
    for (const auto& e : g.edges()) {
      CHECK(e.from < e.to);
      CHECK(std::abs(e.weight) >= 0.1);
      CHECK(std::abs(e.weight) <= 0.95);
    }
    extra_gof += static_cast<int>(g.edges().size()) - 9;
    extra_conf += static_cast<int>(c.edges().size()) - 9;
    eligible += 36;
    CHECK(g.is_valid_ordering(Ordering::identity(10)));
  }
  CHECK(static_cast<double>(extra_gof) / eligible == doctest::Approx(0.5).epsilon(0.06));
  CHECK(static_cast<double>(extra_conf) / eligible == doctest::Approx(1.0 / 3.0).epsilon(0.09));

  const Dag u = gen_graph(6, 0.5, CoefficientLaw::uniform_pm_0_1, 0.0, 9);
  for (const auto& e : u.edges()) CHECK(std::abs(e.weight) < 1.0);
  CHECK(gen_graph_gof(8, 42).edges().size() == gen_graph_gof(8, 42).edges().size());
}

TEST_CASE("Dag queries") {
  const Dag g(4, {{0, 1, 2.0}, {1, 2, 3.0}, {0, 3, 0.5}});
  CHECK(g.parents(2) == VarSet::of({1}));
  CHECK(g.ancestors(2) == VarSet::of({0, 1}));
  CHECK(g.ancestors(0).empty());
  CHECK(g.total_effect(0, 2) == doctest::Approx(6.0));
  CHECK(g.total_effect(2, 0) == doctest::Approx(0.0));
  CHECK(g.is_valid_ordering(Ordering({0, 3, 1, 2})));
  CHECK_FALSE(g.is_valid_ordering(Ordering({1, 0, 2, 3})));
  const std::vector<std::pair<Var, Var>> pairs{{0, 1}, {0, 2}, {0, 3}, {1, 2}};
  CHECK(g.ancestral_pairs() == pairs);
  CHECK_THROWS_AS(Dag(3, {{2, 1, 1.0}}), Error);
}

TEST_CASE("forward simulation") {
  // Zero weights: independent centered columns.
  const Dataset z = sample_sem({Dag(3), assign_errors({false, ErrorDist::gamma}, 3, 1), 20000, false}, 2);
  for (Var v = 0; v < 3; ++v) CHECK(std::abs(z.column(v).mean()) < 4.0 / std::sqrt(20000.0));

  // Chain with weight w: corr = w / sqrt(1 + w^2).
  const double w = 0.8;
  const Dataset c = sample_sem({Dag(2, {{0, 1, w}}), assign_errors({false, ErrorDist::laplace}, 2, 1),
                                100000, true}, 3);
  const double corr = c.column(0).dot(c.column(1)) / (c.n() - 1.0);
  CHECK(corr == doctest::Approx(w / std::sqrt(1.0 + w * w)).epsilon(0.01));
  CHECK(c.all_standardized());

  const SemSpec spec{gen_graph_gof(5, 1), assign_errors({true, ErrorDist::gamma}, 5, 7), 50, true};
  CHECK(sample_sem(spec, 9).values() == sample_sem(spec, 9).values());
  CHECK(assign_errors({true, ErrorDist::gamma}, 5, 7) == assign_errors({true, ErrorDist::gamma}, 5, 7));
}

TEST_CASE("scenario config parsing") {
  const auto cfg = parse_scenario_config(
      "# grid\nscenario = confset\np = 5, 6\nn = [100,200]\ndist = gamma, \"mixed\"\n"
      "reps = 3\nalpha = 0.05\nL = 99\nstat = t1\nbasis = poly:2\nseed = 12\n"
      "cause = 2\neffect = 4\nmax_seconds = 30\n");
  CHECK(cfg.scenario == "confset");
  CHECK(cfg.p == std::vector<int>{5, 6});
  CHECK(cfg.n == std::vector<int>{100, 200});
  CHECK(cfg.dist == std::vector<std::string>{"gamma", "mixed"});
  CHECK(cfg.reps == 3);
  CHECK(cfg.bootstrap_reps == 99);
  CHECK(cfg.stat == Statistic::T1);
  CHECK(cfg.basis == BasisSpec::polynomial(2));
  CHECK(cfg.seed == 12);
  CHECK(cfg.cause == 1);
  CHECK(cfg.effect == 3);
  CHECK(cfg.max_seconds == 30.0);

  try {
    parse_scenario_config("p = 5\nbogus = 1\n", "s.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("s.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario_config("alpha = 2\n"), Error);
  CHECK_THROWS_AS(parse_scenario_config("dist = cauchy\n"), Error);
  CHECK_THROWS_AS(parse_scenario_config("p = x\n"), Error);
}

TEST_CASE("size-power cell is reproducible across thread counts") {
  StudyOptions opts;
  opts.reps = 6;
  opts.seed = 3;
  GofConfig cfg;
  cfg.reps = 49;
  const auto a = run_size_power(4, 60, ErrorChoice::parse("gamma"), opts, cfg);
  opts.threads = 3;
  const auto b = run_size_power(4, 60, ErrorChoice::parse("gamma"), opts, cfg);
  CHECK(a.metric("size").value == b.metric("size").value);
  CHECK(a.metric("power").value == b.metric("power").value);
  CHECK(a.metric("size").replicates == 6);
  CHECK_THROWS_AS(a.metric("nope"), Error);
}

TEST_CASE("report csv") {
  ScenarioConfig cfg;
  cfg.scenario = "size-power";
  cfg.p = {3};
  cfg.n = {40, 50};
  cfg.reps = 2;
  cfg.bootstrap_reps = 19;
  const auto report = run_scenario(cfg);
  CHECK(report.cells.size() == 2);
  const std::string csv = report.to_csv();
  CHECK(csv.rfind(std::string(kReportCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
  cfg.scenario = "other";
  CHECK_THROWS_AS(run_scenario(cfg), Error);
}

TEST_CASE("small studies run end to end") {
  StudyOptions opts;
  opts.reps = 2;
  opts.seed = 1;
  GofConfig cfg;
  cfg.reps = 19;
  const auto cs = run_confset_study(4, 100, ErrorChoice::parse("gamma"), opts, cfg);
  CHECK(cs.metric("retained_fraction").value <= 1.0);
  CHECK(cs.metric("finished").value == 1.0);
  opts.alpha = 0.2;
  CiStudyOptions ci;
  ci.cause = 1;
  ci.effect = 3;
  const auto c = run_ci_study(5, 100, ErrorChoice::parse("gamma"), opts, cfg, ci);
  CHECK(c.metric("coverage_mu").replicates == 2);
  opts.alpha = 0.05;
  const auto cal = run_calibration_study(3, 100, opts, 19);
  CHECK(cal.metrics.size() == 3);
}
