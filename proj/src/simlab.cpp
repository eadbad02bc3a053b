#include "ordcert/simlab.hpp"

#include "ordcert/effects.hpp"
#include "ordcert/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ordcert::sim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return hash_words({seed, tag}); }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Metric proportion(const std::string& name, const std::vector<double>& hits) {
  Metric m;
  m.name = name;
  m.replicates = static_cast<int>(hits.size());
  if (hits.empty()) return m;
  const double mean = std::accumulate(hits.begin(), hits.end(), 0.0) / static_cast<double>(hits.size());
  m.value = mean;
  m.se = std::sqrt(mean * (1.0 - mean) / static_cast<double>(hits.size()));
  return m;
}

Metric mean_metric(const std::string& name, const std::vector<double>& values) {
  Metric m;
  m.name = name;
  m.replicates = static_cast<int>(values.size());
  if (values.empty()) return m;
  const double count = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  m.value = mean;
  m.se = values.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  return m;
}

Metric median_metric(const std::string& name, std::vector<double> values) {
  Metric m;
  m.name = name;
  m.replicates = static_cast<int>(values.size());
  if (values.empty()) return m;
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  m.value = values.size() % 2 == 1 ? values[k] : 0.5 * (values[k - 1] + values[k]);
  return m;
}

ReportCell make_cell(int p, int n, const std::string& dist, std::uint64_t seed) {
  ReportCell cell;
  cell.p = p;
  cell.n = n;
  cell.dist = dist;
  cell.seed = seed;
  cell.label = "p=" + std::to_string(p) + " n=" + std::to_string(n) + " dist=" + dist;
  return cell;
}

double factorial(int p) {
  double f = 1.0;
  for (int k = 2; k <= p; ++k) f *= k;
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distributions

std::string to_string(ErrorDist dist) {
  switch (dist) {
    case ErrorDist::uniform: return "uniform";
    case ErrorDist::lognormal: return "lognormal";
    case ErrorDist::gamma: return "gamma";
    case ErrorDist::weibull: return "weibull";
    case ErrorDist::laplace: return "laplace";
  }
  return "gamma";
}

ErrorDist parse_error_dist(const std::string& text) {
  for (ErrorDist d : kAllErrorDists) {
    if (to_string(d) == text) return d;
  }
  throw Error("unknown error distribution '" + text + "'");
}

std::string ErrorChoice::to_string() const { return mixed ? "mixed" : sim::to_string(dist); }

ErrorChoice ErrorChoice::parse(const std::string& text) {
  if (text == "mixed") return {true, ErrorDist::gamma};
  return {false, parse_error_dist(text)};
}

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(int p, std::vector<Edge> edges) : p_(p), edges_(std::move(edges)) {
  if (p < 1 || p > kMaxVars) throw Error("invalid number of nodes");
  for (const auto& e : edges_) {
    if (e.from < 0 || e.to >= p || e.from >= e.to) {
      throw Error("edges must point from a lower to a higher index");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.to < b.to || (a.to == b.to && a.from < b.from);
  });
}

Matrix Dag::weights() const {
  Matrix b = Matrix::Zero(p_, p_);
  for (const auto& e : edges_) b(e.to, e.from) = e.weight;
  return b;
}

VarSet Dag::parents(Var v) const {
  VarSet pa;
  for (const auto& e : edges_) {
    if (e.to == v) pa = pa.with(e.from);
  }
  return pa;
}

VarSet Dag::ancestors(Var v) const {
  std::vector<VarSet> an(static_cast<std::size_t>(p_));
  for (const auto& e : edges_) {  // sorted by target, sources are earlier
    auto& target = an[static_cast<std::size_t>(e.to)];
    target = VarSet(target.bits() | an[static_cast<std::size_t>(e.from)].bits()).with(e.from);
  }
  return an[static_cast<std::size_t>(v)];
}

bool Dag::has_edge(Var from, Var to) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.from == from && e.to == to; });
}

bool Dag::is_valid_ordering(const Ordering& theta) const {
  if (!theta.is_total(p_)) return false;
  std::vector<int> pos(static_cast<std::size_t>(p_));
  for (int i = 0; i < p_; ++i) pos[static_cast<std::size_t>(theta[i])] = i;
  return std::all_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
    return pos[static_cast<std::size_t>(e.from)] < pos[static_cast<std::size_t>(e.to)];
  });
}

double Dag::total_effect(Var cause, Var effect) const {
  const Matrix identity = Matrix::Identity(p_, p_);
  const Matrix total = (identity - weights()).inverse();
  return total(effect, cause);
}

std::vector<std::pair<Var, Var>> Dag::ancestral_pairs() const {
  std::vector<std::pair<Var, Var>> out;
  for (Var v = 0; v < p_; ++v) {
    for (Var u : ancestors(v).members()) out.emplace_back(u, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double confset_gamma_shape(int n) { return std::pow(static_cast<double>(n), -0.1); }

Dag gen_graph(int p, double edge_prob, CoefficientLaw law, double gamma_shape,
              std::uint64_t seed) {
  if (p < 2) throw Error("graphs need p >= 2");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution extra(edge_prob);
  std::uniform_real_distribution<double> magnitude(0.1, 0.95);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);
  std::gamma_distribution<double> gamma(gamma_shape > 0 ? gamma_shape : 1.0, 1.0);
  auto weight = [&]() {
    switch (law) {
      case CoefficientLaw::uniform_pm_01_095: {
        const double sign = coin(rng) ? 1.0 : -1.0;
        return sign * magnitude(rng);
      }
      case CoefficientLaw::rademacher_gamma: {
        const double sign = coin(rng) ? 1.0 : -1.0;
        return sign * gamma(rng);
      }
      case CoefficientLaw::uniform_pm_0_1:
        return symmetric(rng);
    }
    return 0.0;
  };
  std::vector<Edge> edges;
  for (Var v = 1; v < p; ++v) {
    for (Var u = 0; u < v; ++u) {
      if (u == v - 1 || extra(rng)) edges.push_back({u, v, weight()});
    }
  }
  return Dag(p, std::move(edges));
}

Dag gen_graph_gof(int p, std::uint64_t seed) {
  return gen_graph(p, 0.5, CoefficientLaw::uniform_pm_01_095, 0.0, seed);
}

Dag gen_graph_confset(int p, int n, std::uint64_t seed) {
  if (n < 2) throw Error("n must be at least 2");
  return gen_graph(p, 1.0 / 3.0, CoefficientLaw::rademacher_gamma, confset_gamma_shape(n), seed);
}

std::vector<ErrorDist> assign_errors(const ErrorChoice& choice, int p, std::uint64_t seed) {
  if (!choice.mixed) return std::vector<ErrorDist>(static_cast<std::size_t>(p), choice.dist);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(std::size(kAllErrorDists)) - 1);
  std::vector<ErrorDist> out;
  for (int v = 0; v < p; ++v) out.push_back(kAllErrorDists[pick(rng)]);
  return out;
}

Dataset sample_sem(const SemSpec& spec, std::uint64_t seed) {
  const int p = spec.dag.p();
  if (static_cast<int>(spec.errors.size()) != p) throw Error("need one error law per node");
  if (spec.n < 2) throw Error("n must be at least 2");
  std::mt19937_64 rng(seed);
  Matrix y(spec.n, p);
  const Matrix b = spec.dag.weights();
  for (Var v = 0; v < p; ++v) {
    auto col = y.col(v);
    const ErrorDist dist = spec.errors[static_cast<std::size_t>(v)];
    for (int i = 0; i < spec.n; ++i) col(i) = draw_error(dist, rng);
    for (Var u : spec.dag.parents(v).members()) col += b(v, u) * y.col(u);
  }
  Dataset d(std::move(y));
  return spec.standardize ? standardize(d) : d;
}

// ---------------------------------------------------------------------------
// Reports

const Metric& ReportCell::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw Error("report cell has no metric '" + name + "'");
}

std::string ExperimentReport::to_csv() const {
  std::string out = std::string(kReportCsvHeader) + "\n";
  char buf[64];
  for (const auto& cell : cells) {
    for (const auto& m : cell.metrics) {
      out += scenario + ",\"" + cell.label + "\"," + std::to_string(cell.p) + "," +
             std::to_string(cell.n) + "," + cell.dist + "," + m.name + ",";
      std::snprintf(buf, sizeof(buf), "%.10g", m.value);
      out += buf;
      out += ",";
      if (std::isfinite(m.se)) {
        std::snprintf(buf, sizeof(buf), "%.6g", m.se);
        out += buf;
      }
      out += "," + std::to_string(m.replicates) + "," + std::to_string(cell.seed) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Studies

ReportCell run_size_power(int p, int n, const ErrorChoice& dist, const StudyOptions& opts,
                          const GofConfig& cfg, const TestFunctionSet& tf) {
  const auto reps = static_cast<std::size_t>(opts.reps);
  std::vector<double> size_hits(reps), power_hits(reps), runtime(reps);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const std::uint64_t rs = derive(opts.seed, r);
    const Dag dag = gen_graph_gof(p, derive(rs, 1));
    const Dataset d = sample_sem({dag, assign_errors(dist, p, derive(rs, 2)), n, true}, derive(rs, 3));
    GofConfig local = cfg;
    local.seed = derive(rs, 4);
    const auto start = Clock::now();
    const auto size = test_an(d, p - 1, VarSet::range(0, p - 1), tf, local);
    const auto power = test_an(d, 0, VarSet::range(1, p), tf, local);
    runtime[r] = seconds_since(start) / 2.0;
    size_hits[r] = size.p_value < opts.alpha ? 1.0 : 0.0;
    power_hits[r] = power.p_value < opts.alpha ? 1.0 : 0.0;
  });
  ReportCell cell = make_cell(p, n, dist.to_string(), opts.seed);
  cell.metrics = {proportion("size", size_hits), proportion("power", power_hits),
                  mean_metric("seconds_per_test", runtime)};
  return cell;
}

ReportCell run_confset_study(int p, int n, const ErrorChoice& dist, const StudyOptions& opts,
                             const GofConfig& cfg, const ConfsetStudyOptions& search,
                             const TestFunctionSet& tf) {
  const auto reps = static_cast<std::size_t>(opts.reps);
  std::vector<double> cover_any(reps), cover_fixed(reps), fraction(reps), recall(reps),
      runtime(reps), finished(reps), empty(reps), tests(reps);
  const double all_orderings = factorial(p);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const std::uint64_t rs = derive(opts.seed, r);
    const Dag dag = gen_graph(p, search.edge_prob, search.law, confset_gamma_shape(n), derive(rs, 1));
    const Dataset d = sample_sem({dag, assign_errors(dist, p, derive(rs, 2)), n, true}, derive(rs, 3));
    GofConfig local = cfg;
    local.seed = derive(rs, 4);
    SearchOptions so;
    so.budget = search.budget;
    const auto cs = confidence_set(d, opts.alpha, tf, local, so);
    runtime[r] = cs.diagnostics.wall_seconds;
    finished[r] = cs.exhausted ? 1.0 : 0.0;
    empty[r] = cs.empty() ? 1.0 : 0.0;
    tests[r] = static_cast<double>(cs.diagnostics.tests_run);
    fraction[r] = static_cast<double>(cs.orderings.size()) / all_orderings;
    cover_fixed[r] = contains(cs, Ordering::identity(p)) ? 1.0 : 0.0;
    cover_any[r] = std::any_of(cs.orderings.begin(), cs.orderings.end(),
                               [&](const AcceptedOrdering& a) { return dag.is_valid_ordering(a.theta); })
                       ? 1.0
                       : 0.0;
    if (!cs.empty()) {
      const auto truth = dag.ancestral_pairs();
      const auto bounds = ancestral_bounds(cs);
      std::size_t found = 0;
      for (const auto& pair : truth) {
        found += std::binary_search(bounds.lower.begin(), bounds.lower.end(), pair);
      }
      recall[r] = truth.empty() ? 1.0 : static_cast<double>(found) / static_cast<double>(truth.size());
    }
  });
  ReportCell cell = make_cell(p, n, dist.to_string(), opts.seed);
  cell.metrics = {proportion("coverage_any", cover_any),
                  proportion("coverage_fixed", cover_fixed),
                  mean_metric("retained_fraction", fraction),
                  mean_metric("ancestral_recall", recall),
                  mean_metric("seconds", runtime),
                  mean_metric("tests_run", tests),
                  proportion("finished", finished),
                  proportion("empty", empty)};
  return cell;
}

ReportCell run_ci_study(int p, int n, const ErrorChoice& dist, const StudyOptions& opts,
                        const GofConfig& cfg, const CiStudyOptions& ci, const TestFunctionSet& tf) {
  if (ci.cause >= p || ci.effect >= p || ci.cause == ci.effect) throw Error("invalid cause/effect");
  const auto reps = static_cast<std::size_t>(opts.reps);
  std::vector<double> cover_mu(reps), cover_nv(reps), cover_map(reps), len_mu(reps), len_nv(reps),
      empty(reps), sets_used(reps);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const std::uint64_t rs = derive(opts.seed, r);
    const Dag dag = gen_graph(p, 1.0 / 3.0, CoefficientLaw::rademacher_gamma, ci.gamma_shape,
                              derive(rs, 1));
    const Dataset raw =
        sample_sem({dag, assign_errors(dist, p, derive(rs, 2)), n, false}, derive(rs, 3));
    GofConfig local = cfg;
    local.seed = derive(rs, 4);
    SearchOptions so;
    so.budget = ci.budget;
    const auto cs = confidence_set(standardize(raw), opts.alpha / 2.0, tf, local, so);
    const double truth = dag.total_effect(ci.cause, ci.effect);

    if (cs.empty()) {
      empty[r] = 1.0;
    } else {
      const auto mu = total_effect_ci(raw, cs, ci.cause, ci.effect, opts.alpha);
      cover_mu[r] = mu.ci.contains(truth) ? 1.0 : 0.0;
      len_mu[r] = mu.ci.length();
      sets_used[r] = mu.adjustment_sets_used;
    }

    // Single-ordering interval: adjust for pr(cause) under theta, or {0}
    // when theta puts the effect first.
    auto naive_ci = [&](const Ordering& theta) {
      IntervalUnion out;
      if (theta.precedes(ci.cause, ci.effect)) {
        out.add(ols_coefficient_ci(raw, ci.effect, theta.predecessors(ci.cause).with(ci.cause),
                                   ci.cause, 1.0 - opts.alpha));
      } else {
        out.add_zero_point();
      }
      return out;
    };
    const IntervalUnion naive = naive_ci(Ordering::identity(p));
    cover_nv[r] = naive.contains(truth) ? 1.0 : 0.0;
    len_nv[r] = naive.length();
    if (!cs.empty()) {
      // Point estimate: the retained ordering with the largest aggregated p-value.
      const auto best = std::max_element(
          cs.orderings.begin(), cs.orderings.end(),
          [](const AcceptedOrdering& a, const AcceptedOrdering& b) { return a.Gamma < b.Gamma; });
      cover_map[r] = naive_ci(best->theta).contains(truth) ? 1.0 : 0.0;
    }
  });
  ReportCell cell = make_cell(p, n, dist.to_string(), opts.seed);
  cell.metrics = {proportion("coverage_mu", cover_mu),   proportion("coverage_naive", cover_nv),
                  mean_metric("avg_len_mu", len_mu),     median_metric("med_len_mu", len_mu),
                  mean_metric("avg_len_naive", len_nv),  median_metric("med_len_naive", len_nv),
                  proportion("coverage_naive_best", cover_map),
                  mean_metric("adjustment_sets", sets_used), proportion("empty", empty)};
  return cell;
}

ReportCell run_calibration_study(int p, int n, const StudyOptions& opts, int bootstrap_reps) {
  constexpr double kRho = 0.2;
  const auto reps = static_cast<std::size_t>(opts.reps);
  const TestFunctionSet tf({TestFunctionSet::named("square")}, true);
  std::vector<double> boot(reps), plugin(reps), oracle(reps);
  parallel_for(reps, opts.threads, [&](std::size_t r) {
    const std::uint64_t rs = derive(opts.seed, r);
    std::mt19937_64 rng(derive(rs, 1));
    std::normal_distribution<double> normal;
    Matrix x(n, p);
    for (int i = 0; i < n; ++i) {
      const double common = normal(rng);
      for (int v = 0; v < p; ++v) {
        x(i, v) = std::exp(std::sqrt(kRho) * common + std::sqrt(1.0 - kRho) * normal(rng));
      }
    }
    for (int v = 0; v < p; ++v) {
      auto col = x.col(v);
      col.array() -= col.mean();
      col /= std::sqrt(col.squaredNorm() / (n - 1.0));
    }
    Matrix values(n, p + 1);
    values.leftCols(p) = x;
    values.col(p) = x.rowwise().sum();
    for (int i = 0; i < n; ++i) values(i, p) += draw_error(ErrorDist::lognormal, rng);
    const Dataset d(std::move(values));

    GofConfig cfg;
    cfg.stat = Statistic::T2;
    cfg.reps = bootstrap_reps;
    cfg.seed = derive(rs, 2);
    const VarSet regressors = VarSet::range(0, p);
    const ErrorSampler sampler = [](CounterRng& g) { return draw_error(ErrorDist::lognormal, g); };
    auto reject = [&](Calibration c) {
      GofConfig local = cfg;
      local.calibration = c;
      return test_an(d, p, regressors, tf, local, sampler).p_value < opts.alpha ? 1.0 : 0.0;
    };
    boot[r] = reject(Calibration::bootstrap);
    plugin[r] = reject(Calibration::gaussian_plugin);
    oracle[r] = reject(Calibration::oracle);
  });
  ReportCell cell = make_cell(p, n, "lognormal", opts.seed);
  cell.metrics = {proportion("size_bootstrap", boot), proportion("size_gaussian_plugin", plugin),
                  proportion("size_oracle", oracle)};
  return cell;
}

// ---------------------------------------------------------------------------
// Scenario files

ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source) {
  ScenarioConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(source + ":" + std::to_string(line_no) + ": " + what);
  };
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail("expected an integer, got '" + s + "'");
    return 0;
  };
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail("expected a number, got '" + s + "'");
    return 0.0;
  };
  auto int_list = [&](const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) out.push_back(to_int(item));
    if (out.empty()) fail("empty list");
    return out;
  };
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      value = value.substr(1, value.size() - 2);
    }
    try {
      if (key == "scenario") cfg.scenario = value;
      else if (key == "p") cfg.p = int_list(value);
      else if (key == "n") cfg.n = int_list(value);
      else if (key == "dist") {
        cfg.dist.clear();
        for (auto item : split_list(value)) {
          if (item.size() >= 2 && item.front() == '"') item = item.substr(1, item.size() - 2);
          ErrorChoice::parse(item);
          cfg.dist.push_back(item);
        }
      } else if (key == "reps") cfg.reps = to_int(value);
      else if (key == "alpha") cfg.alpha = to_double(value);
      else if (key == "L" || key == "bootstrap_reps") cfg.bootstrap_reps = to_int(value);
      else if (key == "stat") cfg.stat = parse_statistic(value);
      else if (key == "basis") cfg.basis = BasisSpec::parse(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "threads") cfg.threads = to_int(value);
      else if (key == "max_seconds") cfg.max_seconds = to_double(value);
      else if (key == "cause") cfg.cause = to_int(value) - 1;
      else if (key == "effect") cfg.effect = to_int(value) - 1;
      else fail("unknown key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail("bad value for '" + key + "': " + e.what());
    }
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(source + ": alpha must lie in (0, 1)");
  if (cfg.reps < 1 || cfg.bootstrap_reps < 1) throw Error(source + ": reps and L must be positive");
  if (cfg.threads < 1) throw Error(source + ": threads must be positive");
  return cfg;
}

ExperimentReport run_scenario(const ScenarioConfig& config) {
  const std::string& s = config.scenario;
  if (s != "size-power" && s != "confset" && s != "ci" && s != "calibration") {
    throw Error("unknown scenario '" + s + "' (size-power, confset, ci, calibration)");
  }
  ExperimentReport report;
  report.scenario = s;
  report.replicates = config.reps;
  report.seed = config.seed;

  GofConfig gof;
  gof.stat = config.stat;
  gof.reps = config.bootstrap_reps;
  gof.basis = config.basis;
  const std::vector<std::string> dists =
      s == "calibration" ? std::vector<std::string>{"lognormal"} : config.dist;

  std::uint64_t cell_index = 0;
  for (int p : config.p) {
    for (int n : config.n) {
      for (const auto& dist_name : dists) {
        StudyOptions opts;
        opts.reps = config.reps;
        opts.alpha = config.alpha;
        opts.seed = derive(config.seed, cell_index++);
        opts.threads = config.threads;
        if (s == "size-power") {
          report.cells.push_back(run_size_power(p, n, ErrorChoice::parse(dist_name), opts, gof));
        } else if (s == "confset") {
          ConfsetStudyOptions search;
          search.budget.max_seconds = config.max_seconds;
          report.cells.push_back(
              run_confset_study(p, n, ErrorChoice::parse(dist_name), opts, gof, search));
        } else if (s == "ci") {
          CiStudyOptions ci;
          ci.cause = config.cause;
          ci.effect = config.effect;
          ci.budget.max_seconds = config.max_seconds;
          report.cells.push_back(run_ci_study(p, n, ErrorChoice::parse(dist_name), opts, gof, ci));
        } else {
          report.cells.push_back(run_calibration_study(p, n, opts, config.bootstrap_reps));
        }
      }
    }
  }
  return report;
}

}  // namespace ordcert::sim
