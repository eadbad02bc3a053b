#include "cli.hpp"

#include "ordcert/dataset.hpp"
#include "ordcert/effects.hpp"
#include "ordcert/gof.hpp"
#include "ordcert/ordering.hpp"
#include "ordcert/parallel.hpp"
#include "ordcert/simlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace ordcert::cli {

namespace {

using json = nlohmann::ordered_json;

// Signals an empty confidence set under --fail-on-empty.
struct EmptyExit {};

struct Settings {
  std::string data;
  bool no_header = false;
  bool force_header = false;
  bool no_standardize = false;

  std::string target, given, cause, effect;
  std::string kind = "total";

  double alpha = 0.1;
  int reps = 500;
  std::string stat = "t2";
  std::string basis = "linear";
  std::string calibration = "bootstrap";
  std::string denominator = "sqrt_n_minus_K";
  bool proof_normalization = false;
  std::string test_functions;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  double max_seconds = std::numeric_limits<double>::infinity();
  std::int64_t max_tests = std::numeric_limits<std::int64_t>::max();

  std::string out = "json";
  std::string output;
  bool fail_on_empty = false;
  std::string histogram_csv;
  bool quiet = false;

  std::string scenario;
  std::string config;
  std::optional<int> sim_reps;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const Settings& s, const std::string& text) {
  if (s.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(s.output, std::ios::binary);
  if (!out) throw Error("cannot write '" + s.output + "'");
  out << text;
}

struct Loaded {
  Dataset raw;
  Dataset used;  // standardized unless --no-standardize
};

Loaded load(const Settings& s) {
  const std::string text = read_file(s.data);
  bool header = csv_has_header(text);
  if (s.no_header) header = false;
  if (s.force_header) header = true;
  Dataset raw = parse_csv(text, header, s.data);
  Dataset used = s.no_standardize ? raw : standardize(raw);
  return {std::move(raw), std::move(used)};
}

// A 1-based index or a column name.
Var resolve(const Dataset& d, const std::string& token) {
  if (token.empty()) throw Error("empty variable reference");
  if (token.find_first_not_of("0123456789") == std::string::npos) {
    const int k = std::stoi(token);
    if (k < 1 || k > d.p()) {
      throw Error("variable index " + token + " outside 1.." + std::to_string(d.p()));
    }
    return k - 1;
  }
  const Var v = d.find(token);
  if (v < 0) throw Error("no column named '" + token + "'");
  return v;
}

VarSet resolve_list(const Dataset& d, const std::string& list) {
  std::vector<Var> vars;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) vars.push_back(resolve(d, item));
  }
  return VarSet::of(vars);
}

std::uint64_t seed_of(const Settings& s) {
  if (s.seed) return *s.seed;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << seed << " (pass --seed " << seed << " to replay)\n";
  return seed;
}

int threads_of(const Settings& s) { return s.threads ? *s.threads : default_thread_count(); }

GofConfig gof_config(const Settings& s, std::uint64_t seed) {
  GofConfig cfg;
  cfg.stat = parse_statistic(s.stat);
  cfg.reps = s.reps;
  cfg.basis = BasisSpec::parse(s.basis);
  cfg.calibration = parse_calibration(s.calibration);
  cfg.denominator = parse_denominator(s.denominator);
  cfg.proof_normalization = s.proof_normalization;
  cfg.seed = seed;
  if (cfg.calibration == Calibration::oracle) {
    throw Error("oracle calibration needs the true errors and is only available in simulations");
  }
  cfg.validate();
  return cfg;
}

TestFunctionSet test_functions_of(const Settings& s) {
  return s.test_functions.empty() ? TestFunctionSet::defaults()
                                  : TestFunctionSet::parse(s.test_functions);
}

json config_json(const Settings& s, const GofConfig& cfg, const TestFunctionSet& tf) {
  json j;
  j["stat"] = to_string(cfg.stat);
  j["reps"] = cfg.reps;
  j["basis"] = cfg.basis.to_string();
  j["calibration"] = to_string(cfg.calibration);
  j["denominator"] = to_string(cfg.denominator);
  j["proof_normalization"] = cfg.proof_normalization;
  j["test_functions"] = tf.signature();
  j["standardized"] = !s.no_standardize;
  j["seed"] = cfg.seed;
  return j;
}

json names_of(const Dataset& d, const std::vector<Var>& vars) {
  json out = json::array();
  for (Var v : vars) out.push_back(d.name(v));
  return out;
}

json pair_list(const Dataset& d, const std::vector<VarPair>& pairs) {
  json out = json::array();
  for (const auto& [u, v] : pairs) out.push_back({d.name(u), d.name(v)});
  return out;
}

// ---------------------------------------------------------------------------

int cmd_gof(const Settings& s) {
  const Loaded data = load(s);
  const Dataset& d = data.used;
  const Var v = resolve(d, s.target);
  const VarSet given = resolve_list(d, s.given);
  const TestFunctionSet tf = test_functions_of(s);
  const GofConfig cfg = gof_config(s, seed_of(s));
  const auto outcome = test_an(d, v, given, tf, cfg);
  json j;
  j["target"] = d.name(v);
  j["given"] = names_of(d, given.members());
  j["p_value"] = outcome.p_value;
  j["t_obs"] = outcome.t_obs;
  j["alpha"] = s.alpha;
  j["reject"] = outcome.p_value < s.alpha;
  j["basis_rank"] = outcome.fit.basis_rank;
  j["config"] = config_json(s, cfg, tf);
  emit(s, j.dump(2) + "\n");
  return 0;
}

ConfidenceSet search(const Settings& s, const Dataset& d, double alpha, const TestFunctionSet& tf,
                     const GofConfig& cfg) {
  SearchOptions opts;
  opts.threads = threads_of(s);
  opts.budget.max_seconds = s.max_seconds;
  opts.budget.max_tests = s.max_tests;
  if (!s.quiet) {
    opts.on_level = [](const LevelStats& st) {
      std::fprintf(stderr, "level %2d: prefixes %lld, |Psi| %lld, tests %lld, pruned %lld, kept %lld%s\n",
                   st.z, static_cast<long long>(st.prefixes_in), static_cast<long long>(st.psi_count),
                   static_cast<long long>(st.tests_run), static_cast<long long>(st.pruned),
                   static_cast<long long>(st.prefixes_out), st.completed ? "" : " (budget hit)");
    };
  }
  auto cs = confidence_set(d, alpha, tf, cfg, opts);
  if (!s.quiet) {
    std::fprintf(stderr, "%zu orderings retained, %lld tests, %.2f s\n", cs.orderings.size(),
                 static_cast<long long>(cs.diagnostics.tests_run), cs.diagnostics.wall_seconds);
  }
  if (cs.empty() && s.fail_on_empty) throw EmptyExit{};
  return cs;
}

json diagnostics_json(const ConfidenceSet& cs) {
  json j;
  j["tests_run"] = cs.diagnostics.tests_run;
  j["cache_hits"] = cs.diagnostics.cache_hits;
  json levels = json::array();
  for (const auto& st : cs.diagnostics.levels) {
    levels.push_back({{"z", st.z},
                      {"prefixes_in", st.prefixes_in},
                      {"psi_count", st.psi_count},
                      {"tests_run", st.tests_run},
                      {"pruned", st.pruned},
                      {"prefixes_out", st.prefixes_out},
                      {"completed", st.completed}});
  }
  j["levels"] = levels;
  return j;
}

int cmd_confset(const Settings& s) {
  const Loaded data = load(s);
  const Dataset& d = data.used;
  const TestFunctionSet tf = test_functions_of(s);
  const GofConfig cfg = gof_config(s, seed_of(s));
  const auto cs = search(s, d, s.alpha, tf, cfg);

  if (s.out == "csv") {
    std::string text = "ordering,min_gamma,Gamma\n";
    char buf[64];
    for (const auto& acc : cs.orderings) {
      for (int i = 0; i < acc.theta.size(); ++i) text += (i ? " " : "") + d.name(acc.theta[i]);
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", acc.min_gamma, acc.Gamma);
      text += buf;
    }
    emit(s, text);
    return 0;
  }
  json j;
  j["alpha"] = cs.alpha;
  j["p"] = cs.p;
  j["variables"] = d.names();
  j["threshold"] = cs.threshold;
  j["exhausted"] = cs.exhausted;
  j["count"] = cs.orderings.size();
  json list = json::array();
  for (const auto& acc : cs.orderings) {
    list.push_back({{"perm", names_of(d, acc.theta.perm())},
                    {"min_gamma", acc.min_gamma},
                    {"Gamma", acc.Gamma}});
  }
  j["orderings"] = list;
  j["diagnostics"] = diagnostics_json(cs);
  j["config"] = config_json(s, cfg, tf);
  emit(s, j.dump(2) + "\n");
  return 0;
}

// Output for ci/ancestors/frechet when every ordering was rejected.
int report_empty(const Settings& s, const ConfidenceSet& cs) {
  json j;
  j["alpha"] = cs.alpha;
  j["empty"] = true;
  j["exhausted"] = cs.exhausted;
  j["message"] = EmptyConfidenceSet().what();
  emit(s, j.dump(2) + "\n");
  return 0;
}

int cmd_ci(const Settings& s) {
  const Loaded data = load(s);
  const Var cause = resolve(data.used, s.cause);
  const Var effect = resolve(data.used, s.effect);
  if (s.kind != "total" && s.kind != "direct") throw Error("--kind must be total or direct");
  const TestFunctionSet tf = test_functions_of(s);
  const GofConfig cfg = gof_config(s, seed_of(s));
  const auto cs = search(s, data.used, s.alpha / 2.0, tf, cfg);
  if (cs.empty()) return report_empty(s, cs);
  // Effects are reported in the units of the data as given.
  const auto result = effect_ci(data.raw, cs, cause, effect, s.alpha,
                                s.kind == "total" ? EffectKind::total : EffectKind::direct);
  json j;
  j["cause"] = data.raw.name(cause);
  j["effect"] = data.raw.name(effect);
  j["kind"] = s.kind;
  j["alpha"] = s.alpha;
  json intervals = json::array();
  for (const auto& iv : result.ci.intervals()) intervals.push_back({iv.lo, iv.hi});
  j["intervals"] = intervals;
  j["includes_zero"] = result.ci.include_zero_point() || result.ci.contains(0.0);
  j["zero_atom"] = result.ci.include_zero_point();
  j["adjustment_sets_used"] = result.adjustment_sets_used;
  j["orderings"] = cs.orderings.size();
  j["exhausted"] = cs.exhausted;
  j["config"] = config_json(s, cfg, tf);
  emit(s, j.dump(2) + "\n");
  return 0;
}

int cmd_ancestors(const Settings& s) {
  const Loaded data = load(s);
  const TestFunctionSet tf = test_functions_of(s);
  const GofConfig cfg = gof_config(s, seed_of(s));
  const auto cs = search(s, data.used, s.alpha, tf, cfg);
  if (cs.empty()) return report_empty(s, cs);
  const auto bounds = ancestral_bounds(cs);
  json j;
  j["alpha"] = s.alpha;
  j["orderings"] = cs.orderings.size();
  j["exhausted"] = cs.exhausted;
  j["lower"] = pair_list(data.used, bounds.lower);
  j["upper"] = pair_list(data.used, bounds.upper);
  j["config"] = config_json(s, cfg, tf);
  emit(s, j.dump(2) + "\n");
  return 0;
}

int cmd_frechet(const Settings& s) {
  const Loaded data = load(s);
  const TestFunctionSet tf = test_functions_of(s);
  const GofConfig cfg = gof_config(s, seed_of(s));
  const auto cs = search(s, data.used, s.alpha, tf, cfg);
  if (cs.empty()) return report_empty(s, cs);
  const auto fm = frechet_mean(cs);
  if (!s.histogram_csv.empty()) {
    std::ofstream out(s.histogram_csv);
    if (!out) throw Error("cannot write '" + s.histogram_csv + "'");
    out << "distance,count\n";
    for (std::size_t k = 0; k < fm.distance_histogram.size(); ++k) {
      out << k << "," << fm.distance_histogram[k] << "\n";
    }
  }
  json j;
  j["alpha"] = s.alpha;
  j["orderings"] = cs.orderings.size();
  j["exhausted"] = cs.exhausted;
  j["perm"] = names_of(data.used, fm.mean.perm());
  j["sum_squared_distance"] = fm.sum_squared_distance;
  j["distance_histogram"] = fm.distance_histogram;
  j["config"] = config_json(s, cfg, tf);
  emit(s, j.dump(2) + "\n");
  return 0;
}

int cmd_sim(const Settings& s, const CLI::App& sub) {
  sim::ScenarioConfig cfg;
  if (!s.config.empty()) cfg = sim::parse_scenario_config(read_file(s.config), s.config);
  if (!s.scenario.empty()) cfg.scenario = s.scenario;
  if (cfg.scenario.empty()) throw Error("no scenario given (--scenario or scenario = ... in --config)");
  if (s.seed) cfg.seed = *s.seed;
  if (s.threads) cfg.threads = *s.threads;
  else if (sub.count("--threads") == 0 && s.config.empty()) cfg.threads = default_thread_count();
  if (s.sim_reps) cfg.reps = *s.sim_reps;
  if (sub.count("--reps-bootstrap") > 0) cfg.bootstrap_reps = s.reps;
  if (sub.count("--max-seconds") > 0) cfg.max_seconds = s.max_seconds;
  if (!s.quiet) {
    std::cerr << "running scenario " << cfg.scenario << " (" << cfg.p.size() * cfg.n.size() * cfg.dist.size()
              << " cells, " << cfg.reps << " replicates each, seed " << cfg.seed << ")\n";
  }
  const auto report = sim::run_scenario(cfg);
  emit(s, report.to_csv());
  return 0;
}

void add_data_flags(CLI::App* app, Settings& s) {
  app->add_option("--data", s.data, "CSV file, one column per variable")->required()->check(CLI::ExistingFile);
  auto* nh = app->add_flag("--no-header", s.no_header, "First row is data");
  app->add_flag("--header", s.force_header, "First row holds column names")->excludes(nh);
  app->add_flag("--no-standardize", s.no_standardize, "Skip centering and scaling columns");
}

void add_test_flags(CLI::App* app, Settings& s) {
  app->add_option("--alpha", s.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  app->add_option("--reps", s.reps, "Bootstrap replicates L")->check(CLI::PositiveNumber);
  app->add_option("--stat", s.stat, "t1 or t2");
  app->add_option("--basis", s.basis, "linear, poly:<d> or poly:<d>:interact");
  app->add_option("--calibration", s.calibration, "bootstrap or gaussian_plugin");
  app->add_option("--denominator", s.denominator, "sqrt_n or sqrt_n_minus_K");
  app->add_flag("--proof-normalization", s.proof_normalization, "T2 with 1/|U| inside the root");
  app->add_option("--test-functions", s.test_functions, "e.g. square,spow:2.5,cube");
  app->add_option("--seed", s.seed, "Random seed (printed when omitted)");
  app->add_option("--output", s.output, "Write to a file instead of stdout");
  app->add_flag("--quiet", s.quiet, "No progress on stderr");
}

void add_search_flags(CLI::App* app, Settings& s) {
  app->add_option("--threads", s.threads, "Worker threads (default ORDCERT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-seconds", s.max_seconds, "Wall-clock budget")->check(CLI::PositiveNumber);
  app->add_option("--max-tests", s.max_tests, "Budget on the number of tests")->check(CLI::PositiveNumber);
  app->add_flag("--fail-on-empty", s.fail_on_empty, "Exit 2 when every ordering is rejected");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Confidence sets of causal orderings for additive-noise SEMs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Settings s;

  auto* gof = app.add_subcommand("gof", "Goodness-of-fit test of one regression");
  add_data_flags(gof, s);
  add_test_flags(gof, s);
  gof->add_option("--target", s.target, "Response variable (1-based index or name)")->required();
  gof->add_option("--given", s.given, "Regressors, comma separated")->required();

  auto* confset = app.add_subcommand("confset", "Confidence set of causal orderings");
  add_data_flags(confset, s);
  add_test_flags(confset, s);
  add_search_flags(confset, s);
  confset->add_option("--out", s.out, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* ci = app.add_subcommand("ci", "Model-uncertainty effect interval");
  add_data_flags(ci, s);
  add_test_flags(ci, s);
  add_search_flags(ci, s);
  ci->add_option("--cause", s.cause, "Cause (1-based index or name)")->required();
  ci->add_option("--effect", s.effect, "Effect (1-based index or name)")->required();
  ci->add_option("--kind", s.kind, "total or direct")->check(CLI::IsMember({"total", "direct"}));

  auto* ancestors = app.add_subcommand("ancestors", "Ancestral pairs implied by the confidence set");
  add_data_flags(ancestors, s);
  add_test_flags(ancestors, s);
  add_search_flags(ancestors, s);

  auto* frechet = app.add_subcommand("frechet", "Medoid ordering of the confidence set");
  add_data_flags(frechet, s);
  add_test_flags(frechet, s);
  add_search_flags(frechet, s);
  frechet->add_option("--histogram-csv", s.histogram_csv, "Write the distance histogram here");

  auto* simulate = app.add_subcommand("sim", "Monte Carlo studies");
  simulate->add_option("--scenario", s.scenario, "size-power, confset, ci or calibration");
  simulate->add_option("--config", s.config, "key = value scenario file")->check(CLI::ExistingFile);
  simulate->add_option("--out,--output", s.output, "Report CSV path (default stdout)");
  simulate->add_option("--seed", s.seed, "Overrides the config seed");
  simulate->add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--replicates", s.sim_reps, "Overrides reps")->check(CLI::PositiveNumber);
  simulate->add_option("--reps-bootstrap", s.reps, "Overrides L")->check(CLI::PositiveNumber);
  simulate->add_option("--max-seconds", s.max_seconds, "Per-search budget")->check(CLI::PositiveNumber);
  simulate->add_flag("--quiet", s.quiet, "No progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gof) return cmd_gof(s);
    if (*confset) return cmd_confset(s);
    if (*ci) return cmd_ci(s);
    if (*ancestors) return cmd_ancestors(s);
    if (*frechet) return cmd_frechet(s);
    if (*simulate) return cmd_sim(s, *simulate);
  } catch (const EmptyExit&) {
    std::cerr << "error: " << EmptyConfidenceSet().what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace ordcert::cli
