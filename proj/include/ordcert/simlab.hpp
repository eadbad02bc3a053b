#pragma once

#include "ordcert/common.hpp"
#include "ordcert/dataset.hpp"
#include "ordcert/gof.hpp"
#include "ordcert/ordering.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace ordcert::sim {

/// Error laws, each centered to mean 0 and scaled to unit variance.
enum class ErrorDist { uniform, lognormal, gamma, weibull, laplace };

inline constexpr ErrorDist kAllErrorDists[] = {ErrorDist::uniform, ErrorDist::lognormal,
                                               ErrorDist::gamma, ErrorDist::weibull,
                                               ErrorDist::laplace};

std::string to_string(ErrorDist dist);
ErrorDist parse_error_dist(const std::string& text);

/// A fixed law for every node, or "mixed": each node draws its law uniformly.
struct ErrorChoice {
  bool mixed = false;
  ErrorDist dist = ErrorDist::gamma;

  std::string to_string() const;
  static ErrorChoice parse(const std::string& text);
};

/// Variance of exp(N(0, s2)) is 1 when exp(s2) is the golden ratio.
inline const double kLognormalLogVariance = std::log(1.0 + std::sqrt(5.0)) - std::log(2.0);
inline constexpr double kWeibullShape = 1.5;

template <class Rng>
double draw_error(ErrorDist dist, Rng& rng) {
  switch (dist) {
    case ErrorDist::uniform: {
      std::uniform_real_distribution<double> u(-std::numbers::sqrt3, std::numbers::sqrt3);
      return u(rng);
    }
    case ErrorDist::lognormal: {
      std::lognormal_distribution<double> ln(0.0, std::sqrt(kLognormalLogVariance));
      return ln(rng) - std::exp(kLognormalLogVariance / 2.0);
    }
    case ErrorDist::gamma: {
      std::gamma_distribution<double> g(1.0, 1.0);
      return g(rng) - 1.0;
    }
    case ErrorDist::weibull: {
      const double mean = std::tgamma(1.0 + 1.0 / kWeibullShape);
      const double sd = std::sqrt(std::tgamma(1.0 + 2.0 / kWeibullShape) - mean * mean);
      std::weibull_distribution<double> w(kWeibullShape, 1.0);
      return (w(rng) - mean) / sd;
    }
    case ErrorDist::laplace: {
      // Difference of two exponentials with scale b is Laplace(0, b).
      std::exponential_distribution<double> e(std::numbers::sqrt2);
      return e(rng) - e(rng);
    }
  }
  return 0.0;
}

enum class CoefficientLaw {
  uniform_pm_01_095,   // uniform on (-.95, -.1) U (.1, .95)
  rademacher_gamma,    // random sign times Gamma(shape, 1)
  uniform_pm_0_1,      // uniform on (-1, 1)
};

struct Edge {
  Var from = 0;
  Var to = 0;
  double weight = 0.0;
};

/// DAG whose edges always point from a lower to a higher index, so the
/// identity is one of its causal orderings.
class Dag {
 public:
  explicit Dag(int p, std::vector<Edge> edges = {});

  int p() const { return p_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// B with B(v, u) = weight of u -> v.
  Matrix weights() const;
  VarSet parents(Var v) const;
  VarSet ancestors(Var v) const;
  bool has_edge(Var from, Var to) const;

  /// True when every edge u -> v has u before v.
  bool is_valid_ordering(const Ordering& theta) const;
  /// Total effect of cause onto effect: entry (effect, cause) of (I - B)^-1.
  double total_effect(Var cause, Var effect) const;
  /// All (u, v) with u an ancestor of v, sorted.
  std::vector<std::pair<Var, Var>> ancestral_pairs() const;

 private:
  int p_;
  std::vector<Edge> edges_;
};

/// Chain v -> v+1 plus each u -> v (u < v - 1) with probability edge_prob.
Dag gen_graph(int p, double edge_prob, CoefficientLaw law, double gamma_shape,
              std::uint64_t seed);
/// Extra edges with probability 1/2, weights uniform on +-(.1, .95).
Dag gen_graph_gof(int p, std::uint64_t seed);
/// Extra edges with probability 1/3, weights Rademacher x Gamma(n^-1/10, 1).
Dag gen_graph_confset(int p, int n, std::uint64_t seed);
/// n^(-1/10).
double confset_gamma_shape(int n);

struct SemSpec {
  Dag dag;
  std::vector<ErrorDist> errors;  // one per node
  int n = 0;
  bool standardize = true;
};

/// One law per node; "mixed" draws each node's law from `seed`.
std::vector<ErrorDist> assign_errors(const ErrorChoice& choice, int p, std::uint64_t seed);

/// Forward simulation Y_v = sum_u B(v, u) Y_u + eps_v in index order.
Dataset sample_sem(const SemSpec& spec, std::uint64_t seed);

struct Metric {
  std::string name;
  double value = 0.0;
  double se = std::numeric_limits<double>::quiet_NaN();
  int replicates = 0;
};

struct ReportCell {
  std::string label;
  int p = 0;
  int n = 0;
  std::string dist;
  std::uint64_t seed = 0;
  std::vector<Metric> metrics;

  /// Throws Error when absent.
  const Metric& metric(const std::string& name) const;
};

struct ExperimentReport {
  std::string scenario;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::vector<ReportCell> cells;

  /// Columns: scenario,cell,p,n,dist,metric,value,se,replicates,seed
  std::string to_csv() const;
};

inline constexpr const char* kReportCsvHeader =
    "scenario,cell,p,n,dist,metric,value,se,replicates,seed";

struct StudyOptions {
  int reps = 100;
  double alpha = 0.1;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Size: reject rate of the true H0 pa(p) in {1..p-1}. Power: reject rate of
/// the false H0 pa(1) in {2..p}. Fresh graph and data per replicate.
ReportCell run_size_power(int p, int n, const ErrorChoice& dist, const StudyOptions& opts,
                          const GofConfig& cfg,
                          const TestFunctionSet& tf = TestFunctionSet::defaults());

struct ConfsetStudyOptions {
  SearchBudget budget;
  /// Weights law; the default follows the informativeness study.
  CoefficientLaw law = CoefficientLaw::rademacher_gamma;
  double edge_prob = 1.0 / 3.0;
};

/// Coverage (any valid / fixed identity ordering), retained fraction of p!,
/// recall of ancestral pairs in the lower bound, runtime, budget exhaustion.
ReportCell run_confset_study(int p, int n, const ErrorChoice& dist, const StudyOptions& opts,
                             const GofConfig& cfg, const ConfsetStudyOptions& search = {},
                             const TestFunctionSet& tf = TestFunctionSet::defaults());

struct CiStudyOptions {
  Var cause = 3;   // Y4
  Var effect = 6;  // Y7
  double gamma_shape = 0.5;
  SearchBudget budget;
};

/// Coverage and length of the model-uncertainty total-effect CI at level
/// 1 - alpha (the studies use alpha = 0.2) against single-ordering intervals
/// that adjust for pr(cause) under the true ordering (coverage_naive) or under
/// the retained ordering with the largest Gamma (coverage_naive_best).
ReportCell run_ci_study(int p, int n, const ErrorChoice& dist, const StudyOptions& opts,
                        const GofConfig& cfg, const CiStudyOptions& ci = {},
                        const TestFunctionSet& tf = TestFunctionSet::defaults());

/// Equicorrelated (rho = .2) log-normal regressors, Y = X 1 + lognormal error,
/// single test function y^2; sizes of bootstrap, gaussian_plugin and oracle
/// calibration at level opts.alpha.
ReportCell run_calibration_study(int p, int n, const StudyOptions& opts, int bootstrap_reps);

/// Key = value scenario file; comma lists form a grid.
struct ScenarioConfig {
  std::string scenario;  // size-power | confset | ci | calibration
  std::vector<int> p = {10};
  std::vector<int> n = {100};
  std::vector<std::string> dist = {"gamma"};
  int reps = 100;
  double alpha = 0.1;
  int bootstrap_reps = 500;
  Statistic stat = Statistic::T2;
  BasisSpec basis = BasisSpec::linear();
  std::uint64_t seed = 1;
  int threads = 1;
  double max_seconds = std::numeric_limits<double>::infinity();
  Var cause = 3;
  Var effect = 6;
};

/// Throws Error on unknown keys or malformed values.
ScenarioConfig parse_scenario_config(const std::string& text,
                                     const std::string& source = "<memory>");

/// Runs every grid cell; cell c uses seed hash(seed, c).
ExperimentReport run_scenario(const ScenarioConfig& config);

}  // namespace ordcert::sim
