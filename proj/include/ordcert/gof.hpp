#pragma once

#include "ordcert/common.hpp"
#include "ordcert/dataset.hpp"
#include "ordcert/design.hpp"
#include "ordcert/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ordcert {

/// The maps h_j applied to each regressor. Their correlation with the
/// regression residuals is what the statistic measures.
class TestFunctionSet {
 public:
  struct Function {
    std::string name;
    std::function<double(double)> map;
  };

  /// Throws Error when the list is empty, a map is affine, or a map is
  /// non-finite on a probe grid. Affine maps give identically zero statistics.
  explicit TestFunctionSet(std::vector<Function> functions, bool standardize_outputs = true);

  /// {y^2, sign(y)|y|^2.5, y^3} with standardized outputs.
  static TestFunctionSet defaults();

  /// Skips the affine check. For diagnostics and tests of degenerate cases.
  static TestFunctionSet unchecked(std::vector<Function> functions, bool standardize_outputs = true);

  /// Builds a set from names: "square", "cube", "spow:<k>" (sign(y)|y|^k),
  /// "pow:<k>", "abs", "tanh". Comma separated.
  static TestFunctionSet parse(const std::string& names, bool standardize_outputs = true);

  /// A single named function; throws Error on an unknown name.
  static Function named(const std::string& name);

  int size() const { return static_cast<int>(functions_.size()); }
  bool standardize_outputs() const { return standardize_outputs_; }
  const std::vector<Function>& functions() const { return functions_; }

  /// n x (J |U|) matrix: for each u in ascending order, the J columns h_j(Y_u),
  /// standardized per column when the flag is set. Constant columns are left centered.
  Matrix evaluate(const Dataset& d, VarSet regressors) const;

  /// Comma-joined names plus the standardization flag; identifies the set in cache keys.
  std::string signature() const;

 private:
  TestFunctionSet() = default;

  std::vector<Function> functions_;
  bool standardize_outputs_ = true;
};

enum class Statistic { T1, T2 };
enum class Denominator { sqrt_n, sqrt_n_minus_K };
enum class Calibration { bootstrap, gaussian_plugin, oracle };

std::string to_string(Statistic s);
std::string to_string(Denominator d);
std::string to_string(Calibration c);
Statistic parse_statistic(const std::string& text);
Denominator parse_denominator(const std::string& text);
Calibration parse_calibration(const std::string& text);

struct GofConfig {
  Statistic stat = Statistic::T2;
  int reps = 500;  // L
  Denominator denominator = Denominator::sqrt_n_minus_K;
  Calibration calibration = Calibration::bootstrap;
  BasisSpec basis = BasisSpec::linear();
  std::uint64_t seed = 0;
  /// T2 with 1/|U| inside the radical instead of 1/sqrt(|U|).
  bool proof_normalization = false;

  void validate() const;
  friend bool operator==(const GofConfig&, const GofConfig&) = default;
};

/// Draws one error for oracle calibration. Simulation use only.
using ErrorSampler = std::function<double(CounterRng&)>;

struct StatisticResult {
  double t = 0.0;
  Fit fit;
  std::vector<double> tau;  // one per regressor, ascending
};

struct GofOutcome {
  double p_value = 1.0;
  double t_obs = 0.0;
  std::vector<double> t_reps;
  Fit fit;
  GofConfig config;
};

/// (1/denom) h^T residuals.
double tau_j(Eigen::Ref<const Vector> h, Eigen::Ref<const Vector> residuals, double denom);

/// sqrt(n) or sqrt(n - K).
double statistic_denominator(Denominator kind, int n, int design_columns);

/// T1 = mean of tau_u; T2 = sqrt(sum tau_u^2 / sqrt(|U|)), or / |U| under proof normalization.
double combine_tau(std::span<const double> tau, Statistic stat, bool proof_normalization);

/// (1 + #{l : t_obs < t_reps[l]}) / (L + 1).
double rank_pvalue(double t_obs, std::span<const double> t_reps);

/// Statistic for regressing Y_v (or `response`) on the basis of Y_U.
/// Throws Error when U is empty, contains v, or the design has rank 0.
StatisticResult statistic(const Dataset& d, Var v, VarSet regressors, const TestFunctionSet& tf,
                          const GofConfig& cfg);
StatisticResult statistic(const Dataset& d, Var v, VarSet regressors, const TestFunctionSet& tf,
                          const GofConfig& cfg, const Vector& response);

/// Residual-bootstrap test of H0: pa(v) in U in nd(v).
///
/// Replicate l resamples from the stream keyed by (seed, v, U, l), so the
/// outcome depends only on the arguments, never on call order or threads.
/// Oracle calibration requires `oracle_errors`.
GofOutcome test_an(const Dataset& d, Var v, VarSet regressors, const TestFunctionSet& tf,
                   const GofConfig& cfg, const ErrorSampler& oracle_errors = {});

/// Stream key for bootstrap replicate `rep` of the test (v, U).
std::uint64_t replicate_key(std::uint64_t seed, Var v, VarSet regressors, int rep);

/// alpha-quantile of Beta(1, p - 1): 1 - (1 - alpha)^(1/(p-1)).
double min_pvalue_quantile(double alpha, int p);

/// Beta(1, p - 1) CDF at the minimum p-value: 1 - (1 - min_gamma)^(p-1).
double aggregate_pvalue(double min_gamma, int p);

}  // namespace ordcert
