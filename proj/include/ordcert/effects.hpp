#pragma once

#include "ordcert/common.hpp"
#include "ordcert/dataset.hpp"
#include "ordcert/ordering.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ordcert {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of closed intervals, plus an optional {0} atom.
/// Intervals are kept sorted, disjoint and non-touching.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  /// Throws Error if some lo > hi or an endpoint is not finite.
  explicit IntervalUnion(std::vector<Interval> intervals, bool include_zero_point = false);

  void add(Interval iv);
  void add_zero_point() { zero_point_ = true; }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool include_zero_point() const { return zero_point_; }
  bool empty() const { return intervals_.empty() && !zero_point_; }

  bool contains(double x) const;
  /// Total Lebesgue length; the {0} atom has none.
  double length() const;

 private:
  void normalize();

  std::vector<Interval> intervals_;
  bool zero_point_ = false;
};

enum class EffectKind { total, direct };

struct EffectInterval {
  IntervalUnion ci;
  int adjustment_sets_used = 0;
};

/// Standard two-sided OLS interval for the coefficient of `target` when
/// regressing Y_response on an intercept and Y_regressors (target must be in
/// regressors). t quantile with n - |regressors| - 1 degrees of freedom.
Interval ols_coefficient_ci(const Dataset& d, Var response, VarSet regressors, Var target,
                            double level);

/// Model-uncertainty CI for the effect of `cause` onto `effect`.
///
/// `cs` must be computed at level alpha / 2. Total effects adjust for
/// pr(cause), direct effects for pr(effect); each distinct adjustment set
/// contributes its 1 - alpha/2 interval. The {0} atom is added when some
/// accepted ordering places the cause after the effect.
/// Throws EmptyConfidenceSet when cs is empty.
EffectInterval effect_ci(const Dataset& d, const ConfidenceSet& cs, Var cause, Var effect,
                         double alpha, EffectKind kind);
EffectInterval total_effect_ci(const Dataset& d, const ConfidenceSet& cs, Var cause, Var effect,
                               double alpha);
EffectInterval direct_effect_ci(const Dataset& d, const ConfidenceSet& cs, Var cause, Var effect,
                                double alpha);

using VarPair = std::pair<Var, Var>;

/// lower: pairs (u, v) with u before v in every accepted ordering.
/// upper: pairs with u before v in at least one.
struct AncestralBounds {
  std::vector<VarPair> lower;
  std::vector<VarPair> upper;
};

AncestralBounds ancestral_bounds(const ConfidenceSet& cs);

/// Number of pairs u before v in theta but not in theta_prime.
/// Throws Error when the orderings cover different variables.
int ordering_distance(const Ordering& theta, const Ordering& theta_prime);

struct FrechetMean {
  Ordering mean;
  std::uint64_t sum_squared_distance = 0;
  /// histogram[k] = members at distance k from the mean.
  std::vector<std::int64_t> distance_histogram;
};

/// Member of the set minimizing the sum of squared distances to all members;
/// ties go to the lexicographically smallest. Throws EmptyConfidenceSet.
FrechetMean frechet_mean(const ConfidenceSet& cs);

}  // namespace ordcert
