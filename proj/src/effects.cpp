#include "ordcert/effects.hpp"

#include "ordcert/design.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ordcert {

// ---------------------------------------------------------------------------
// IntervalUnion

IntervalUnion::IntervalUnion(std::vector<Interval> intervals, bool include_zero_point)
    : intervals_(std::move(intervals)), zero_point_(include_zero_point) {
  for (const auto& iv : intervals_) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw Error("interval endpoint is not finite");
    if (iv.lo > iv.hi) throw Error("interval has lo > hi");
  }
  normalize();
}

void IntervalUnion::add(Interval iv) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw Error("interval endpoint is not finite");
  if (iv.lo > iv.hi) throw Error("interval has lo > hi");
  intervals_.push_back(iv);
  normalize();
}

void IntervalUnion::normalize() {
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
  std::vector<Interval> merged;
  for (const auto& iv : intervals_) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

bool IntervalUnion::contains(double x) const {
  if (zero_point_ && x == 0.0) return true;
  const auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                                   [](double value, const Interval& iv) { return value < iv.lo; });
  return it != intervals_.begin() && x <= std::prev(it)->hi;
}

double IntervalUnion::length() const {
  double total = 0.0;
  for (const auto& iv : intervals_) total += iv.hi - iv.lo;
  return total;
}

// ---------------------------------------------------------------------------
// Effect intervals

Interval ols_coefficient_ci(const Dataset& d, Var response, VarSet regressors, Var target,
                            double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error("confidence level must lie in (0, 1)");
  if (!regressors.contains(target)) throw Error("target is not among the regressors");
  if (regressors.contains(response)) throw Error("response cannot be a regressor");
  const Matrix x = build_design(d, regressors, BasisSpec::linear());
  const Vector y = d.column(response);
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
  if (cod.rank() < x.cols()) throw Error("adjustment regression is rank deficient");
  const Vector coef = cod.solve(y);
  const double df = static_cast<double>(x.rows() - x.cols());
  const double sigma2 = (y - x * coef).squaredNorm() / df;
  // Column index of the target: intercept first, then ascending regressors.
  const auto members = regressors.members();
  const auto k = 1 + (std::find(members.begin(), members.end(), target) - members.begin());
  const Matrix pinv = cod.pseudoInverse();
  const double se = std::sqrt(sigma2 * pinv.row(k).squaredNorm());
  const boost::math::students_t dist(df);
  const double t = boost::math::quantile(dist, 1.0 - (1.0 - level) / 2.0);
  return {coef(k) - t * se, coef(k) + t * se};
}

EffectInterval effect_ci(const Dataset& d, const ConfidenceSet& cs, Var cause, Var effect,
                         double alpha, EffectKind kind) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  if (std::abs(cs.alpha - alpha / 2.0) > 1e-12) {
    throw Error("the confidence set must be computed at level alpha / 2");
  }
  if (cause == effect) throw Error("cause and effect must differ");
  if (cause < 0 || cause >= d.p() || effect < 0 || effect >= d.p()) {
    throw Error("variable index out of range");
  }
  if (cs.p != d.p()) throw Error("confidence set and dataset disagree on p");
  if (cs.empty()) throw EmptyConfidenceSet();

  std::set<std::uint64_t> adjustment_sets;
  bool zero_possible = false;
  for (const auto& acc : cs.orderings) {
    const auto& perm = acc.theta.perm();
    VarSet before;
    VarSet before_cause;
    bool cause_seen = false;
    for (Var w : perm) {
      if (w == cause) {
        cause_seen = true;
        before_cause = before;
      }
      if (w == effect) {
        if (!cause_seen) {
          zero_possible = true;
        } else {
          adjustment_sets.insert(kind == EffectKind::total ? before_cause.bits() : before.bits());
        }
        break;
      }
      before = before.with(w);
    }
  }

  EffectInterval out;
  const double level = 1.0 - alpha / 2.0;
  for (std::uint64_t bits : adjustment_sets) {
    const VarSet regressors = kind == EffectKind::total ? VarSet(bits).with(cause) : VarSet(bits);
    out.ci.add(ols_coefficient_ci(d, effect, regressors, cause, level));
  }
  out.adjustment_sets_used = static_cast<int>(adjustment_sets.size());
  if (zero_possible) out.ci.add_zero_point();
  return out;
}

EffectInterval total_effect_ci(const Dataset& d, const ConfidenceSet& cs, Var cause, Var effect,
                               double alpha) {
  return effect_ci(d, cs, cause, effect, alpha, EffectKind::total);
}

EffectInterval direct_effect_ci(const Dataset& d, const ConfidenceSet& cs, Var cause, Var effect,
                                double alpha) {
  return effect_ci(d, cs, cause, effect, alpha, EffectKind::direct);
}

// ---------------------------------------------------------------------------
// Ancestral bounds

AncestralBounds ancestral_bounds(const ConfidenceSet& cs) {
  if (cs.empty()) throw EmptyConfidenceSet();
  const int p = cs.p;
  std::vector<std::int64_t> before(static_cast<std::size_t>(p * p), 0);
  for (const auto& acc : cs.orderings) {
    const auto& perm = acc.theta.perm();
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) ++before[static_cast<std::size_t>(perm[i] * p + perm[j])];
    }
  }
  const auto total = static_cast<std::int64_t>(cs.orderings.size());
  AncestralBounds bounds;
  for (Var u = 0; u < p; ++u) {
    for (Var v = 0; v < p; ++v) {
      if (u == v) continue;
      const auto c = before[static_cast<std::size_t>(u * p + v)];
      if (c == total) bounds.lower.emplace_back(u, v);
      if (c > 0) bounds.upper.emplace_back(u, v);
    }
  }
  return bounds;
}

// ---------------------------------------------------------------------------
// Distances and Frechet mean

int ordering_distance(const Ordering& theta, const Ordering& theta_prime) {
  if (theta.size() != theta_prime.size() || theta.members() != theta_prime.members()) {
    throw Error("orderings must cover the same variables");
  }
  std::vector<int> pos(kMaxVars, -1);
  for (int i = 0; i < theta_prime.size(); ++i) pos[static_cast<std::size_t>(theta_prime[i])] = i;
  int d = 0;
  for (int i = 0; i < theta.size(); ++i) {
    for (int j = i + 1; j < theta.size(); ++j) {
      d += pos[static_cast<std::size_t>(theta[i])] > pos[static_cast<std::size_t>(theta[j])];
    }
  }
  return d;
}

namespace {

// Bit k(u, v) for u < v is set when u precedes v.
std::vector<int> precedence_bits(const Ordering& theta, int p) {
  std::vector<int> pos(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) pos[static_cast<std::size_t>(theta[i])] = i;
  std::vector<int> ones;
  int k = 0;
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v, ++k) {
      if (pos[static_cast<std::size_t>(u)] < pos[static_cast<std::size_t>(v)]) ones.push_back(k);
    }
  }
  return ones;
}

}  // namespace

FrechetMean frechet_mean(const ConfidenceSet& cs) {
  if (cs.empty()) throw EmptyConfidenceSet();
  const int p = cs.p;
  const int pairs = p * (p - 1) / 2;
  const auto npairs = static_cast<std::size_t>(pairs);

  // With x, y the precedence bit vectors, d = |x| + |y| - 2 x.y, so
  // sum_y d^2 expands into sums over y of |y|^2, |y|, y, |y| y and y y^T.
  std::vector<std::vector<int>> bits;
  bits.reserve(cs.orderings.size());
  std::int64_t sum_w = 0;
  std::int64_t sum_w2 = 0;
  std::vector<std::int64_t> sum_y(npairs, 0);
  std::vector<std::int64_t> sum_wy(npairs, 0);
  std::vector<std::int64_t> gram(npairs * npairs, 0);
  for (const auto& acc : cs.orderings) {
    bits.push_back(precedence_bits(acc.theta, p));
    const auto& ones = bits.back();
    const auto w = static_cast<std::int64_t>(ones.size());
    sum_w += w;
    sum_w2 += w * w;
    for (int a : ones) {
      sum_y[static_cast<std::size_t>(a)] += 1;
      sum_wy[static_cast<std::size_t>(a)] += w;
      std::int64_t* row = gram.data() + static_cast<std::size_t>(a) * npairs;
      for (int b : ones) row[b] += 1;
    }
  }
  const auto count = static_cast<std::int64_t>(cs.orderings.size());

  std::size_t best = 0;
  std::int64_t best_score = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto& ones = bits[i];
    const auto w = static_cast<std::int64_t>(ones.size());
    std::int64_t quad = 0;
    std::int64_t lin_y = 0;
    std::int64_t lin_wy = 0;
    for (int a : ones) {
      const std::int64_t* row = gram.data() + static_cast<std::size_t>(a) * npairs;
      for (int b : ones) quad += row[b];
      lin_y += sum_y[static_cast<std::size_t>(a)];
      lin_wy += sum_wy[static_cast<std::size_t>(a)];
    }
    const std::int64_t score = count * w * w + sum_w2 + 4 * quad + 2 * w * sum_w -
                               4 * w * lin_y - 4 * lin_wy;
    if (score < best_score ||
        (score == best_score && cs.orderings[i].theta < cs.orderings[best].theta)) {
      best_score = score;
      best = i;
    }
  }

  FrechetMean out;
  out.mean = cs.orderings[best].theta;
  out.sum_squared_distance = static_cast<std::uint64_t>(best_score);
  out.distance_histogram.assign(static_cast<std::size_t>(pairs + 1), 0);
  for (const auto& acc : cs.orderings) {
    ++out.distance_histogram[static_cast<std::size_t>(ordering_distance(out.mean, acc.theta))];
  }
  return out;
}

}  // namespace ordcert
