#include "ordcert/ordering.hpp"

#include "ordcert/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstring>
#include <numeric>

namespace ordcert {

// ---------------------------------------------------------------------------
// Ordering

Ordering::Ordering(std::vector<Var> perm) : perm_(std::move(perm)), members_(VarSet::of(perm_)) {}

Ordering Ordering::identity(int p) {
  std::vector<Var> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  return Ordering(std::move(perm));
}

int Ordering::position(Var v) const {
  const auto it = std::find(perm_.begin(), perm_.end(), v);
  return it == perm_.end() ? -1 : static_cast<int>(it - perm_.begin());
}

VarSet Ordering::predecessors(Var v) const {
  VarSet pr;
  for (Var u : perm_) {
    if (u == v) return pr;
    pr = pr.with(u);
  }
  throw Error("variable " + std::to_string(v) + " is not in the ordering");
}

// ---------------------------------------------------------------------------
// PrefixCache

std::size_t PrefixCache::KeyHash::operator()(const Key& k) const noexcept {
  return static_cast<std::size_t>(mix64(k.psi * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k.v)));
}

std::optional<GofSummary> PrefixCache::find(Var v, VarSet psi) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(Key{psi.bits(), v});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

GofSummary PrefixCache::insert(Var v, VarSet psi, GofSummary value) {
  std::lock_guard lock(mutex_);
  return entries_.try_emplace(Key{psi.bits(), v}, value).first->second;
}

std::size_t PrefixCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void PrefixCache::bind(const std::string& fingerprint) {
  std::lock_guard lock(mutex_);
  if (fingerprint_.empty()) {
    fingerprint_ = fingerprint;
  } else if (fingerprint_ != fingerprint) {
    throw Error("prefix cache was filled for a different dataset or configuration");
  }
}

std::string cache_fingerprint(const Dataset& d, const TestFunctionSet& tf, const GofConfig& cfg) {
  std::uint64_t h = hash_words({static_cast<std::uint64_t>(d.n()), static_cast<std::uint64_t>(d.p())});
  const double* data = d.values().data();
  for (Eigen::Index i = 0; i < d.values().size(); ++i) {
    h = mix64(h ^ std::bit_cast<std::uint64_t>(data[i]));
  }
  return "data=" + std::to_string(h) + ";tf=" + tf.signature() + ";stat=" + to_string(cfg.stat) +
         ";L=" + std::to_string(cfg.reps) + ";denom=" + to_string(cfg.denominator) +
         ";cal=" + to_string(cfg.calibration) + ";basis=" + cfg.basis.to_string() +
         ";seed=" + std::to_string(cfg.seed) + ";proof=" + (cfg.proof_normalization ? "1" : "0");
}

// ---------------------------------------------------------------------------
// Single ordering

OrderingTest test_ordering(const Dataset& d, const Ordering& theta, const TestFunctionSet& tf,
                           const GofConfig& cfg) {
  if (!theta.is_total(d.p())) throw Error("test_ordering needs a total ordering of all variables");
  OrderingTest result;
  VarSet prefix = VarSet().with(theta[0]);
  for (int z = 1; z < theta.size(); ++z) {
    auto outcome = test_an(d, theta[z], prefix, tf, cfg);
    result.gamma_hat = std::min(result.gamma_hat, outcome.p_value);
    result.per_level.push_back(std::move(outcome));
    prefix = prefix.with(theta[z]);
  }
  result.Gamma_hat = aggregate_pvalue(result.gamma_hat, d.p());
  return result;
}

// ---------------------------------------------------------------------------
// Branch and bound

namespace {

// Surviving prefixes of one length, stored flat.
struct PrefixLevel {
  int length = 0;
  std::vector<Var> vars;             // count * length
  std::vector<double> running_min;   // count
  std::vector<std::uint64_t> masks;  // count

  std::size_t count() const { return running_min.size(); }
  const Var* prefix(std::size_t i) const { return vars.data() + i * static_cast<std::size_t>(length); }
};

// Index of v among the variables outside `mask` (ascending).
int rank_outside(std::uint64_t mask, Var v) {
  const std::uint64_t below = (std::uint64_t{1} << v) - 1;
  return v - std::popcount(mask & below);
}

}  // namespace

ConfidenceSet confidence_set(const Dataset& d, double alpha, const TestFunctionSet& tf,
                             const GofConfig& cfg, const SearchOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  cfg.validate();
  if (cfg.calibration == Calibration::oracle) {
    throw Error("oracle calibration is not available for confidence sets");
  }
  const int p = d.p();
  ConfidenceSet cs;
  cs.alpha = alpha;
  cs.p = p;
  cs.threshold = min_pvalue_quantile(alpha, p);
  if (options.cache != nullptr) options.cache->bind(cache_fingerprint(d, tf, cfg));

  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  PrefixLevel level;
  level.length = 1;
  for (Var v = 0; v < p; ++v) {
    level.vars.push_back(v);
    level.running_min.push_back(1.0);
    level.masks.push_back(VarSet().with(v).bits());
  }

  std::atomic<std::int64_t> tests_started{0};
  std::atomic<bool> stop{false};
  const std::uint64_t all = VarSet::range(0, p).bits();

  for (int z = 2; z <= p && level.count() > 0; ++z) {
    LevelStats stats;
    stats.z = z;
    stats.prefixes_in = static_cast<std::int64_t>(level.count());

    std::vector<std::uint64_t> psi = level.masks;
    std::sort(psi.begin(), psi.end());
    psi.erase(std::unique(psi.begin(), psi.end()), psi.end());
    const int outside = p - z + 1;
    stats.psi_count = static_cast<std::int64_t>(psi.size());
    stats.work_items = stats.psi_count * outside;

    const auto items = static_cast<std::size_t>(stats.work_items);
    std::vector<GofSummary> results(items);
    std::vector<char> state(items, 0);  // 0 = not run, 1 = computed, 2 = cache hit

    parallel_for(items, options.threads, [&](std::size_t item) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::uint64_t mask = psi[item / static_cast<std::size_t>(outside)];
      const int which = static_cast<int>(item % static_cast<std::size_t>(outside));
      // The `which`-th variable outside the mask.
      std::uint64_t rest = all & ~mask;
      for (int k = 0; k < which; ++k) rest &= rest - 1;
      const Var v = std::countr_zero(rest);
      const VarSet set(mask);
      if (options.cache != nullptr) {
        if (auto hit = options.cache->find(v, set)) {
          results[item] = *hit;
          state[item] = 2;
          return;
        }
      }
      if (tests_started.fetch_add(1) >= options.budget.max_tests ||
          elapsed() > options.budget.max_seconds) {
        stop.store(true);
        return;
      }
      const auto outcome = test_an(d, v, set, tf, cfg);
      GofSummary summary{outcome.p_value, outcome.t_obs};
      if (options.cache != nullptr) summary = options.cache->insert(v, set, summary);
      results[item] = summary;
      state[item] = 1;
    });

    for (char s : state) {
      stats.tests_run += s == 1;
      stats.cache_hits += s == 2;
    }
    stats.completed = !stop.load();

    PrefixLevel next;
    next.length = z;
    for (std::size_t i = 0; i < level.count(); ++i) {
      const std::uint64_t mask = level.masks[i];
      const auto psi_index =
          static_cast<std::size_t>(std::lower_bound(psi.begin(), psi.end(), mask) - psi.begin());
      const std::size_t base = psi_index * static_cast<std::size_t>(outside);
      for (std::uint64_t rest = all & ~mask; rest != 0; rest &= rest - 1) {
        const Var v = std::countr_zero(rest);
        const std::size_t item = base + static_cast<std::size_t>(rank_outside(mask, v));
        if (state[item] == 0) continue;
        const double pv = results[item].p_value;
        if (pv < cs.threshold) continue;
        const Var* pre = level.prefix(i);
        next.vars.insert(next.vars.end(), pre, pre + level.length);
        next.vars.push_back(v);
        next.running_min.push_back(std::min(level.running_min[i], pv));
        next.masks.push_back(mask | (std::uint64_t{1} << v));
      }
    }
    stats.prefixes_out = static_cast<std::int64_t>(next.count());
    stats.pruned = stats.prefixes_in * outside - stats.prefixes_out;
    cs.diagnostics.tests_run += stats.tests_run;
    cs.diagnostics.cache_hits += stats.cache_hits;
    cs.diagnostics.levels.push_back(stats);
    if (options.on_level) options.on_level(stats);
    level = std::move(next);

    if (!stats.completed) {
      cs.exhausted = false;
      // Only total orderings whose every level was tested may be reported.
      if (z != p) level = PrefixLevel{};
      break;
    }
  }

  if (level.length == p) {
    std::vector<std::size_t> order(level.count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(level.prefix(a), level.prefix(a) + p, level.prefix(b),
                                          level.prefix(b) + p);
    });
    cs.orderings.reserve(order.size());
    for (std::size_t i : order) {
      AcceptedOrdering acc;
      acc.theta = Ordering(std::vector<Var>(level.prefix(i), level.prefix(i) + p));
      acc.min_gamma = level.running_min[i];
      acc.Gamma = aggregate_pvalue(acc.min_gamma, p);
      cs.orderings.push_back(std::move(acc));
    }
  }
  cs.diagnostics.wall_seconds = elapsed();
  return cs;
}

bool contains(const ConfidenceSet& cs, const Ordering& theta) {
  if (theta.size() != cs.p) {
    throw Error("ordering has length " + std::to_string(theta.size()) + ", expected " +
                std::to_string(cs.p));
  }
  const auto it = std::lower_bound(
      cs.orderings.begin(), cs.orderings.end(), theta,
      [](const AcceptedOrdering& a, const Ordering& t) { return a.theta < t; });
  return it != cs.orderings.end() && it->theta == theta;
}

std::size_t count_orderings(const ConfidenceSet& cs) { return cs.orderings.size(); }

}  // namespace ordcert
