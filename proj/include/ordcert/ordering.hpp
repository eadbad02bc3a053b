#pragma once

#include "ordcert/common.hpp"
#include "ordcert/dataset.hpp"
#include "ordcert/gof.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ordcert {

/// A sequence of distinct variables; total when it covers all p variables.
/// Positions are zero-based here; the 1-based theta(v) is position(v) + 1.
class Ordering {
 public:
  Ordering() = default;
  /// Throws Error on duplicates or indices outside [0, 64).
  explicit Ordering(std::vector<Var> perm);

  static Ordering identity(int p);

  int size() const { return static_cast<int>(perm_.size()); }
  bool is_total(int p) const { return size() == p && members() == VarSet::range(0, p); }
  const std::vector<Var>& perm() const { return perm_; }
  Var operator[](int z) const { return perm_[static_cast<std::size_t>(z)]; }

  /// Zero-based position of v, or -1 when absent.
  int position(Var v) const;
  /// pr(v): variables placed before v.
  VarSet predecessors(Var v) const;
  VarSet members() const { return members_; }
  bool precedes(Var u, Var v) const { return position(u) < position(v); }

  friend bool operator==(const Ordering& a, const Ordering& b) { return a.perm_ == b.perm_; }
  friend auto operator<=>(const Ordering& a, const Ordering& b) { return a.perm_ <=> b.perm_; }

 private:
  std::vector<Var> perm_;
  VarSet members_;
};

/// The part of a GofOutcome the search keeps per (v, psi).
struct GofSummary {
  double p_value = 1.0;
  double t_obs = 0.0;
  friend bool operator==(const GofSummary&, const GofSummary&) = default;
};

/// Write-once map (v, psi) -> test summary. Safe for concurrent use; the
/// first writer wins. A cache is bound to one (dataset, test functions,
/// config) triple through its fingerprint.
class PrefixCache {
 public:
  std::optional<GofSummary> find(Var v, VarSet psi) const;
  /// Stores `value` unless the key exists; returns the stored value.
  GofSummary insert(Var v, VarSet psi, GofSummary value);
  std::size_t size() const;

  /// Binds an unbound cache; throws Error if already bound to another fingerprint.
  void bind(const std::string& fingerprint);

 private:
  struct Key {
    std::uint64_t psi;
    Var v;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  mutable std::mutex mutex_;
  std::unordered_map<Key, GofSummary, KeyHash> entries_;
  std::string fingerprint_;
};

/// Identifies everything a cached test result depends on.
std::string cache_fingerprint(const Dataset& d, const TestFunctionSet& tf, const GofConfig& cfg);

struct OrderingTest {
  double gamma_hat = 1.0;  // minimum per-level p-value
  double Gamma_hat = 1.0;  // Beta(1, p-1) aggregated p-value
  std::vector<GofOutcome> per_level;  // positions 2..p
};

/// Tests each position z = 2..p of a total ordering against its prefix.
OrderingTest test_ordering(const Dataset& d, const Ordering& theta, const TestFunctionSet& tf,
                           const GofConfig& cfg);

struct SearchBudget {
  double max_seconds = std::numeric_limits<double>::infinity();
  std::int64_t max_tests = std::numeric_limits<std::int64_t>::max();
};

struct LevelStats {
  int z = 0;
  std::int64_t prefixes_in = 0;   // surviving prefixes of length z - 1
  std::int64_t psi_count = 0;     // |Psi_z|
  std::int64_t work_items = 0;    // |Psi_z| * (p - z + 1)
  std::int64_t tests_run = 0;
  std::int64_t cache_hits = 0;
  std::int64_t prefixes_out = 0;  // surviving prefixes of length z
  std::int64_t pruned = 0;        // rejected one-step extensions
  bool completed = true;
};

struct SearchOptions {
  SearchBudget budget;
  int threads = 1;
  /// Optional cache shared across searches on the same data and config.
  PrefixCache* cache = nullptr;
  /// Called after each level, e.g. for progress output.
  std::function<void(const LevelStats&)> on_level;
};

struct AcceptedOrdering {
  Ordering theta;
  double min_gamma = 1.0;
  double Gamma = 1.0;
};

struct SearchDiagnostics {
  std::int64_t tests_run = 0;
  std::int64_t cache_hits = 0;
  std::vector<LevelStats> levels;
  double wall_seconds = 0.0;
};

/// Theta-hat(Y, alpha) = {theta : Gamma_theta >= alpha}.
struct ConfidenceSet {
  double alpha = 0.0;
  int p = 0;
  double threshold = 0.0;  // Beta(1, p-1) alpha-quantile used for pruning
  std::vector<AcceptedOrdering> orderings;  // lexicographic
  SearchDiagnostics diagnostics;
  /// False when a budget stopped the search before it finished.
  bool exhausted = true;

  bool empty() const { return orderings.empty(); }
};

/// Level-synchronous branch and bound with per-(v, psi) memoization.
/// Produces exactly the set that exhaustive test_ordering would accept.
ConfidenceSet confidence_set(const Dataset& d, double alpha, const TestFunctionSet& tf,
                             const GofConfig& cfg, const SearchOptions& options = {});

/// Membership by exact permutation equality. Throws Error on a length mismatch.
bool contains(const ConfidenceSet& cs, const Ordering& theta);
std::size_t count_orderings(const ConfidenceSet& cs);

}  // namespace ordcert
