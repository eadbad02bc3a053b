#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Zero-based variable (column) index.
using Var = int;

/// Largest number of variables a VarSet can hold.
inline constexpr int kMaxVars = 64;

/// Invalid input, malformed data or violated precondition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by effect post-processing when the confidence set holds no ordering.
/// An empty set means every ordering was rejected, i.e. the model class was rejected.
class EmptyConfidenceSet : public Error {
 public:
  EmptyConfidenceSet() : Error("confidence set is empty: every causal ordering was rejected") {}
};

/// A set of variables stored as a bitmask. Iteration is always ascending,
/// which makes it the canonical form used for cache keys and design columns.
class VarSet {
 public:
  constexpr VarSet() = default;
  constexpr explicit VarSet(std::uint64_t bits) : bits_(bits) {}

  static VarSet of(const std::vector<Var>& vars);
  static VarSet range(Var first, Var last);  // [first, last)

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(Var v) const { return (bits_ >> v) & 1U; }

  constexpr VarSet with(Var v) const { return VarSet(bits_ | (std::uint64_t{1} << v)); }
  constexpr VarSet without(Var v) const { return VarSet(bits_ & ~(std::uint64_t{1} << v)); }

  /// Members in ascending order.
  std::vector<Var> members() const;

  friend constexpr bool operator==(VarSet a, VarSet b) = default;
  friend constexpr auto operator<=>(VarSet a, VarSet b) = default;

 private:
  std::uint64_t bits_ = 0;
};

}  // namespace ordcert
