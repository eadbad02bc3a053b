#include "ordcert/common.hpp"

#include <string>

namespace ordcert {

VarSet VarSet::of(const std::vector<Var>& vars) {
  VarSet set;
  for (Var v : vars) {
    if (v < 0 || v >= kMaxVars) throw Error("variable index out of range: " + std::to_string(v));
    if (set.contains(v)) throw Error("duplicate variable index: " + std::to_string(v));
    set = set.with(v);
  }
  return set;
}

VarSet VarSet::range(Var first, Var last) {
  VarSet set;
  for (Var v = first; v < last; ++v) set = set.with(v);
  return set;
}

std::vector<Var> VarSet::members() const {
  std::vector<Var> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (std::uint64_t rest = bits_; rest != 0; rest &= rest - 1) {
    out.push_back(std::countr_zero(rest));
  }
  return out;
}

}  // namespace ordcert
