#include "ordcert/design.hpp"

#include <functional>

namespace ordcert {

namespace {

long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Exponent vectors with the given total degree and at least two nonzero
// entries, in descending lexicographic order.
void mixed_monomials(int vars, int total, std::vector<std::vector<int>>& out) {
  std::vector<int> exps(static_cast<std::size_t>(vars), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == vars - 1) {
      exps[static_cast<std::size_t>(pos)] = left;
      int nonzero = 0;
      for (int e : exps) nonzero += e > 0;
      if (nonzero >= 2) out.push_back(exps);
      return;
    }
    for (int e = left; e >= 0; --e) {
      exps[static_cast<std::size_t>(pos)] = e;
      rec(pos + 1, left - e);
    }
  };
  if (vars >= 2) rec(0, total);
}

}  // namespace

int BasisSpec::num_columns(int regressors) const {
  if (kind == Kind::linear) return regressors + 1;
  if (!interaction) return 1 + regressors * degree;
  return static_cast<int>(binomial(regressors + degree, degree));
}

std::string BasisSpec::to_string() const {
  if (kind == Kind::linear) return "linear";
  return "poly:" + std::to_string(degree) + (interaction ? ":interact" : "");
}

BasisSpec BasisSpec::parse(const std::string& text) {
  if (text == "linear") return linear();
  if (text.rfind("poly", 0) == 0) {
    BasisSpec spec = polynomial();
    std::string rest = text.substr(4);
    if (!rest.empty()) {
      if (rest.front() != ':') throw Error("malformed basis '" + text + "'");
      rest.erase(0, 1);
      const auto colon = rest.find(':');
      const std::string degree = rest.substr(0, colon);
      try {
        std::size_t used = 0;
        spec.degree = std::stoi(degree, &used);
        if (used != degree.size()) throw Error("");
      } catch (const std::exception&) {
        throw Error("malformed basis degree in '" + text + "'");
      }
      if (colon != std::string::npos) {
        if (rest.substr(colon + 1) != "interact") throw Error("malformed basis '" + text + "'");
        spec.interaction = true;
      }
    }
    if (spec.degree < 1) throw Error("basis degree must be positive");
    return spec;
  }
  throw Error("unknown basis '" + text + "' (expected linear or poly:<degree>[:interact])");
}

Matrix build_design(const Dataset& d, VarSet regressors, const BasisSpec& spec) {
  if (spec.kind == BasisSpec::Kind::polynomial && spec.degree < 1) {
    throw Error("basis degree must be positive");
  }
  const auto vars = regressors.members();
  for (Var u : vars) {
    if (u >= d.p()) throw Error("regressor index out of range: " + std::to_string(u));
  }
  const int k = spec.num_columns(static_cast<int>(vars.size()));
  if (k >= d.n()) {
    throw Error("design has " + std::to_string(k) + " columns but only " + std::to_string(d.n()) +
                " rows");
  }
  Matrix x(d.n(), k);
  x.col(0).setOnes();
  Eigen::Index c = 1;
  if (spec.kind == BasisSpec::Kind::linear) {
    for (Var u : vars) x.col(c++) = d.column(u);
    return x;
  }
  for (Var u : vars) {
    const auto y = d.column(u);
    x.col(c) = y;
    ++c;
    for (int power = 2; power <= spec.degree; ++power, ++c) {
      x.col(c) = x.col(c - 1).cwiseProduct(y);
    }
  }
  if (spec.interaction) {
    std::vector<std::vector<int>> monomials;
    for (int total = 2; total <= spec.degree; ++total) {
      mixed_monomials(static_cast<int>(vars.size()), total, monomials);
    }
    for (const auto& exps : monomials) {
      auto col = x.col(c++);
      col.setOnes();
      for (std::size_t i = 0; i < exps.size(); ++i) {
        for (int e = 0; e < exps[i]; ++e) col = col.cwiseProduct(d.column(vars[i]));
      }
    }
  }
  return x;
}

Fit least_squares(const Matrix& design, const Vector& response) {
  if (design.rows() != response.size()) throw Error("design and response lengths differ");
  if (design.rows() <= design.cols()) {
    throw Error("least squares needs more rows than columns");
  }
  if (!design.allFinite() || !response.allFinite()) {
    throw Error("least squares input contains non-finite values");
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  Fit fit;
  fit.coefficients = cod.solve(response);
  fit.fitted = design * fit.coefficients;
  fit.residuals = response - fit.fitted;
  fit.basis_rank = static_cast<int>(cod.rank());
  return fit;
}

}  // namespace ordcert
