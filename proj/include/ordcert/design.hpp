#pragma once

#include "ordcert/common.hpp"
#include "ordcert/dataset.hpp"

#include <string>

namespace ordcert {

/// Regression basis for f_v. The intercept is always the first column.
///
/// Column order is canonical: intercept, then for each regressor in ascending
/// index its powers 1..degree, then (with interaction) the mixed monomials of
/// total degree 2..degree in graded lexicographic order of their exponent vectors.
struct BasisSpec {
  enum class Kind { linear, polynomial };

  Kind kind = Kind::linear;
  int degree = 3;
  bool interaction = false;

  static BasisSpec linear() { return {}; }
  static BasisSpec polynomial(int degree = 3, bool interaction = false) {
    return {Kind::polynomial, degree, interaction};
  }

  /// Number of design columns K for `regressors` variables.
  int num_columns(int regressors) const;

  /// "linear", "poly:3", "poly:3:interact".
  std::string to_string() const;
  static BasisSpec parse(const std::string& text);

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// n x K design matrix for regressing on the variables in `regressors`.
/// Throws Error when K >= n.
Matrix build_design(const Dataset& d, VarSet regressors, const BasisSpec& spec);

/// Least-squares fit of a response on a design.
struct Fit {
  Vector coefficients;
  Vector fitted;
  Vector residuals;
  int basis_rank = 0;

  bool rank_deficient() const { return basis_rank < coefficients.size(); }
};

/// Minimum-norm least squares via complete orthogonal decomposition.
/// Rank deficiency is reported through Fit::basis_rank, not as an error.
/// Throws Error on non-finite input or when rows <= cols.
Fit least_squares(const Matrix& design, const Vector& response);

}  // namespace ordcert
