#pragma once

#include "ordcert/common.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ordcert {

/// An n x p sample matrix with column labels. Immutable once constructed.
///
/// Invariants: n >= 2, p >= 2, every entry finite. A column flagged as
/// standardized has sample mean 0 and sample variance 1 (denominator n - 1).
class Dataset {
 public:
  /// Throws Error when the shape or contents violate the invariants.
  /// Empty `names` generates "Y1".."Yp".
  explicit Dataset(Matrix values, std::vector<std::string> names = {},
                   std::vector<bool> standardized = {});

  int n() const { return static_cast<int>(values_.rows()); }
  int p() const { return static_cast<int>(values_.cols()); }

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(Var v) const;
  bool standardized(Var v) const;
  bool all_standardized() const;

  /// Column v in row order.
  Eigen::Ref<const Vector> column(Var v) const;

  /// Columns of `vars` in ascending index order, regardless of the order given.
  /// Throws on out-of-range or duplicate indices. An empty list yields n x 0.
  Matrix columns(std::span<const Var> vars) const;
  Matrix columns(VarSet vars) const;

  /// Index of the column called `name`, or -1.
  Var find(const std::string& name) const;

 private:
  Matrix values_;
  std::vector<std::string> names_;
  std::vector<bool> standardized_;
};

/// Reads a comma-separated file of decimal reals. Throws Error naming the
/// offending row/column on parse failure, ragged rows, or non-finite cells.
Dataset load_csv(const std::filesystem::path& path, bool has_header);

/// Parses CSV text; `source` only labels error messages.
Dataset parse_csv(const std::string& text, bool has_header, const std::string& source = "<memory>");

/// True when the first non-empty line contains a cell that is not a number.
bool csv_has_header(const std::string& text);

/// Writes a header row plus values with round-trip precision.
void write_csv(const Dataset& d, const std::filesystem::path& path);
std::string to_csv(const Dataset& d);

/// Centers each column and scales it to unit sample variance (n - 1).
/// Throws Error on a constant column.
Dataset standardize(const Dataset& d);

}  // namespace ordcert
