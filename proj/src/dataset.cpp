#include "ordcert/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace ordcert {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string unquote(std::string_view cell) {
  if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
    cell = cell.substr(1, cell.size() - 2);
  }
  return std::string(cell);
}

// from_chars accepts "inf"/"nan"; the caller rejects non-finite values.
bool parse_real(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string cell_ref(const std::string& source, std::size_t line, std::size_t col) {
  return source + ":" + std::to_string(line) + " column " + std::to_string(col);
}

}  // namespace

Dataset::Dataset(Matrix values, std::vector<std::string> names, std::vector<bool> standardized)
    : values_(std::move(values)), names_(std::move(names)), standardized_(std::move(standardized)) {
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw Error("dataset needs n >= 2 rows and p >= 2 columns, got " +
                std::to_string(values_.rows()) + " x " + std::to_string(values_.cols()));
  }
  if (values_.cols() > kMaxVars) {
    throw Error("at most " + std::to_string(kMaxVars) + " variables are supported");
  }
  if (!values_.allFinite()) throw Error("dataset contains non-finite values");
  if (names_.empty()) {
    for (int v = 0; v < p(); ++v) names_.push_back("Y" + std::to_string(v + 1));
  }
  if (static_cast<int>(names_.size()) != p()) throw Error("column name count does not match p");
  if (standardized_.empty()) standardized_.assign(static_cast<std::size_t>(p()), false);
  if (static_cast<int>(standardized_.size()) != p()) {
    throw Error("standardization flag count does not match p");
  }
}

const std::string& Dataset::name(Var v) const {
  if (v < 0 || v >= p()) throw Error("variable index out of range: " + std::to_string(v));
  return names_[static_cast<std::size_t>(v)];
}

bool Dataset::standardized(Var v) const {
  if (v < 0 || v >= p()) throw Error("variable index out of range: " + std::to_string(v));
  return standardized_[static_cast<std::size_t>(v)];
}

bool Dataset::all_standardized() const {
  for (bool s : standardized_) {
    if (!s) return false;
  }
  return true;
}

Eigen::Ref<const Vector> Dataset::column(Var v) const {
  if (v < 0 || v >= p()) throw Error("variable index out of range: " + std::to_string(v));
  return values_.col(v);
}

Matrix Dataset::columns(std::span<const Var> vars) const {
  VarSet set = VarSet::of(std::vector<Var>(vars.begin(), vars.end()));
  return columns(set);
}

Matrix Dataset::columns(VarSet vars) const {
  const auto members = vars.members();
  Matrix out(n(), static_cast<Eigen::Index>(members.size()));
  for (std::size_t k = 0; k < members.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = column(members[k]);
  }
  return out;
}

Var Dataset::find(const std::string& name) const {
  for (std::size_t v = 0; v < names_.size(); ++v) {
    if (names_[v] == name) return static_cast<Var>(v);
  }
  return -1;
}

bool csv_has_header(const std::string& text) {
  for (auto line : split_lines(text)) {
    if (trim(line).empty()) continue;
    for (auto cell : split_cells(line)) {
      double x = 0.0;
      if (!parse_real(cell, x)) return true;
    }
    return false;
  }
  return false;
}

Dataset parse_csv(const std::string& text, bool has_header, const std::string& source) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool header_pending = has_header;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_cells(lines[i]);
    const std::size_t line_no = i + 1;
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw Error(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                  " columns, found " + std::to_string(cells.size()));
    }
    if (header_pending) {
      for (auto cell : cells) names.push_back(unquote(cell));
      header_pending = false;
      continue;
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_real(cells[c], row[c])) {
        throw Error("cannot parse '" + std::string(cells[c]) + "' as a real at " +
                    cell_ref(source, line_no, c + 1));
      }
      if (!std::isfinite(row[c])) {
        throw Error("non-finite value '" + std::string(cells[c]) + "' at " +
                    cell_ref(source, line_no, c + 1));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2 || width < 2) {
    throw Error(source + ": need at least 2 data rows and 2 columns, found " +
                std::to_string(rows.size()) + " x " + std::to_string(width));
  }
  Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return Dataset(std::move(values), std::move(names));
}

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), has_header, path.string());
}

std::string to_csv(const Dataset& d) {
  std::string out;
  for (int v = 0; v < d.p(); ++v) {
    if (v > 0) out += ',';
    out += d.name(v);
  }
  out += '\n';
  char buf[32];
  for (int i = 0; i < d.n(); ++i) {
    for (int v = 0; v < d.p(); ++v) {
      if (v > 0) out += ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d.values()(i, v));
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv(d);
}

Dataset standardize(const Dataset& d) {
  Matrix values = d.values();
  const double n = static_cast<double>(d.n());
  for (int v = 0; v < d.p(); ++v) {
    auto col = values.col(v);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / (n - 1.0);
    if (!(var > 0.0)) throw Error("column '" + d.name(v) + "' is constant; cannot standardize");
    col /= std::sqrt(var);
  }
  return Dataset(std::move(values), d.names(), std::vector<bool>(static_cast<std::size_t>(d.p()), true));
}

}  // namespace ordcert
