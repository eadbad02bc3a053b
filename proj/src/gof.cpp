#include "ordcert/gof.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ordcert {

namespace {

constexpr Eigen::Index kReplicateBlock = 64;

double signed_power(double y, double k) {
  if (y == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(y), k), y);
}

double parse_exponent(const std::string& name, const std::string& text) {
  try {
    std::size_t used = 0;
    const double k = std::stod(text, &used);
    if (used == text.size() && std::isfinite(k)) return k;
  } catch (const std::exception&) {
  }
  throw Error("malformed exponent in test function '" + name + "'");
}

bool is_affine(const std::function<double(double)>& map) {
  static constexpr double kProbe[] = {-3.0, -2.0, -1.5, -1.0, -0.5, -0.25, 0.0,
                                      0.3,  0.7,  1.0,  1.5,  2.0,  3.0};
  constexpr int m = static_cast<int>(std::size(kProbe));
  Matrix x(m, 2);
  Vector y(m);
  for (int i = 0; i < m; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = kProbe[i];
    y(i) = map(kProbe[i]);
  }
  if (!y.allFinite()) throw Error("test function is not finite on the probe grid");
  const Vector coef = x.colPivHouseholderQr().solve(y);
  const double resid = (y - x * coef).cwiseAbs().maxCoeff();
  return resid <= 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());
}

void check_regression(const Dataset& d, Var v, VarSet regressors) {
  if (v < 0 || v >= d.p()) throw Error("target index out of range: " + std::to_string(v));
  if (regressors.empty()) throw Error("the regressor set must be nonempty");
  if (regressors.contains(v)) throw Error("the target must not be among the regressors");
  for (Var u : regressors.members()) {
    if (u >= d.p()) throw Error("regressor index out of range: " + std::to_string(u));
  }
}

// Combines the m = J |U| raw inner products h_j(Y_u)^T r (grouped by u) into T.
double statistic_from_products(const double* products, int regressors, int functions,
                               double denom, const GofConfig& cfg, std::vector<double>* tau_out) {
  double tau_buf[kMaxVars];
  for (int u = 0; u < regressors; ++u) {
    double sq = 0.0;
    for (int j = 0; j < functions; ++j) {
      const double t = products[u * functions + j] / denom;
      sq += t * t;
    }
    tau_buf[u] = std::sqrt(sq);
  }
  if (tau_out != nullptr) tau_out->assign(tau_buf, tau_buf + regressors);
  return combine_tau(std::span<const double>(tau_buf, static_cast<std::size_t>(regressors)),
                     cfg.stat, cfg.proof_normalization);
}

}  // namespace

// ---------------------------------------------------------------------------
// TestFunctionSet

TestFunctionSet::TestFunctionSet(std::vector<Function> functions, bool standardize_outputs)
    : functions_(std::move(functions)), standardize_outputs_(standardize_outputs) {
  if (functions_.empty()) throw Error("at least one test function is required");
  for (const auto& f : functions_) {
    if (!f.map) throw Error("test function '" + f.name + "' is empty");
    if (is_affine(f.map)) {
      throw Error("test function '" + f.name + "' is affine and would give a zero statistic");
    }
  }
}

TestFunctionSet TestFunctionSet::defaults() {
  return TestFunctionSet({named("square"), named("spow:2.5"), named("cube")}, true);
}

TestFunctionSet TestFunctionSet::unchecked(std::vector<Function> functions,
                                           bool standardize_outputs) {
  if (functions.empty()) throw Error("at least one test function is required");
  TestFunctionSet set;
  set.functions_ = std::move(functions);
  set.standardize_outputs_ = standardize_outputs;
  return set;
}

TestFunctionSet TestFunctionSet::parse(const std::string& names, bool standardize_outputs) {
  std::vector<Function> fns;
  std::stringstream ss(names);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) fns.push_back(named(item));
  }
  return TestFunctionSet(std::move(fns), standardize_outputs);
}

TestFunctionSet::Function TestFunctionSet::named(const std::string& name) {
  if (name == "square") return {name, [](double y) { return y * y; }};
  if (name == "cube") return {name, [](double y) { return y * y * y; }};
  if (name == "abs") return {name, [](double y) { return std::abs(y); }};
  if (name == "tanh") return {name, [](double y) { return std::tanh(y); }};
  if (name.rfind("spow:", 0) == 0) {
    const double k = parse_exponent(name, name.substr(5));
    return {name, [k](double y) { return signed_power(y, k); }};
  }
  if (name.rfind("pow:", 0) == 0) {
    const double k = parse_exponent(name, name.substr(4));
    if (k != std::floor(k) || k < 0) throw Error("pow:<k> needs a nonnegative integer k");
    return {name, [k](double y) { return std::pow(y, k); }};
  }
  throw Error("unknown test function '" + name + "'");
}

Matrix TestFunctionSet::evaluate(const Dataset& d, VarSet regressors) const {
  const auto vars = regressors.members();
  const int j_count = size();
  Matrix h(d.n(), static_cast<Eigen::Index>(vars.size()) * j_count);
  const double n = static_cast<double>(d.n());
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const auto y = d.column(vars[k]);
    for (int j = 0; j < j_count; ++j) {
      auto col = h.col(static_cast<Eigen::Index>(k) * j_count + j);
      const auto& map = functions_[static_cast<std::size_t>(j)].map;
      for (Eigen::Index i = 0; i < d.n(); ++i) col(i) = map(y(i));
      if (!col.allFinite()) {
        throw Error("test function '" + functions_[static_cast<std::size_t>(j)].name +
                    "' produced a non-finite value");
      }
      if (standardize_outputs_) {
        col.array() -= col.mean();
        const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
        if (sd > 0.0) col /= sd;
      }
    }
  }
  return h;
}

std::string TestFunctionSet::signature() const {
  std::string sig;
  for (const auto& f : functions_) {
    if (!sig.empty()) sig += ',';
    sig += f.name;
  }
  return sig + (standardize_outputs_ ? ";std" : ";raw");
}

// ---------------------------------------------------------------------------
// Config

std::string to_string(Statistic s) { return s == Statistic::T1 ? "t1" : "t2"; }

std::string to_string(Denominator d) {
  return d == Denominator::sqrt_n ? "sqrt_n" : "sqrt_n_minus_K";
}

std::string to_string(Calibration c) {
  switch (c) {
    case Calibration::bootstrap: return "bootstrap";
    case Calibration::gaussian_plugin: return "gaussian_plugin";
    case Calibration::oracle: return "oracle";
  }
  return "bootstrap";
}

Statistic parse_statistic(const std::string& text) {
  if (text == "t1" || text == "T1") return Statistic::T1;
  if (text == "t2" || text == "T2") return Statistic::T2;
  throw Error("unknown statistic '" + text + "' (expected t1 or t2)");
}

Denominator parse_denominator(const std::string& text) {
  if (text == "sqrt_n") return Denominator::sqrt_n;
  if (text == "sqrt_n_minus_K" || text == "sqrt_n_minus_k") return Denominator::sqrt_n_minus_K;
  throw Error("unknown denominator '" + text + "' (expected sqrt_n or sqrt_n_minus_K)");
}

Calibration parse_calibration(const std::string& text) {
  if (text == "bootstrap") return Calibration::bootstrap;
  if (text == "gaussian_plugin" || text == "gaussian-plugin") return Calibration::gaussian_plugin;
  if (text == "oracle") return Calibration::oracle;
  throw Error("unknown calibration '" + text + "'");
}

void GofConfig::validate() const {
  if (reps < 1) throw Error("bootstrap replicate count L must be at least 1");
  if (basis.kind == BasisSpec::Kind::polynomial && basis.degree < 1) {
    throw Error("basis degree must be positive");
  }
}

// ---------------------------------------------------------------------------
// Statistic

double tau_j(Eigen::Ref<const Vector> h, Eigen::Ref<const Vector> residuals, double denom) {
  if (h.size() != residuals.size()) throw Error("tau_j: length mismatch");
  if (!(denom > 0.0) || !std::isfinite(denom)) throw Error("tau_j: denominator must be positive");
  const double value = h.dot(residuals) / denom;
  if (!std::isfinite(value)) throw Error("tau_j: non-finite input");
  return value;
}

double statistic_denominator(Denominator kind, int n, int design_columns) {
  const double m = kind == Denominator::sqrt_n ? n : n - design_columns;
  if (!(m > 0.0)) throw Error("statistic denominator is not positive");
  return std::sqrt(m);
}

double combine_tau(std::span<const double> tau, Statistic stat, bool proof_normalization) {
  if (tau.empty()) throw Error("no regressors to aggregate");
  const double count = static_cast<double>(tau.size());
  if (stat == Statistic::T1) {
    double sum = 0.0;
    for (double t : tau) sum += std::abs(t);
    return sum / count;
  }
  double sq = 0.0;
  for (double t : tau) sq += t * t;
  const double weight = proof_normalization ? 1.0 / count : 1.0 / std::sqrt(count);
  return std::sqrt(weight * sq);
}

double rank_pvalue(double t_obs, std::span<const double> t_reps) {
  std::size_t exceed = 0;
  for (double t : t_reps) exceed += t_obs < t ? 1 : 0;
  return static_cast<double>(1 + exceed) / static_cast<double>(t_reps.size() + 1);
}

StatisticResult statistic(const Dataset& d, Var v, VarSet regressors, const TestFunctionSet& tf,
                          const GofConfig& cfg) {
  return statistic(d, v, regressors, tf, cfg, Vector(d.column(v)));
}

StatisticResult statistic(const Dataset& d, Var v, VarSet regressors, const TestFunctionSet& tf,
                          const GofConfig& cfg, const Vector& response) {
  check_regression(d, v, regressors);
  if (response.size() != d.n()) throw Error("response override has the wrong length");
  const Matrix x = build_design(d, regressors, cfg.basis);
  StatisticResult result;
  result.fit = least_squares(x, response);
  if (result.fit.basis_rank == 0) throw Error("design matrix has rank 0");
  const Matrix h = tf.evaluate(d, regressors);
  const double denom = statistic_denominator(cfg.denominator, d.n(), static_cast<int>(x.cols()));
  const Vector products = h.transpose() * result.fit.residuals;
  if (!products.allFinite()) throw Error("statistic: non-finite inner products");
  result.t = statistic_from_products(products.data(), regressors.size(), tf.size(), denom, cfg,
                                     &result.tau);
  return result;
}

std::uint64_t replicate_key(std::uint64_t seed, Var v, VarSet regressors, int rep) {
  return hash_words({seed, static_cast<std::uint64_t>(v), regressors.bits(),
                     static_cast<std::uint64_t>(rep)});
}

GofOutcome test_an(const Dataset& d, Var v, VarSet regressors, const TestFunctionSet& tf,
                   const GofConfig& cfg, const ErrorSampler& oracle_errors) {
  cfg.validate();
  check_regression(d, v, regressors);
  if (cfg.calibration == Calibration::oracle && !oracle_errors) {
    throw Error("oracle calibration needs an error sampler");
  }

  const Eigen::Index n = d.n();
  const Matrix x = build_design(d, regressors, cfg.basis);
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
  if (cod.rank() == 0) throw Error("design matrix has rank 0");

  GofOutcome out;
  out.config = cfg;
  const Vector y = d.column(v);
  out.fit.coefficients = cod.solve(y);
  out.fit.fitted = x * out.fit.coefficients;
  out.fit.residuals = y - out.fit.fitted;
  out.fit.basis_rank = static_cast<int>(cod.rank());

  // Rows of `projected` are ((I - P) h_j(Y_u))^T, so one product with a
  // response gives every h^T r at once, r being the residual of that response.
  const Matrix h = tf.evaluate(d, regressors);
  const Matrix projected = (h - x * cod.solve(h)).transpose();
  const double denom = statistic_denominator(cfg.denominator, static_cast<int>(n),
                                             static_cast<int>(x.cols()));
  const int u_count = regressors.size();
  const int j_count = tf.size();

  const Vector observed = h.transpose() * out.fit.residuals;
  if (!observed.allFinite()) throw Error("statistic: non-finite inner products");
  out.t_obs = statistic_from_products(observed.data(), u_count, j_count, denom, cfg, nullptr);

  const double sigma = std::sqrt(out.fit.residuals.squaredNorm() /
                                 static_cast<double>(std::max<Eigen::Index>(1, n - out.fit.basis_rank)));
  const double* resid = out.fit.residuals.data();
  const double* fitted = out.fit.fitted.data();
  const auto n_u = static_cast<std::uint64_t>(n);

  out.t_reps.resize(static_cast<std::size_t>(cfg.reps));
  Matrix responses(n, std::min<Eigen::Index>(kReplicateBlock, cfg.reps));
  Matrix products(projected.rows(), responses.cols());
  for (int start = 0; start < cfg.reps; start += kReplicateBlock) {
    const int block = std::min<int>(kReplicateBlock, cfg.reps - start);
    for (int b = 0; b < block; ++b) {
      CounterRng rng(replicate_key(cfg.seed, v, regressors, start + b));
      double* col = responses.col(b).data();
      switch (cfg.calibration) {
        case Calibration::bootstrap:
          for (Eigen::Index i = 0; i < n; ++i) col[i] = fitted[i] + resid[rng.below(n_u)];
          break;
        case Calibration::gaussian_plugin: {
          std::normal_distribution<double> normal(0.0, sigma);
          for (Eigen::Index i = 0; i < n; ++i) col[i] = fitted[i] + normal(rng);
          break;
        }
        case Calibration::oracle:
          for (Eigen::Index i = 0; i < n; ++i) col[i] = fitted[i] + oracle_errors(rng);
          break;
      }
    }
    products.leftCols(block).noalias() = projected * responses.leftCols(block);
    for (int b = 0; b < block; ++b) {
      out.t_reps[static_cast<std::size_t>(start + b)] =
          statistic_from_products(products.col(b).data(), u_count, j_count, denom, cfg, nullptr);
    }
  }
  out.p_value = rank_pvalue(out.t_obs, out.t_reps);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

double min_pvalue_quantile(double alpha, int p) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  if (p < 2) throw Error("p must be at least 2");
  return -std::expm1(std::log1p(-alpha) / static_cast<double>(p - 1));
}

double aggregate_pvalue(double min_gamma, int p) {
  if (!(min_gamma > 0.0 && min_gamma <= 1.0)) throw Error("min p-value must lie in (0, 1]");
  if (p < 2) throw Error("p must be at least 2");
  return -std::expm1(static_cast<double>(p - 1) * std::log1p(-min_gamma));
}

}  // namespace ordcert
