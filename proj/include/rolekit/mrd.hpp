#pragma once

// Multi-relational role discovery: non-negative Tucker decomposition
//   V ~= core x1 G x2 F x3 R,   G, F, R, core >= 0
// fitted by alternating non-negative least squares. Factor updates are
// row-separable NNLS problems sharing one Gram matrix; the core update is a
// single NNLS problem in vec(core).

#include "rolekit/error.hpp"
#include "rolekit/numkit/nnls.hpp"
#include "rolekit/numkit/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rolekit::mrd {

using numkit::Tensor3;

enum class Factor { kG = 0, kF = 1, kR = 2 };

inline const char* to_string(Factor f) {
  switch (f) {
    case Factor::kG: return "G";
    case Factor::kF: return "F";
    case Factor::kR: return "R";
  }
  return "?";
}

inline Factor parse_factor(const std::string& s) {
  if (s == "G" || s == "g") return Factor::kG;
  if (s == "F" || s == "f") return Factor::kF;
  if (s == "R" || s == "r") return Factor::kR;
  throw ConfigError("mrd", "unknown factor '" + s + "' (expected G, F or R)");
}

struct TuckerModel {
  Eigen::MatrixXd G;  // n x p, E-groups
  Eigen::MatrixXd F;  // f x q, roles
  Eigen::MatrixXd R;  // m x s, R-groups
  Tensor3 core;       // p x q x s
  double objective = 0.0;  // ||V - reconstruction||_F
  double fit = 1.0;        // 1 - objective / ||V||_F
  std::uint64_t seed = 0;
  int iterations = 0;
  std::array<bool, 3> fixed{false, false, false};
  std::vector<std::string> entity_labels;
  std::vector<std::string> feature_labels;
  std::vector<std::string> relation_labels;
  std::vector<std::string> warnings;

  Eigen::MatrixXd& factor(Factor f) { return f == Factor::kG ? G : f == Factor::kF ? F : R; }
  const Eigen::MatrixXd& factor(Factor f) const { return f == Factor::kG ? G : f == Factor::kF ? F : R; }
};

enum class CoreSolver {
  kExplicit,    // forms R (x) F (x) G, guarded by the memory budget
  kStructured,  // Gram = kron of factor Grams; never forms the big matrix
};

// Memory budget for the explicit Kronecker matrix, from ROLEKIT_KRON_BUDGET_MB
// (default 512 MiB).
inline std::size_t default_kron_budget_bytes() {
  if (const char* env = std::getenv("ROLEKIT_KRON_BUDGET_MB")) {
    char* end = nullptr;
    const double mb = std::strtod(env, &end);
    if (end != env && mb > 0.0) return static_cast<std::size_t>(mb * 1024.0 * 1024.0);
  }
  return std::size_t{512} * 1024 * 1024;
}

struct TuckerStep {
  int iteration = 0;
  std::string stage;  // "G", "F", "R" (after normalization) or "core"
  double objective = 0.0;
};

struct TuckerConfig {
  Eigen::Index p = 1, q = 1, s = 1;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iters = 300;
  std::optional<Eigen::MatrixXd> fixed_G, fixed_F, fixed_R;
  CoreSolver core_solver = CoreSolver::kExplicit;
  std::size_t kron_budget_bytes = default_kron_budget_bytes();
  std::function<void(const TuckerStep&)> on_step;
};

inline Tensor3 reconstruct(const TuckerModel& m) { return numkit::tucker_product(m.core, m.G, m.F, m.R); }

inline double residual_norm(const Tensor3& v, const TuckerModel& m) {
  const Tensor3 rec = reconstruct(m);
  double s = 0.0;
  for (std::size_t i = 0; i < v.values().size(); ++i) {
    const double d = v.values()[i] - rec.values()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double fit_value(double objective, double vnorm) { return vnorm > 0.0 ? 1.0 - objective / vnorm : 1.0; }

// The matrix B with V_(d) ~= X B for the factor X of the given mode:
// B = core_(d) (kron of the other two factors, higher mode on the left)^T.
inline Eigen::MatrixXd mode_design(const TuckerModel& m, Factor mode) {
  const int d = static_cast<int>(mode) + 1;
  const Eigen::MatrixXd core_unf = numkit::matricize(m.core, d);
  switch (mode) {
    case Factor::kG: return core_unf * numkit::kron(m.R, m.F).transpose();
    case Factor::kF: return core_unf * numkit::kron(m.R, m.G).transpose();
    case Factor::kR: return core_unf * numkit::kron(m.F, m.G).transpose();
  }
  return {};
}

// Row-wise NNLS solve for one factor with everything else held fixed.
inline Eigen::MatrixXd update_factor(const Tensor3& v, const TuckerModel& m, Factor mode) {
  const Eigen::MatrixXd unf = numkit::matricize(v, static_cast<int>(mode) + 1);
  const Eigen::MatrixXd design = mode_design(m, mode);
  const Eigen::MatrixXd gram = design * design.transpose();
  const Eigen::MatrixXd rhs = design * unf.transpose();  // one column per factor row
  Eigen::MatrixXd out(unf.rows(), design.rows());
  for (Eigen::Index i = 0; i < unf.rows(); ++i) out.row(i) = numkit::nnls_gram(gram, rhs.col(i)).transpose();
  return out;
}

// Scales each nonzero column of `factor` to unit L2 norm and multiplies the
// matching core slab by the removed norm, leaving the reconstruction
// unchanged. Returns one flag per column, true where the column was zero.
inline std::vector<bool> normalize_columns(Eigen::MatrixXd& factor, Tensor3& core, Factor mode) {
  const int axis = static_cast<int>(mode);
  if (factor.cols() != core.dim(axis)) throw ConfigError("mrd", "factor/core dimension mismatch");
  std::vector<bool> zero(static_cast<std::size_t>(factor.cols()), false);
  for (Eigen::Index c = 0; c < factor.cols(); ++c) {
    const double nrm = factor.col(c).norm();
    if (nrm == 0.0) {
      zero[static_cast<std::size_t>(c)] = true;
      continue;
    }
    factor.col(c) /= nrm;
    for (Eigen::Index a = 0; a < core.dim(0); ++a)
      for (Eigen::Index b = 0; b < core.dim(1); ++b)
        for (Eigen::Index e = 0; e < core.dim(2); ++e) {
          const Eigen::Index idx = axis == 0 ? a : axis == 1 ? b : e;
          if (idx == c) core(a, b, e) *= nrm;
        }
  }
  return zero;
}

inline Tensor3 update_core(const Tensor3& v, const TuckerModel& m, CoreSolver solver = CoreSolver::kExplicit,
                           std::size_t budget_bytes = default_kron_budget_bytes()) {
  const Eigen::Index p = m.G.cols(), q = m.F.cols(), s = m.R.cols();
  Eigen::MatrixXd gram;
  Eigen::VectorXd atb;
  if (solver == CoreSolver::kExplicit) {
    const double bytes = static_cast<double>(v.size()) * static_cast<double>(p * q * s) * sizeof(double);
    if (bytes > static_cast<double>(budget_bytes)) {
      throw SizeError("mrd", "explicit Kronecker matrix needs " + std::to_string(static_cast<long long>(bytes / 1048576.0)) +
                                 " MiB, over the budget of " + std::to_string(budget_bytes / 1048576) +
                                 " MiB; use smaller core dims, the structured core solver, or raise "
                                 "ROLEKIT_KRON_BUDGET_MB");
    }
    const Eigen::MatrixXd k = numkit::kron(m.R, numkit::kron(m.F, m.G));
    gram = k.transpose() * k;
    atb = k.transpose() * numkit::vectorize(v);
  } else {
    gram = numkit::kron(m.R.transpose() * m.R,
                        numkit::kron(m.F.transpose() * m.F, m.G.transpose() * m.G));
    atb = numkit::vectorize(numkit::tucker_product(v, m.G.transpose(), m.F.transpose(), m.R.transpose()));
  }
  return numkit::unvectorize(numkit::nnls_gram(gram, atb), p, q, s);
}

namespace detail {

inline void check_tensor(const Tensor3& v) {
  for (double x : v.values()) {
    if (!std::isfinite(x) || x < 0.0) throw InputError("mrd", "tensor must be finite and non-negative");
  }
}

inline Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

// Zeroes core(.., c, ..) along `mode`.
inline void clear_slab(Tensor3& core, Factor mode, Eigen::Index c) {
  const int axis = static_cast<int>(mode);
  for (Eigen::Index a = 0; a < core.dim(0); ++a)
    for (Eigen::Index b = 0; b < core.dim(1); ++b)
      for (Eigen::Index e = 0; e < core.dim(2); ++e)
        if ((axis == 0 ? a : axis == 1 ? b : e) == c) core(a, b, e) = 0.0;
}

inline bool slab_is_zero(const Tensor3& core, Factor mode, Eigen::Index c) {
  const int axis = static_cast<int>(mode);
  for (Eigen::Index a = 0; a < core.dim(0); ++a)
    for (Eigen::Index b = 0; b < core.dim(1); ++b)
      for (Eigen::Index e = 0; e < core.dim(2); ++e)
        if ((axis == 0 ? a : axis == 1 ? b : e) == c && core(a, b, e) != 0.0) return false;
  return true;
}

// Alternating loop from an initialized model; fixed factors are never
// touched (neither updated nor normalized). A column an update zeroes would
// stay zero for good (its design row vanishes), so it is redrawn at random
// with its core slab cleared: the reconstruction is unchanged and the next
// core solve decides whether to use it.
inline void run(const Tensor3& v, TuckerModel& m, const TuckerConfig& cfg, std::mt19937_64& rng) {
  const double vnorm = v.norm();
  double objective = residual_norm(v, m);
  int it = 0;
  while (it < cfg.max_iters) {
    ++it;
    const double before = objective;
    for (Factor mode : {Factor::kG, Factor::kF, Factor::kR}) {
      if (m.fixed[static_cast<std::size_t>(mode)]) continue;
      Eigen::MatrixXd& x = m.factor(mode);
      x = update_factor(v, m, mode);
      const auto zero = normalize_columns(x, m.core, mode);
      for (std::size_t c = 0; c < zero.size(); ++c) {
        if (!zero[c]) continue;
        const auto col = static_cast<Eigen::Index>(c);
        x.col(col) = uniform(x.rows(), 1, rng);
        x.col(col).normalize();
        clear_slab(m.core, mode, col);
      }
      if (cfg.on_step) cfg.on_step({it, to_string(mode), residual_norm(v, m)});
    }
    m.core = update_core(v, m, cfg.core_solver, cfg.kron_budget_bytes);
    objective = residual_norm(v, m);
    if (cfg.on_step) cfg.on_step({it, "core", objective});
    if (before == 0.0 || std::abs(before - objective) / before < cfg.tol) break;
  }
  m.iterations = it;
  m.objective = objective;
  m.fit = fit_value(objective, vnorm);
  m.warnings.clear();
  for (Factor mode : {Factor::kG, Factor::kF, Factor::kR})
    for (Eigen::Index c = 0; c < m.factor(mode).cols(); ++c)
      if (slab_is_zero(m.core, mode, c))
        m.warnings.push_back(std::string("column ") + std::to_string(c + 1) + " of " + to_string(mode) +
                             " carries no core weight");
}

inline void validate(const Tensor3& v, const TuckerConfig& cfg) {
  check_tensor(v);
  const Eigen::Index n = v.dim(0), f = v.dim(1), mm = v.dim(2);
  if (cfg.p < 1 || cfg.q < 1 || cfg.s < 1) throw ConfigError("mrd", "core dimensions must be >= 1");
  if (cfg.p > n || cfg.q > f || cfg.s > mm) throw ConfigError("mrd", "core dimensions exceed tensor dimensions");
  if (cfg.max_iters < 0 || !(cfg.tol >= 0.0)) throw ConfigError("mrd", "invalid stopping parameters");
  auto check_fixed = [](const std::optional<Eigen::MatrixXd>& x, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (!x) return;
    if (x->rows() != rows || x->cols() != cols) {
      throw TransferError(std::string("fixed ") + name + " is " + std::to_string(x->rows()) + "x" +
                          std::to_string(x->cols()) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (x->size() > 0 && x->minCoeff() < 0.0) throw InputError("mrd", std::string("fixed ") + name + " must be non-negative");
  };
  check_fixed(cfg.fixed_G, n, cfg.p, "G");
  check_fixed(cfg.fixed_F, f, cfg.q, "F");
  check_fixed(cfg.fixed_R, mm, cfg.s, "R");
}

}  // namespace detail

inline TuckerModel fit(const Tensor3& v, const TuckerConfig& cfg) {
  detail::validate(v, cfg);
  std::mt19937_64 rng(cfg.seed);
  TuckerModel m;
  m.seed = cfg.seed;
  m.G = detail::uniform(v.dim(0), cfg.p, rng);
  m.F = detail::uniform(v.dim(1), cfg.q, rng);
  m.R = detail::uniform(v.dim(2), cfg.s, rng);
  const Eigen::MatrixXd core0 = detail::uniform(cfg.p, cfg.q * cfg.s, rng);
  m.core = numkit::fold(core0, 1, cfg.p, cfg.q, cfg.s);
  if (cfg.fixed_G) { m.G = *cfg.fixed_G; m.fixed[0] = true; }
  if (cfg.fixed_F) { m.F = *cfg.fixed_F; m.fixed[1] = true; }
  if (cfg.fixed_R) { m.R = *cfg.fixed_R; m.fixed[2] = true; }
  detail::run(v, m, cfg, rng);
  return m;
}

inline TuckerModel fit_best(const Tensor3& v, TuckerConfig cfg, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("mrd", "at least one seed is required");
  std::optional<TuckerModel> best;
  for (auto s : seeds) {
    cfg.seed = s;
    TuckerModel m = fit(v, cfg);
    if (!best || m.fit > best->fit) best = std::move(m);
  }
  return std::move(*best);
}

// Fits `target` with the named factors of `source` held constant. Free
// blocks whose shape matches the source start from the source values (a
// deterministic warm start); the rest start from cfg.seed. Core dims come
// from the source.
inline TuckerModel transfer_fit(const Tensor3& target, const TuckerModel& source, std::span<const Factor> fix,
                                TuckerConfig cfg = {}) {
  detail::check_tensor(target);
  const std::array<Eigen::Index, 3> modes{target.dim(0), target.dim(1), target.dim(2)};
  const char* mode_names[3] = {"entity (G)", "feature (F)", "relation (R)"};
  cfg.p = source.G.cols();
  cfg.q = source.F.cols();
  cfg.s = source.R.cols();
  cfg.fixed_G.reset();
  cfg.fixed_F.reset();
  cfg.fixed_R.reset();
  for (Factor f : fix) {
    const auto idx = static_cast<std::size_t>(f);
    const Eigen::MatrixXd& x = source.factor(f);
    if (x.rows() != modes[idx]) {
      throw TransferError(std::string("cannot transfer ") + to_string(f) + ": " + mode_names[idx] + " mode has " +
                          std::to_string(modes[idx]) + " entries but the source factor has " + std::to_string(x.rows()));
    }
    if (f == Factor::kG) cfg.fixed_G = x;
    if (f == Factor::kF) cfg.fixed_F = x;
    if (f == Factor::kR) cfg.fixed_R = x;
  }
  detail::validate(target, cfg);

  std::mt19937_64 rng(cfg.seed);
  TuckerModel m;
  m.seed = cfg.seed;
  m.G = detail::uniform(modes[0], cfg.p, rng);
  m.F = detail::uniform(modes[1], cfg.q, rng);
  m.R = detail::uniform(modes[2], cfg.s, rng);
  m.core = source.core;
  for (Factor f : {Factor::kG, Factor::kF, Factor::kR}) {
    const auto idx = static_cast<std::size_t>(f);
    if (source.factor(f).rows() == modes[idx]) m.factor(f) = source.factor(f);
  }
  for (Factor f : fix) m.fixed[static_cast<std::size_t>(f)] = true;
  m.entity_labels = source.entity_labels.size() == static_cast<std::size_t>(modes[0]) ? source.entity_labels
                                                                                       : std::vector<std::string>{};
  m.feature_labels = source.feature_labels;
  m.relation_labels = source.relation_labels;
  detail::run(target, m, cfg, rng);
  return m;
}

}  // namespace rolekit::mrd
