#pragma once

// Guided role discovery: V ~= G F with G, F >= 0 and extra convex
// constraints on the columns of G and/or rows of F. Each sweep visits the
// roles in order and, for role k, solves the rank-one least-squares problem
// against the residual of the other roles, then projects the minimizer onto
// the feasible set. Because the objective restricted to one role vector is an
// isotropic quadratic around that minimizer, the projection is the exact
// constrained optimum and the objective never increases.

#include "rolekit/error.hpp"
#include "rolekit/numkit/lsq.hpp"
#include "rolekit/numkit/projection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rolekit::glrd {

enum class ConstraintKind { kNone, kSparsity, kDiversity, kAlternative };
enum class Side { kG, kF };  // columns of G / rows of F

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kNone: return "none";
    case ConstraintKind::kSparsity: return "sparsity";
    case ConstraintKind::kDiversity: return "diversity";
    case ConstraintKind::kAlternative: return "alternative";
  }
  return "none";
}

inline ConstraintKind parse_kind(const std::string& s) {
  if (s == "none") return ConstraintKind::kNone;
  if (s == "sparsity" || s == "sparse") return ConstraintKind::kSparsity;
  if (s == "diversity" || s == "diverse") return ConstraintKind::kDiversity;
  if (s == "alternative") return ConstraintKind::kAlternative;
  throw ConfigError("glrd", "unknown constraint kind '" + s + "'");
}

inline const char* to_string(Side s) { return s == Side::kG ? "G" : "F"; }

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::kNone;
  Side target = Side::kF;
  double eps = 0.0;
  // G* (n x r') for G-side or F* (r' x f) for F-side alternative constraints.
  Eigen::MatrixXd reference;

  static ConstraintSpec sparsity(Side side, double eps) { return {ConstraintKind::kSparsity, side, eps, {}}; }
  static ConstraintSpec diversity(Side side, double eps) { return {ConstraintKind::kDiversity, side, eps, {}}; }
  static ConstraintSpec alternative(Side side, Eigen::MatrixXd ref, double eps) {
    return {ConstraintKind::kAlternative, side, eps, std::move(ref)};
  }
};

struct RoleModel {
  Eigen::MatrixXd G;  // n x r
  Eigen::MatrixXd F;  // r x f
  double objective = 0.0;       // ||V - G F||_F
  double relative_error = 0.0;  // objective / ||V||_F
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<ConstraintSpec> g_constraints;
  std::vector<ConstraintSpec> f_constraints;
  std::vector<std::string> row_labels;
  std::vector<std::string> feature_labels;
  std::vector<std::string> warnings;

  Eigen::Index rank() const noexcept { return G.cols(); }
};

// Objective reported after every role-vector update.
struct SubStep {
  int sweep = 0;
  Eigen::Index role = 0;
  Side side = Side::kG;
  double objective = 0.0;
};

struct FitOptions {
  Eigen::Index rank = 1;
  std::vector<ConstraintSpec> g_constraints;
  std::vector<ConstraintSpec> f_constraints;
  std::uint64_t seed = 0;
  int max_sweeps = 200;
  double tol = 1e-6;
  std::function<void(const SubStep&)> on_step;
};

// V - sum_{j != k} G(:,j) F(j,:)
inline Eigen::MatrixXd residual_excluding(const Eigen::MatrixXd& v, const Eigen::MatrixXd& g,
                                          const Eigen::MatrixXd& f, Eigen::Index k) {
  if (k < 0 || k >= g.cols()) throw ConfigError("glrd", "role index out of range");
  Eigen::MatrixXd gk = g;
  gk.col(k).setZero();
  return v - gk * f;
}

// Projects x onto {x >= 0} and every constraint in `constraints`. `current`
// is the factor being updated (G or F) so diversity can read the other
// role vectors; `k` is the role under update.
inline Eigen::VectorXd project_role_vector(const Eigen::VectorXd& x, Side side,
                                          std::span<const ConstraintSpec> constraints,
                                          const Eigen::MatrixXd& current, Eigen::Index k) {
  numkit::HalfspaceSet halfspaces;
  std::optional<double> l1;
  auto vec_of = [&](const Eigen::MatrixXd& m, Eigen::Index i) -> Eigen::VectorXd {
    return side == Side::kG ? Eigen::VectorXd(m.col(i)) : Eigen::VectorXd(m.row(i).transpose());
  };
  const Eigen::Index count = side == Side::kG ? current.cols() : current.rows();

  for (const auto& c : constraints) {
    switch (c.kind) {
      case ConstraintKind::kNone:
        break;
      case ConstraintKind::kSparsity:
        l1 = l1 ? std::min(*l1, c.eps) : c.eps;
        break;
      case ConstraintKind::kDiversity:
        for (Eigen::Index i = 0; i < count; ++i) {
          if (i != k) halfspaces.push_back({vec_of(current, i), c.eps});
        }
        break;
      case ConstraintKind::kAlternative: {
        const Eigen::Index refs = side == Side::kG ? c.reference.cols() : c.reference.rows();
        for (Eigen::Index i = 0; i < refs; ++i) halfspaces.push_back({vec_of(c.reference, i), c.eps});
        break;
      }
    }
  }
  if (halfspaces.empty()) return l1 ? numkit::project_l1_nonneg(x, *l1) : numkit::clamp_nonneg(x);
  // On the orthant ||x||_1 = 1^T x, so sparsity joins the halfspace list.
  if (l1) halfspaces.push_back({Eigen::VectorXd::Ones(x.size()), *l1});
  return numkit::project_halfspaces_nonneg(x, halfspaces);
}

// One constrained role-vector solve: unconstrained rank-one minimizer, then
// Euclidean projection. `fixed` is F(k,:) when solving G(:,k) and G(:,k) when
// solving F(k,:).
inline Eigen::VectorXd update_role_vector(const Eigen::MatrixXd& residual, const Eigen::VectorXd& fixed, Side side,
                                          std::span<const ConstraintSpec> constraints,
                                          const Eigen::MatrixXd& current, Eigen::Index k) {
  const Eigen::VectorXd unconstrained = side == Side::kG ? numkit::least_squares_col(residual, fixed)
                                                         : numkit::least_squares_row(residual, fixed);
  return project_role_vector(unconstrained, side, constraints, current, k);
}

// Largest amount by which any constraint of the model is exceeded (<= 0 when
// all hold), including negativity of G or F.
inline double constraint_violation(const RoleModel& m) {
  double worst = std::max(-m.G.minCoeff(), -m.F.minCoeff());
  auto check = [&](const std::vector<ConstraintSpec>& cs, Side side) {
    const Eigen::MatrixXd& cur = side == Side::kG ? m.G : m.F;
    const Eigen::Index count = side == Side::kG ? cur.cols() : cur.rows();
    auto vec = [&](const Eigen::MatrixXd& mat, Eigen::Index i) -> Eigen::VectorXd {
      return side == Side::kG ? Eigen::VectorXd(mat.col(i)) : Eigen::VectorXd(mat.row(i).transpose());
    };
    for (const auto& c : cs) {
      for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::VectorXd x = vec(cur, i);
        switch (c.kind) {
          case ConstraintKind::kNone: break;
          case ConstraintKind::kSparsity: worst = std::max(worst, x.lpNorm<1>() - c.eps); break;
          case ConstraintKind::kDiversity:
            for (Eigen::Index j = 0; j < count; ++j) {
              if (j != i) worst = std::max(worst, x.dot(vec(cur, j)) - c.eps);
            }
            break;
          case ConstraintKind::kAlternative: {
            const Eigen::Index refs = side == Side::kG ? c.reference.cols() : c.reference.rows();
            for (Eigen::Index j = 0; j < refs; ++j) worst = std::max(worst, x.dot(vec(c.reference, j)) - c.eps);
            break;
          }
        }
      }
    }
  };
  check(m.g_constraints, Side::kG);
  check(m.f_constraints, Side::kF);
  return worst;
}

namespace detail {

inline void validate_constraints(const std::vector<ConstraintSpec>& cs, Side side, Eigen::Index n, Eigen::Index f) {
  for (const auto& c : cs) {
    if (c.target != side) throw ConfigError("glrd", std::string("constraint targets the wrong factor (expected ") + to_string(side) + ")");
    if (!(c.eps >= 0.0)) throw ConfigError("glrd", "constraint eps must be >= 0");
    if (c.kind == ConstraintKind::kAlternative) {
      const bool ok = side == Side::kG ? (c.reference.rows() == n && c.reference.cols() > 0)
                                       : (c.reference.cols() == f && c.reference.rows() > 0);
      if (!ok) throw ConfigError("glrd", "alternative reference has incompatible dimensions");
      if (c.reference.size() > 0 && c.reference.minCoeff() < 0.0) {
        throw InputError("glrd", "alternative reference must be non-negative");
      }
    }
  }
}

}  // namespace detail

inline RoleModel fit(const Eigen::MatrixXd& v, const FitOptions& opts) {
  const Eigen::Index n = v.rows(), f = v.cols(), r = opts.rank;
  if (r < 1) throw ConfigError("glrd", "number of roles must be >= 1");
  if (r > std::min(n, f)) throw ConfigError("glrd", "number of roles exceeds min(rows, cols) of V");
  if (!v.allFinite() || v.minCoeff() < 0.0) throw InputError("glrd", "V must be finite and non-negative");
  if (opts.max_sweeps < 0 || !(opts.tol >= 0.0)) throw ConfigError("glrd", "invalid stopping parameters");
  detail::validate_constraints(opts.g_constraints, Side::kG, n, f);
  detail::validate_constraints(opts.f_constraints, Side::kF, n, f);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RoleModel m;
  m.seed = opts.seed;
  m.g_constraints = opts.g_constraints;
  m.f_constraints = opts.f_constraints;
  m.G.resize(n, r);
  m.F.resize(r, f);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < n; ++i) m.G(i, c) = unif(rng);
  for (Eigen::Index c = 0; c < f; ++c)
    for (Eigen::Index i = 0; i < r; ++i) m.F(i, c) = unif(rng);

  // Make the random start feasible so every later sub-step starts from a
  // feasible point and can only lower the objective.
  for (Eigen::Index k = 0; k < r; ++k) {
    m.G.col(k) = project_role_vector(m.G.col(k), Side::kG, opts.g_constraints, m.G, k);
    m.F.row(k) = project_role_vector(m.F.row(k).transpose(), Side::kF, opts.f_constraints, m.F, k).transpose();
  }

  double objective = (v - m.G * m.F).norm();
  int sweep = 0;
  while (sweep < opts.max_sweeps) {
    ++sweep;
    const double before = objective;
    for (Eigen::Index k = 0; k < r; ++k) {
      const Eigen::MatrixXd residual = residual_excluding(v, m.G, m.F, k);
      m.G.col(k) = update_role_vector(residual, m.F.row(k).transpose(), Side::kG, opts.g_constraints, m.G, k);
      if (opts.on_step) {
        opts.on_step({sweep, k, Side::kG, (residual - m.G.col(k) * m.F.row(k)).norm()});
      }
      m.F.row(k) = update_role_vector(residual, m.G.col(k), Side::kF, opts.f_constraints, m.F, k).transpose();
      objective = (residual - m.G.col(k) * m.F.row(k)).norm();
      if (opts.on_step) opts.on_step({sweep, k, Side::kF, objective});
    }
    if (before == 0.0 || (before - objective) / before < opts.tol) break;
  }

  m.iterations = sweep;
  m.objective = (v - m.G * m.F).norm();
  const double vnorm = v.norm();
  m.relative_error = vnorm > 0.0 ? m.objective / vnorm : 0.0;
  for (Eigen::Index k = 0; k < r; ++k) {
    if (m.F.row(k).isZero(0.0) || m.G.col(k).isZero(0.0)) {
      m.warnings.push_back("role " + std::to_string(k + 1) + " is inactive (all-zero factor)");
    }
  }
  return m;
}

// Best (lowest objective) of several seeded starts; ties keep the earlier seed.
inline RoleModel fit_best(const Eigen::MatrixXd& v, FitOptions opts, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("glrd", "at least one seed is required");
  std::optional<RoleModel> best;
  for (auto s : seeds) {
    opts.seed = s;
    RoleModel m = fit(v, opts);
    if (!best || m.objective < best->objective) best = std::move(m);
  }
  return std::move(*best);
}

// Alternative role discovery against a prior model: new G columns / F rows
// must have inner product <= eps with every prior column / row.
inline RoleModel fit_alternative(const Eigen::MatrixXd& v, Eigen::Index rank, const RoleModel& prior,
                                 std::optional<double> eps_g, std::optional<double> eps_f, std::uint64_t seed,
                                 FitOptions base = {}) {
  if (!eps_g && !eps_f) throw ConfigError("glrd", "alternative fit needs eps_G and/or eps_F");
  base.rank = rank;
  base.seed = seed;
  if (eps_g) {
    if (prior.G.rows() != v.rows()) throw ConfigError("glrd", "prior G has a different node count");
    base.g_constraints.push_back(ConstraintSpec::alternative(Side::kG, prior.G, *eps_g));
  }
  if (eps_f) {
    if (prior.F.cols() != v.cols()) throw ConfigError("glrd", "prior F has a different feature count");
    base.f_constraints.push_back(ConstraintSpec::alternative(Side::kF, prior.F, *eps_f));
  }
  return fit(v, base);
}

}  // namespace rolekit::glrd
