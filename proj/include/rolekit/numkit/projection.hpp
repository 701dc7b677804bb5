#pragma once

#include "rolekit/error.hpp"
#include "rolekit/numkit/nnls.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace rolekit::numkit {

// {x >= 0, sum(x) <= eps}
struct L1Ball {
  double eps = 0.0;
};

// a^T x <= eps with a >= 0 componentwise.
struct Halfspace {
  Eigen::VectorXd direction;
  double eps = 0.0;
};

// Intersection of the non-negative orthant with every listed halfspace.
using HalfspaceSet = std::vector<Halfspace>;

struct DykstraOptions {
  double tol = 1e-10;      // successive-iterate change per cycle
  int max_cycles = 10000;
};

class ProjectionError : public Error {
 public:
  ProjectionError(Eigen::VectorXd best, double change)
      : Error("numkit", "halfspace projection did not converge (last change " +
                            std::to_string(change) + ")"),
        best_(std::move(best)),
        change_(change) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }
  double residual_change() const noexcept { return change_; }

 private:
  Eigen::VectorXd best_;
  double change_;
};

inline Eigen::VectorXd clamp_nonneg(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

// Euclidean projection onto {x >= 0, ||x||_1 <= eps}: clamp negatives, and
// if the clamped point is still too heavy, project onto the scaled simplex
// by sort-and-threshold.
inline Eigen::VectorXd project_l1_nonneg(const Eigen::VectorXd& v, double eps) {
  if (eps < 0.0) throw ConfigError("numkit", "L1 bound must be non-negative");
  Eigen::VectorXd x = clamp_nonneg(v);
  if (x.sum() <= eps) return x;
  if (eps == 0.0) return Eigen::VectorXd::Zero(v.size());

  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - eps) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (x.array() - theta).cwiseMax(0.0).matrix();
}

inline Eigen::VectorXd project(const Eigen::VectorXd& v, const L1Ball& ball) {
  return project_l1_nonneg(v, ball.eps);
}

namespace detail {

inline bool satisfies(const Eigen::VectorXd& x, const HalfspaceSet& set, double slack) {
  for (const auto& h : set) {
    if (h.direction.dot(x) > h.eps + slack) return false;
  }
  return true;
}

// Exact projection given a guess of which coordinates sit at zero and which
// halfspaces are tight; the guess is repaired one violation at a time until
// the KKT conditions hold. Returns false if it fails to settle.
inline bool refine_active_set(const Eigen::VectorXd& v, const HalfspaceSet& set,
                              const Eigen::VectorXd& guess, Eigen::VectorXd& out) {
  const Eigen::Index d = v.size();
  const auto h = static_cast<Eigen::Index>(set.size());
  double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  for (const auto& hs : set) scale = std::max({scale, hs.eps, hs.direction.cwiseAbs().maxCoeff()});
  const double detect = 1e-7 * scale;
  const double tol = 1e-12 * scale * scale;

  std::vector<bool> free(static_cast<std::size_t>(d));
  std::vector<bool> active(static_cast<std::size_t>(h));
  for (Eigen::Index j = 0; j < d; ++j) free[static_cast<std::size_t>(j)] = guess(j) > detect;
  for (Eigen::Index i = 0; i < h; ++i) {
    const auto& hs = set[static_cast<std::size_t>(i)];
    active[static_cast<std::size_t>(i)] = hs.direction.dot(guess) >= hs.eps - detect;
  }

  const int max_iter = 4 * static_cast<int>(d + h) + 20;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < h; ++i) {
      if (active[static_cast<std::size_t>(i)]) act.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(act.size());

    // x_free = v_free - A_free^T lambda with A_free x_free = eps on the active rows.
    Eigen::MatrixXd a_free = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd eps_act(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto& hs = set[static_cast<std::size_t>(act[r])];
      eps_act(r) = hs.eps;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (free[static_cast<std::size_t>(j)]) a_free(r, j) = hs.direction(j);
      }
    }
    Eigen::VectorXd v_free = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (free[static_cast<std::size_t>(j)]) v_free(j) = v(j);
    }
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
    if (k > 0) {
      const Eigen::MatrixXd m = a_free * a_free.transpose();
      const Eigen::VectorXd rhs = a_free * v_free - eps_act;
      lambda = m.completeOrthogonalDecomposition().solve(rhs);
    }
    Eigen::VectorXd x = v_free;
    if (k > 0) x -= a_free.transpose() * lambda;

    // Locate the worst KKT violation.
    enum class Fix { kNone, kDrop, kZero, kFree, kActivate } fix = Fix::kNone;
    double worst = tol;
    Eigen::Index where = -1;
    for (Eigen::Index r = 0; r < k; ++r) {
      // A tight row the free coordinates cannot reach is really slack.
      const double slack = eps_act(r) - a_free.row(r).dot(x);
      const double bad = std::max(-lambda(r), slack);
      if (bad > worst) { worst = bad; fix = Fix::kDrop; where = act[r]; }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      if (free[static_cast<std::size_t>(j)]) {
        if (-x(j) > worst) { worst = -x(j); fix = Fix::kZero; where = j; }
      } else {
        // Multiplier of the bound x_j >= 0.
        double mu = -v(j);
        for (Eigen::Index r = 0; r < k; ++r) mu += lambda(r) * set[static_cast<std::size_t>(act[r])].direction(j);
        if (-mu > worst) { worst = -mu; fix = Fix::kFree; where = j; }
      }
    }
    for (Eigen::Index i = 0; i < h; ++i) {
      if (active[static_cast<std::size_t>(i)]) continue;
      const auto& hs = set[static_cast<std::size_t>(i)];
      const double viol = hs.direction.dot(x) - hs.eps;
      if (viol > worst) { worst = viol; fix = Fix::kActivate; where = i; }
    }

    switch (fix) {
      case Fix::kNone:
        if (!satisfies(x, set, std::sqrt(tol))) return false;
        out = x.cwiseMax(0.0);
        return true;
      case Fix::kDrop: active[static_cast<std::size_t>(where)] = false; break;
      case Fix::kZero: free[static_cast<std::size_t>(where)] = false; break;
      case Fix::kFree: free[static_cast<std::size_t>(where)] = true; break;
      case Fix::kActivate: active[static_cast<std::size_t>(where)] = true; break;
    }
  }
  return false;
}

// Least-distance form: min ||z|| s.t. G z >= g with z = x - v, solved through
// one NNLS problem on [G^T; g^T] against e_{d+1}. Finite, but dense in d + h,
// so it only runs when the active-set repair above gives up.
inline bool least_distance(const Eigen::VectorXd& v, const HalfspaceSet& set, Eigen::VectorXd& out) {
  const Eigen::Index d = v.size();
  const auto h = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d + 1, d + h);
  e.topLeftCorner(d, d).setIdentity();
  e.bottomLeftCorner(1, d) = -v.transpose();
  for (Eigen::Index i = 0; i < h; ++i) {
    const auto& hs = set[static_cast<std::size_t>(i)];
    e.col(d + i).head(d) = -hs.direction;
    e(d, d + i) = hs.direction.dot(v) - hs.eps;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(d + 1);
  f(d) = 1.0;
  const Eigen::VectorXd u = nnls(e, f);
  const Eigen::VectorXd r = e * u - f;
  if (std::abs(r(d)) < 1e-14) return false;
  out = (v - r.head(d) / r(d)).cwiseMax(0.0);
  return true;
}

inline Eigen::VectorXd dykstra(const Eigen::VectorXd& v, const HalfspaceSet& set, const DykstraOptions& opts,
                               double& change) {
  const std::size_t sets = set.size() + 1;
  std::vector<Eigen::VectorXd> increments(sets, Eigen::VectorXd::Zero(v.size()));
  Eigen::VectorXd x = v;
  change = 0.0;
  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    const Eigen::VectorXd start = x;
    for (std::size_t s = 0; s < sets; ++s) {
      const Eigen::VectorXd y = x + increments[s];
      if (s == 0) {
        x = clamp_nonneg(y);
      } else {
        const auto& hs = set[s - 1];
        const double excess = hs.direction.dot(y) - hs.eps;
        const double norm2 = hs.direction.squaredNorm();
        x = (excess > 0.0 && norm2 > 0.0) ? Eigen::VectorXd(y - (excess / norm2) * hs.direction) : y;
      }
      increments[s] = y - x;
    }
    change = (x - start).norm();
    if (change < opts.tol) break;
  }
  return x;
}

}  // namespace detail

// Euclidean projection onto {x >= 0} intersected with every halfspace in
// `set`. Coordinates pinned to zero by a zero-bound halfspace, and
// coordinates no halfspace touches, are settled up front. The rest is
// approximated by Dykstra's cyclic projections, then an active-set
// refinement lands on the exact projection; a least-distance NNLS solve
// covers the cases the refinement cannot settle. Throws ProjectionError
// rather than return a point outside the set.
inline Eigen::VectorXd project_halfspaces_nonneg(const Eigen::VectorXd& v, const HalfspaceSet& set,
                                                 const DykstraOptions& opts = {}) {
  for (const auto& hs : set) {
    if (hs.direction.size() != v.size()) throw ConfigError("numkit", "halfspace dimension mismatch");
    if (hs.eps < 0.0) throw ConfigError("numkit", "halfspace bound must be non-negative");
  }
  Eigen::VectorXd out = clamp_nonneg(v);
  if (detail::satisfies(out, set, 0.0)) return out;

  const Eigen::Index d = v.size();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < d; ++j) {
    bool touched = false, pinned = false;
    for (const auto& hs : set) {
      if (hs.direction(j) > 0.0) {
        touched = true;
        if (hs.eps == 0.0) pinned = true;
      }
    }
    if (pinned) out(j) = 0.0;
    else if (touched) keep.push_back(j);
  }
  const auto kd = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd w(kd);
  for (Eigen::Index a = 0; a < kd; ++a) w(a) = v(keep[a]);
  HalfspaceSet sub;
  for (const auto& hs : set) {
    Halfspace r{Eigen::VectorXd(kd), hs.eps};
    for (Eigen::Index a = 0; a < kd; ++a) r.direction(a) = hs.direction(keep[a]);
    if (kd > 0 && r.direction.maxCoeff() > 0.0) sub.push_back(std::move(r));
  }

  Eigen::VectorXd x = clamp_nonneg(w);
  if (kd > 0 && !detail::satisfies(x, sub, 0.0)) {
    double change = 0.0;
    const Eigen::VectorXd approx = detail::dykstra(w, sub, opts, change);
    Eigen::VectorXd exact, ldp;
    if (detail::refine_active_set(w, sub, approx, exact)) {
      x = exact;
    } else if (detail::least_distance(w, sub, ldp)) {
      x = detail::refine_active_set(w, sub, ldp, exact) ? exact : ldp;
    } else {
      x = approx.cwiseMax(0.0);
    }
    double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    for (const auto& hs : sub) scale = std::max({scale, hs.eps, hs.direction.maxCoeff()});
    if (!detail::satisfies(x, sub, 1e-9 * scale)) {
      Eigen::VectorXd best = out;
      for (Eigen::Index a = 0; a < kd; ++a) best(keep[a]) = x(a);
      throw ProjectionError(best, change);
    }
  }
  for (Eigen::Index a = 0; a < kd; ++a) out(keep[a]) = x(a);
  return out;
}

inline Eigen::VectorXd project(const Eigen::VectorXd& v, const HalfspaceSet& set) {
  return project_halfspaces_nonneg(v, set);
}

}  // namespace rolekit::numkit
