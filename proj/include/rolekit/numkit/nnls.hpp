#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rolekit::numkit {

namespace detail {

// Lawson-Hanson active-set loop shared by the dense and Gram-form entry
// points. `gradient(x)` returns A^T (b - A x); `solve(passive)` returns the
// unconstrained least-squares solution restricted to the passive columns
// (zeros elsewhere).
template <class Gradient, class PassiveSolve>
Eigen::VectorXd lawson_hanson(Eigen::Index n, double tol, Gradient&& gradient,
                              PassiveSolve&& solve) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const int max_outer = 3 * static_cast<int>(n) + 30;

  for (int outer = 0; outer < max_outer; ++outer) {
    const Eigen::VectorXd w = gradient(x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    bool first_inner = true;
    for (Eigen::Index inner = 0; inner <= n; ++inner) {
      Eigen::VectorXd s = solve(passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) feasible = false;
      }
      if (feasible) {
        x = std::move(s);
        break;
      }
      // The freshly added column cannot enter: the gradient sign was noise.
      if (first_inner && s(best) <= 0.0) {
        passive[static_cast<std::size_t>(best)] = false;
        return x;
      }
      first_inner = false;

      double alpha = std::numeric_limits<double>::infinity();
      Eigen::Index blocking = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          const double step = x(j) / (x(j) - s(j));
          if (step < alpha) {
            alpha = step;
            blocking = j;
          }
        }
      }
      x += alpha * (s - x);
      x(blocking) = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15 * (1.0 + std::abs(s(j)))) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

inline std::vector<Eigen::Index> passive_indices(const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (std::size_t j = 0; j < passive.size(); ++j) {
    if (passive[j]) idx.push_back(static_cast<Eigen::Index>(j));
  }
  return idx;
}

}  // namespace detail

// Non-negative least squares, min ||A x - b|| s.t. x >= 0, given only the
// normal-equation pieces A^T A and A^T b. Row-wise factor updates share one
// Gram matrix across many right-hand sides, which is why this form exists.
inline Eigen::VectorXd nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& atb) {
  const Eigen::Index n = gram.rows();
  double scale = 1.0;
  if (n > 0) {
    scale = std::max({scale, atb.cwiseAbs().maxCoeff(), gram.diagonal().cwiseAbs().maxCoeff()});
  }
  const double tol = 1e-13 * scale;

  auto gradient = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return atb - gram * x; };
  auto solve = [&](const std::vector<bool>& passive) {
    const auto idx = detail::passive_indices(passive);
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      rhs(a) = atb(idx[a]);
      for (Eigen::Index c = 0; c < k; ++c) sub(a, c) = gram(idx[a], idx[c]);
    }
    const Eigen::VectorXd z = sub.ldlt().solve(rhs);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < k; ++a) s(idx[a]) = z(a);
    return s;
  };
  return detail::lawson_hanson(n, tol, gradient, solve);
}

// Dense form. Passive-set subproblems are solved by QR on the selected
// columns of A rather than through the normal equations.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  double scale = 1.0;
  if (a.size() > 0) scale = std::max(scale, a.norm() * std::max(1.0, b.norm()));
  const double tol = 1e-13 * scale;

  auto gradient = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return a.transpose() * (b - a * x);
  };
  auto solve = [&](const std::vector<bool>& passive) {
    const auto idx = detail::passive_indices(passive);
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
    const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) s(idx[c]) = z(static_cast<Eigen::Index>(c));
    return s;
  };
  return detail::lawson_hanson(n, tol, gradient, solve);
}

}  // namespace rolekit::numkit
