#pragma once

#include "rolekit/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace rolekit::numkit {

struct PowerOptions {
  double tol = 1e-9;
  int max_iter = 50000;
};

// Magnitudes of the two dominant eigenvalues, |first| >= |second|.
struct TopEigs {
  double first = 0.0;
  double second = 0.0;
};

class EigenConvergenceError : public Error {
 public:
  EigenConvergenceError() : Error("numkit", "power iteration did not converge") {}
};

namespace detail {

inline Eigen::VectorXd start_vector(Eigen::Index n, unsigned salt) {
  std::mt19937_64 rng(0x5eed0000u + salt);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v.normalized();
}

struct PowerResult {
  double value = 0.0;
  Eigen::VectorXd vector;
};

// Dominant eigenpair of `op` (eigenvalues assumed real and non-negative, as
// for a squared matrix). Converged once ||op v - mu v|| <= tol * max(1, mu).
template <class Apply>
PowerResult power(Apply&& op, Eigen::Index n, unsigned salt, const PowerOptions& opts) {
  Eigen::VectorXd v = start_vector(n, salt);
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd y = op(v);
    const double mu = v.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) return {0.0, v};
    const double residual = (y - mu * v).norm();
    if (residual <= opts.tol * std::max(1.0, std::abs(mu))) return {mu, v};
    v = y / ny;
  }
  throw EigenConvergenceError();
}

inline bool is_symmetric(const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace detail

// Two largest-magnitude eigenvalues by deflated power iteration on M^2, so
// that +/- pairs (bipartite random walks) share one non-negative eigenvalue
// and the iteration still converges. Non-symmetric input is deflated with
// the left eigenvector and assumes a real spectrum (reversible chains).
inline TopEigs top_two_eigs(const Eigen::MatrixXd& m, const PowerOptions& opts = {}) {
  if (m.rows() != m.cols()) throw ConfigError("numkit", "top_two_eigs needs a square matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return {};
  const Eigen::MatrixXd sq = m * m;

  if (n == 1) return {std::abs(m(0, 0)), 0.0};

  if (detail::is_symmetric(m)) {
    const Eigen::MatrixXd b = 0.5 * (sq + sq.transpose());
    const auto p1 = detail::power([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(b * v); }, n, 1, opts);
    const Eigen::MatrixXd b2 = b - p1.value * p1.vector * p1.vector.transpose();
    const auto p2 = detail::power([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(b2 * v); }, n, 2, opts);
    return {std::sqrt(std::max(p1.value, 0.0)), std::sqrt(std::max(p2.value, 0.0))};
  }

  const auto right = detail::power([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(sq * v); }, n, 1, opts);
  const auto left = detail::power([&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(sq.transpose() * v);
  }, n, 3, opts);
  const double overlap = left.vector.dot(right.vector);
  Eigen::MatrixXd b2 = sq;
  if (overlap != 0.0) b2 -= right.value * right.vector * left.vector.transpose() / overlap;
  const auto p2 = detail::power([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(b2 * v); }, n, 2, opts);
  return {std::sqrt(std::max(right.value, 0.0)), std::sqrt(std::max(p2.value, 0.0))};
}

// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

// Cyclic Jacobi rotations. Intended for the small covariance matrices that
// PCA embedding produces.
inline SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) throw ConfigError("numkit", "symmetric_eigen needs a square matrix");
  const Eigen::Index n = s.rows();
  Eigen::MatrixXd a = 0.5 * (s + s.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double total = std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * total) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

struct Pca {
  Eigen::MatrixXd scores;      // N x k
  Eigen::MatrixXd components;  // M x k, orthonormal columns
  Eigen::VectorXd variances;   // all eigenvalues of the population covariance, descending
};

// Principal components of the rows of x. Each component is signed so that
// its largest-magnitude entry is positive.
inline Pca pca(const Eigen::MatrixXd& x, Eigen::Index k) {
  if (x.rows() < 2) throw ConfigError("numkit", "PCA needs at least two rows");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
  const SymmetricEigen eig = symmetric_eigen(cov);

  const Eigen::Index keep = std::min<Eigen::Index>(k, x.cols());
  Pca out;
  out.variances = eig.values;
  out.components = Eigen::MatrixXd::Zero(x.cols(), k);
  for (Eigen::Index c = 0; c < keep; ++c) {
    Eigen::VectorXd comp = eig.vectors.col(c);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < comp.size(); ++i) {
      if (std::abs(comp(i)) > std::abs(comp(arg))) arg = i;
    }
    if (comp(arg) < 0.0) comp = -comp;
    out.components.col(c) = comp;
  }
  out.scores = centered * out.components;
  return out;
}

inline Eigen::MatrixXd pca_2d(const Eigen::MatrixXd& x) { return pca(x, 2).scores; }

}  // namespace rolekit::numkit
