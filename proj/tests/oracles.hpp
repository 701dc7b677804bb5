#pragma once

// Slow, independent reference implementations used to check the library.
// Nothing here calls into the code under test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = 0.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = u(rng);
  return m;
}

inline Eigen::VectorXd uniform_vec(Eigen::Index n, std::mt19937_64& rng, double lo, double hi) {
  return uniform(n, 1, rng, lo, hi).col(0);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// NNLS by trying every support set: unconstrained LS on the support, keep
// the feasible candidate with the smallest residual.
inline Eigen::VectorXd nnls_enumerate(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const auto n = a.cols();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_res = b.squaredNorm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(cols[c]);
    const Eigen::VectorXd z = sub.completeOrthogonalDecomposition().solve(b);
    if (z.minCoeff() < 0.0) continue;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (std::size_t c = 0; c < cols.size(); ++c) x(cols[c]) = z(static_cast<Eigen::Index>(c));
    const double res = (a * x - b).squaredNorm();
    if (res < best_res - 1e-14) {
      best_res = res;
      best = x;
    }
  }
  return best;
}

// Euclidean projection onto {x : C x <= d} by enumerating active sets: for
// every subset of constraints, project onto the affine set where they hold
// with equality and keep the closest feasible point.
inline Eigen::VectorXd project_polyhedron(const Eigen::VectorXd& v, const Eigen::MatrixXd& c, const Eigen::VectorXd& d) {
  const auto m = c.rows();
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mask & (1u << i)) rows.push_back(i);
    Eigen::VectorXd x = v;
    if (!rows.empty()) {
      Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), v.size());
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        a.row(static_cast<Eigen::Index>(r)) = c.row(rows[r]);
        rhs(static_cast<Eigen::Index>(r)) = d(rows[r]);
      }
      const Eigen::VectorXd lambda = (a * a.transpose()).completeOrthogonalDecomposition().solve(a * v - rhs);
      x = v - a.transpose() * lambda;
      if ((a * x - rhs).cwiseAbs().maxCoeff() > 1e-9) continue;  // inconsistent equalities
    }
    if (((c * x - d).array() > 1e-11).any()) continue;
    const double dist = (x - v).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

// Constraint rows for x >= 0 plus a_i^T x <= eps_i.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> orthant_and(const std::vector<Eigen::VectorXd>& dirs,
                                                               const std::vector<double>& eps, Eigen::Index dim) {
  const auto h = static_cast<Eigen::Index>(dirs.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim + h, dim);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dim + h);
  c.topRows(dim) = -Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index i = 0; i < h; ++i) {
    c.row(dim + i) = dirs[static_cast<std::size_t>(i)].transpose();
    d(dim + i) = eps[static_cast<std::size_t>(i)];
  }
  return {c, d};
}

// Best value of ||v - x|| over a grid on [0, hi]^dim restricted to the
// feasible set; an upper bound on the true projection distance.
inline double grid_distance(const Eigen::VectorXd& v, const Eigen::MatrixXd& c, const Eigen::VectorXd& d, double hi,
                            int steps) {
  const auto dim = v.size();
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(dim);
  while (true) {
    for (Eigen::Index i = 0; i < dim; ++i) x(i) = hi * idx[static_cast<std::size_t>(i)] / steps;
    if (((c * x - d).array() <= 1e-12).all()) best = std::min(best, (x - v).norm());
    std::size_t p = 0;
    while (p < idx.size() && ++idx[p] > steps) idx[p++] = 0;
    if (p == idx.size()) break;
  }
  return best;
}

// Tucker reconstruction by the explicit quadruple sum
// V(a,b,c) = sum_{i,j,k} H(i,j,k) G(a,i) F(b,j) R(c,k).
template <class Core>
std::vector<double> tucker_sum(const Core& h, Eigen::Index p, Eigen::Index q, Eigen::Index s, const Eigen::MatrixXd& g,
                               const Eigen::MatrixXd& f, const Eigen::MatrixXd& r) {
  const auto n = g.rows(), nf = f.rows(), m = r.rows();
  std::vector<double> out(static_cast<std::size_t>(n * nf * m), 0.0);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index b = 0; b < nf; ++b)
      for (Eigen::Index a = 0; a < n; ++a) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < s; ++k)
          for (Eigen::Index j = 0; j < q; ++j)
            for (Eigen::Index i = 0; i < p; ++i) acc += h(i, j, k) * g(a, i) * f(b, j) * r(c, k);
        out[static_cast<std::size_t>(a + n * (b + nf * c))] = acc;
      }
  return out;
}

// Global min cut by trying every bipartition that keeps node 0 on one side.
inline double min_cut_enumerate(const Eigen::MatrixXd& w) {
  const auto n = w.rows();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
    double cut = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const bool sa = a > 0 && (mask & (1u << (a - 1)));
        const bool sb = b > 0 && (mask & (1u << (b - 1)));
        if (sa != sb) cut += w(a, b);
      }
    best = std::min(best, cut);
  }
  return best;
}

// Lee-Seung multiplicative updates for min ||V - G F||, run to a fixed
// iteration count.
inline double nmf_multiplicative(const Eigen::MatrixXd& v, Eigen::Index r, std::uint64_t seed, int iters) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd g = uniform(v.rows(), r, rng, 0.1, 1.0);
  Eigen::MatrixXd f = uniform(r, v.cols(), rng, 0.1, 1.0);
  const double tiny = 1e-300;
  for (int it = 0; it < iters; ++it) {
    f = f.cwiseProduct((g.transpose() * v).cwiseQuotient((g.transpose() * g * f).array().max(tiny).matrix()));
    g = g.cwiseProduct((v * f.transpose()).cwiseQuotient((g * f * f.transpose()).array().max(tiny).matrix()));
  }
  return (v - g * f).norm();
}

// Top-k membership by sorting every candidate distance.
inline bool in_top_k(const Eigen::VectorXd& q, const Eigen::MatrixXd& targets, Eigen::Index truth, int k) {
  std::vector<std::pair<double, Eigen::Index>> d;
  for (Eigen::Index r = 0; r < targets.rows(); ++r) d.emplace_back((targets.row(r).transpose() - q).norm(), r);
  std::sort(d.begin(), d.end());
  for (int i = 0; i < k && i < static_cast<int>(d.size()); ++i)
    if (d[static_cast<std::size_t>(i)].second == truth) return true;
  return false;
}

}  // namespace oracle
