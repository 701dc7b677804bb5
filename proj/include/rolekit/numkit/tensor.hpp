#pragma once

#include "rolekit/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace rolekit::numkit {

using Index = Eigen::Index;

// Dense order-3 tensor. Storage order has the first index fastest, so the
// raw buffer *is* the vectorization.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index d0, Index d1, Index d2)
      : dims_{d0, d1, d2}, data_(static_cast<std::size_t>(d0 * d1 * d2), 0.0) {
    if (d0 < 0 || d1 < 0 || d2 < 0) throw ConfigError("numkit", "negative tensor dimension");
  }

  Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
  const std::array<Index, 3>& dims() const noexcept { return dims_; }
  Index size() const noexcept { return static_cast<Index>(data_.size()); }

  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  const std::vector<double>& values() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }

  double norm() const {
    return Eigen::Map<const Eigen::VectorXd>(data_.data(), size()).norm();
  }
  double min_value() const {
    return data_.empty() ? 0.0 : Eigen::Map<const Eigen::VectorXd>(data_.data(), size()).minCoeff();
  }

  Tensor3& operator*=(double c) {
    for (auto& v : data_) v *= c;
    return *this;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k));
  }

  std::array<Index, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

inline void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw ConfigError("numkit", "tensor mode must be 1, 2 or 3");
}

// Mode-d unfolding. Rows follow mode d; columns enumerate the two remaining
// modes with the lower-numbered one varying fastest. Mode 1 therefore has
// column k*f + j, mode 2 has k*n + i and mode 3 has j*n + i.
inline Eigen::MatrixXd matricize(const Tensor3& t, int mode) {
  check_mode(mode);
  const Index n = t.dim(0), f = t.dim(1), m = t.dim(2);
  Eigen::MatrixXd out;
  switch (mode) {
    case 1:
      out.resize(n, f * m);
      for (Index k = 0; k < m; ++k)
        for (Index j = 0; j < f; ++j)
          for (Index i = 0; i < n; ++i) out(i, k * f + j) = t(i, j, k);
      break;
    case 2:
      out.resize(f, n * m);
      for (Index k = 0; k < m; ++k)
        for (Index j = 0; j < f; ++j)
          for (Index i = 0; i < n; ++i) out(j, k * n + i) = t(i, j, k);
      break;
    default:
      out.resize(m, n * f);
      for (Index k = 0; k < m; ++k)
        for (Index j = 0; j < f; ++j)
          for (Index i = 0; i < n; ++i) out(k, j * n + i) = t(i, j, k);
      break;
  }
  return out;
}

// Inverse of matricize for a tensor of the given dimensions.
inline Tensor3 fold(const Eigen::MatrixXd& mat, int mode, Index n, Index f, Index m) {
  check_mode(mode);
  const Index rows = mode == 1 ? n : mode == 2 ? f : m;
  if (mat.rows() != rows || mat.size() != n * f * m) {
    throw ConfigError("numkit", "unfolding shape does not match tensor dimensions");
  }
  Tensor3 t(n, f, m);
  for (Index k = 0; k < m; ++k)
    for (Index j = 0; j < f; ++j)
      for (Index i = 0; i < n; ++i) {
        switch (mode) {
          case 1: t(i, j, k) = mat(i, k * f + j); break;
          case 2: t(i, j, k) = mat(j, k * n + i); break;
          default: t(i, j, k) = mat(k, j * n + i); break;
        }
      }
  return t;
}

inline Eigen::VectorXd vectorize(const Tensor3& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.values().data(), t.size());
}

inline Tensor3 unvectorize(const Eigen::VectorXd& v, Index n, Index f, Index m) {
  if (v.size() != n * f * m) throw ConfigError("numkit", "vector length does not match tensor");
  Tensor3 t(n, f, m);
  std::copy(v.data(), v.data() + v.size(), t.values().begin());
  return t;
}

// Kronecker product; the left operand indexes the slower block.
inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index ac = 0; ac < a.cols(); ++ac)
    for (Index ar = 0; ar < a.rows(); ++ar)
      out.block(ar * b.rows(), ac * b.cols(), b.rows(), b.cols()) = a(ar, ac) * b;
  return out;
}

// t x_mode m: replaces dimension `mode` of t by m.rows().
inline Tensor3 mode_product(const Tensor3& t, const Eigen::MatrixXd& m, int mode) {
  check_mode(mode);
  if (m.cols() != t.dim(mode - 1)) throw ConfigError("numkit", "mode product dimension mismatch");
  std::array<Index, 3> d = t.dims();
  d[static_cast<std::size_t>(mode - 1)] = m.rows();
  return fold(m * matricize(t, mode), mode, d[0], d[1], d[2]);
}

// core x1 a x2 b x3 c
inline Tensor3 tucker_product(const Tensor3& core, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Eigen::MatrixXd& c) {
  return mode_product(mode_product(mode_product(core, a, 1), b, 2), c, 3);
}

}  // namespace rolekit::numkit
