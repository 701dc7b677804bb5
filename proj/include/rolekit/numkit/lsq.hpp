#pragma once

#include <Eigen/Dense>

namespace rolekit::numkit {

// Closed-form minimizer of ||R - x * frow^T||_F over column vectors x.
// An all-zero frow leaves the problem flat in x; zero is returned so that a
// dead role stays dead instead of producing NaNs.
inline Eigen::VectorXd least_squares_col(const Eigen::MatrixXd& residual,
                                         const Eigen::VectorXd& frow) {
  const double denom = frow.squaredNorm();
  if (denom == 0.0) return Eigen::VectorXd::Zero(residual.rows());
  return (residual * frow) / denom;
}

// Same problem for the row side: minimizes ||R - gcol * x^T||_F over x.
inline Eigen::VectorXd least_squares_row(const Eigen::MatrixXd& residual,
                                         const Eigen::VectorXd& gcol) {
  const double denom = gcol.squaredNorm();
  if (denom == 0.0) return Eigen::VectorXd::Zero(residual.cols());
  return (residual.transpose() * gcol) / denom;
}

}  // namespace rolekit::numkit
