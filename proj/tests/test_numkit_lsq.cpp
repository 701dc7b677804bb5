#include "rolekit/numkit/lsq.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using rolekit::numkit::least_squares_col;
using rolekit::numkit::least_squares_row;

TEST(LeastSquaresCol, ExactRankOneFit) {
  Eigen::MatrixXd r(2, 2);
  r << 1, 0, 0, 0;
  Eigen::VectorXd f(2);
  f << 1, 0;
  const Eigen::VectorXd x = least_squares_col(r, f);
  EXPECT_DOUBLE_EQ(x(0), 1.0);
  EXPECT_DOUBLE_EQ(x(1), 0.0);
}

TEST(LeastSquaresCol, ColinearRow) {
  Eigen::MatrixXd r(1, 2);
  r << 2, 4;
  Eigen::VectorXd f(2);
  f << 1, 2;
  EXPECT_DOUBLE_EQ(least_squares_col(r, f)(0), 2.0);
}

TEST(LeastSquaresCol, ZeroRowGivesZero) {
  const Eigen::MatrixXd r = Eigen::MatrixXd::Ones(3, 2);
  const Eigen::VectorXd x = least_squares_col(r, Eigen::VectorXd::Zero(2));
  EXPECT_EQ(x.size(), 3);
  EXPECT_EQ(x.norm(), 0.0);
}

// The closed form must match a generic least-squares solve of
// min_x ||R - x f^T||, i.e. one independent LS problem per row of R.
TEST(LeastSquaresCol, MatchesGenericSolver) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd r = oracle::uniform(5, 4, rng, -1, 1);
    const Eigen::VectorXd f = oracle::uniform_vec(4, rng, -1, 1);
    const Eigen::VectorXd x = least_squares_col(r, f);
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      const Eigen::MatrixXd a = f;  // 4 x 1 design
      const double expect = a.colPivHouseholderQr().solve(r.row(i).transpose())(0);
      EXPECT_NEAR(x(i), expect, 1e-12);
    }
  }
}

TEST(LeastSquaresRow, MatchesGenericSolver) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd r = oracle::uniform(5, 4, rng, -1, 1);
    const Eigen::VectorXd g = oracle::uniform_vec(5, rng, -1, 1);
    const Eigen::VectorXd y = least_squares_row(r, g);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const Eigen::MatrixXd a = g;
      EXPECT_NEAR(y(j), a.colPivHouseholderQr().solve(r.col(j))(0), 1e-12);
    }
  }
  EXPECT_EQ(least_squares_row(Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(2)).norm(), 0.0);
}
