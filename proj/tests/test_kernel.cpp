#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "staf/kernel.hpp"

using namespace staf;

namespace {

Eigen::Vector2d vec2(double a, double b) { return Eigen::Vector2d(a, b); }

}  // namespace

TEST(Shrink, ValueAtOriginIsEps0) {
  ShrinkFunction<double> s;
  EXPECT_DOUBLE_EQ(s.value(Eigen::Vector2d::Zero()), 0.01);
}

TEST(Shrink, ConstantOneIgnoresState) {
  ShrinkFunction<double> s;
  s.mode = ShrinkMode::kConstantOne;
  EXPECT_EQ(s.value(vec2(3.0, -7.0)), 1.0);
}

TEST(Centers, OriginUsesEps0) {
  const auto b = regulation_basis<double>();
  const Eigen::MatrixXd c = centers(b, Eigen::Vector2d::Zero());
  EXPECT_NEAR(c(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(c(0, 1), 0.007, 1e-15);
}

TEST(Centers, InitialStateFirstCenter) {
  // shrink([-1, 1]) = (2 + 0.01) / (1 + 2) = 0.67; 1 + 0.7 * 0.67 = 1.469
  const auto b = regulation_basis<double>();
  const Eigen::MatrixXd c = centers(b, vec2(-1.0, 1.0));
  EXPECT_NEAR(c(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(c(0, 1), 1.469, 1e-12);
}

TEST(Centers, ConstantOneModeAddsScaledOffsets) {
  auto b = simplex_basis<double>(2, 0.5);
  const Eigen::Vector2d x = vec2(0.3, -1.2);
  const Eigen::MatrixXd c = centers(b, x);
  for (int i = 0; i < b.num_kernels(); ++i)
    EXPECT_TRUE(c.row(i).isApprox(x.transpose() + 0.5 * b.offsets.row(i), 1e-15));
}

TEST(Sigma, ZeroAtOrigin) {
  const auto b = regulation_basis<double>();
  EXPECT_TRUE(sigma(b, Eigen::Vector2d::Zero()).isZero(0.0));
}

TEST(Sigma, ForcedCenter) {
  Eigen::MatrixXd c(1, 2);
  c << 1.0, 0.0;
  const Eigen::VectorXd s = sigma_at<double>(vec2(1.0, 0.0), c);
  EXPECT_NEAR(s(0), std::exp(1.0) - 1.0, 1e-15);
  EXPECT_NEAR(s(0), 1.718282, 1e-6);
}

TEST(Sigma, MatchesScalarEvaluationAtInitialState) {
  const auto b = regulation_basis<double>();
  const double x1 = -1.0, x2 = 1.0;
  const double shrink = (x1 * x1 + x2 * x2 + 0.01) / (1.0 + x1 * x1 + x2 * x2);
  const double d[3][2] = {{0.0, 1.0}, {0.87, -0.5}, {-0.87, -0.5}};
  const Eigen::VectorXd s = sigma(b, vec2(x1, x2));
  for (int i = 0; i < 3; ++i) {
    const double c1 = x1 + 0.7 * shrink * d[i][0];
    const double c2 = x2 + 0.7 * shrink * d[i][1];
    const double expected = std::exp(x1 * c1 + x2 * c2) - 1.0;
    EXPECT_NEAR(s(i), expected, 1e-12 * std::abs(expected));
  }
}

TEST(Sigma, OverflowThrows) {
  Eigen::MatrixXd c(1, 2);
  c << 1000.0, 0.0;
  EXPECT_THROW(sigma_at<double>(vec2(1.0, 0.0), c), NumericRangeError);
}

TEST(Sigma, DimensionMismatchThrows) {
  const auto b = regulation_basis<double>();
  EXPECT_THROW(sigma(b, Eigen::Vector3d::Zero()), ContractViolation);
}

TEST(GradSigma, OriginRowsAreCenters) {
  const auto b = regulation_basis<double>();
  const Eigen::MatrixXd g = grad_sigma(b, Eigen::Vector2d::Zero());
  EXPECT_TRUE(g.isApprox(centers(b, Eigen::Vector2d::Zero()), 1e-15));
}

TEST(GradSigma, ForcedCenter) {
  Eigen::MatrixXd c(1, 2);
  c << 1.0, 0.0;
  const Eigen::MatrixXd g = grad_sigma_at<double>(vec2(1.0, 0.0), c);
  EXPECT_NEAR(g(0, 0), std::exp(1.0), 1e-15);
  EXPECT_EQ(g(0, 1), 0.0);
}

TEST(GradSigma, MatchesCentralDifferencesWithCentersFixed) {
  const auto b = regulation_basis<double>();
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector2d x = vec2(u(gen), u(gen));
    const Eigen::MatrixXd c = centers(b, x);
    const Eigen::MatrixXd g = grad_sigma_at<double>(x, c);
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const Eigen::VectorXd fd = (sigma_at<double>(xp, c) - sigma_at<double>(xm, c)) / (2 * h);
      for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(fd(i) - g(i, j)), 1e-5 * std::max(1.0, std::abs(g(i, j))));
    }
  }
}

TEST(Simplex, GeometryInFourDimensions) {
  const Eigen::MatrixXd v = regular_simplex<double>(4);
  ASSERT_EQ(v.rows(), 5);
  ASSERT_EQ(v.cols(), 4);
  EXPECT_LT(v.colwise().sum().norm(), 1e-14);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(v.row(i).norm(), 1.0, 1e-14);
    for (int j = i + 1; j < 5; ++j) EXPECT_NEAR(v.row(i).dot(v.row(j)), -0.25, 1e-14);  // -1/n
  }
}

TEST(Simplex, RejectsZeroDimension) { EXPECT_THROW(regular_simplex<double>(0), ContractViolation); }

TEST(Basis, ValidateRejectsWrongOffsetShape) {
  auto b = regulation_basis<double>();
  b.offsets = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_THROW(b.validate(), ConfigError);
}
