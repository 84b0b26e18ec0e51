#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "staf/excitation.hpp"
#include "staf/gains.hpp"
#include "staf/types.hpp"

using namespace staf;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Sampling, ZeroWidthReturnsState) {
  ExtrapolationPolicy p;
  p.half_width_factor = 0.0;
  p.num_points = 4;
  const auto s = sample_points(p, vec({0.3, -0.1}), 0.5, RngState{9, 0});
  ASSERT_EQ(s.points.size(), 4u);
  for (const auto& x : s.points) EXPECT_TRUE(x.isApprox(vec({0.3, -0.1}), 0.0));
}

TEST(Sampling, DeterministicForIdenticalCallSequences) {
  ExtrapolationPolicy p;
  p.num_points = 3;
  RngState a{42, 0}, b{42, 0};
  for (int k = 0; k < 20; ++k) {
    const auto sa = sample_points(p, vec({1, 2}), 0.7, a);
    const auto sb = sample_points(p, vec({1, 2}), 0.7, b);
    a = sa.rng;
    b = sb.rng;
    for (std::size_t i = 0; i < sa.points.size(); ++i) EXPECT_EQ(sa.points[i], sb.points[i]);
  }
  RngState c{43, 0};
  EXPECT_NE(sample_points(p, vec({1, 2}), 0.7, c).points[0], sample_points(p, vec({1, 2}), 0.7, RngState{42, 0}).points[0]);
}

TEST(Sampling, UniformBoxStatistics) {
  ExtrapolationPolicy p;
  p.num_points = 100000;
  const Eigen::VectorXd x = vec({-1.0, 1.0});
  const double shrink = 0.67;
  const double w = 0.5 * 2.1 * shrink;
  const auto s = sample_points(p, x, shrink, RngState{7, 0});
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (const auto& q : s.points) {
    EXPECT_LE((q - x).cwiseAbs().maxCoeff(), w);
    mean += q;
  }
  mean /= static_cast<double>(p.num_points);
  const double se = w / std::sqrt(3.0) / std::sqrt(static_cast<double>(p.num_points));
  EXPECT_LE((mean - x).cwiseAbs().maxCoeff(), 3.0 * se);
}

TEST(Sampling, BoxIgnoresShrinkWhenUnscaled) {
  ExtrapolationPolicy p;
  p.num_points = 2000;
  p.scale_by_shrink = false;
  const auto s = sample_points(p, vec({0, 0, 0, 0}), 0.01, RngState{1, 0});
  double widest = 0.0;
  for (const auto& q : s.points) widest = std::max(widest, q.cwiseAbs().maxCoeff());
  EXPECT_LE(widest, 1.05);
  EXPECT_GT(widest, 1.0);
}

TEST(Sampling, FixedGridCoversTheBox) {
  ExtrapolationPolicy p;
  p.kind = ExtrapolationKind::kFixedGrid;
  p.num_points = 9;
  p.scale_by_shrink = false;
  p.half_width_factor = 2.0;
  const auto s = sample_points(p, vec({0, 0}), 1.0, RngState{1, 0});
  ASSERT_EQ(s.points.size(), 9u);
  EXPECT_TRUE(s.points.front().isApprox(vec({-1, -1})));
  EXPECT_TRUE(s.points.back().isApprox(vec({1, 1})));
  p.num_points = 8;
  EXPECT_THROW(sample_points(p, vec({0, 0}), 1.0, RngState{1, 0}), ContractViolation);
}

TEST(Sampling, RejectsEmptyPolicy) {
  ExtrapolationPolicy p;
  p.num_points = 0;
  EXPECT_THROW(sample_points(p, vec({0, 0}), 1.0, RngState{}), ContractViolation);
}

TEST(Pe, ZeroRegressorGivesZero) {
  RegressorLog log;
  for (int k = 0; k < 2000; ++k) log.current.push_back(Eigen::VectorXd::Zero(3));
  EXPECT_EQ(pe_windows(log, 1.0, 0.001).c1_hat, 0.0);
}

TEST(Pe, UnitScalarRegressor) {
  RegressorLog log;
  for (int k = 0; k < 3000; ++k) log.current.push_back(Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(pe_windows(log, 1.0, 0.001).c1_hat, 1.0, 1e-3);
}

TEST(Pe, RotatingRegressorAveragesToHalfWindow) {
  const double t_window = 2.0, dt = 0.001;
  RegressorLog log;
  for (int k = 0; k < 6000; ++k) {
    const double a = 2.0 * std::numbers::pi * k * dt / t_window;
    log.current.push_back(vec({std::cos(a), std::sin(a)}));
  }
  EXPECT_NEAR(pe_windows(log, t_window, dt).c1_hat, t_window / 2.0, 1e-3);
}

TEST(Pe, ExtrapolatedConstants) {
  RegressorLog log;
  for (int k = 0; k < 2000; ++k) {
    log.current.push_back(Eigen::VectorXd::Zero(2));
    Eigen::MatrixXd cols(2, 2);
    cols << 1.0, 0.0, 0.0, 2.0;  // mean of outer products: diag(0.5, 2)
    log.extrapolated.push_back(cols);
  }
  const PeEstimate pe = pe_windows(log, 1.0, 0.001);
  EXPECT_NEAR(pe.c2_hat, 0.5, 1e-12);
  EXPECT_NEAR(pe.c3_hat, 0.5, 1e-9);
  EXPECT_TRUE(pe.satisfied());
}

TEST(Pe, WindowLongerThanLogThrows) {
  RegressorLog log;
  log.current.push_back(Eigen::VectorXd::Ones(1));
  EXPECT_THROW(pe_windows(log, 1.0, 0.001), ContractViolation);
}

TEST(SufficientConditions, ZeroProxiesNeedMarginAboveActorGainTerm) {
  // With every norm zero the critic condition reduces to
  // eta_c2 c / 3 >= eta_a1^2 / (eta_a1 + eta_a2).
  const AdpGains g = regulation_gains();
  const double threshold = 3.0 * g.eta_a1 * g.eta_a1 / (g.eta_c2 * (g.eta_a1 + g.eta_a2));
  SufficientConditionInputs in;
  in.gamma_lower = 1e-3;
  in.c_lower = threshold * (1 + 1e-9);
  auto r = sufficient_condition_report(g, in);
  EXPECT_TRUE(r.critic_satisfied);
  EXPECT_TRUE(r.actor_satisfied);
  in.c_lower = threshold * (1 - 1e-9);
  r = sufficient_condition_report(g, in);
  EXPECT_FALSE(r.critic_satisfied);
  EXPECT_TRUE(r.actor_satisfied);
}

TEST(SufficientConditions, ZeroMarginFailsCriticCondition) {
  SufficientConditionInputs in;
  in.gamma_lower = 1e-3;
  in.c_lower = 0.0;
  EXPECT_FALSE(sufficient_condition_report(regulation_gains(), in).critic_satisfied);
}

TEST(SufficientConditions, MonotoneInMargin) {
  SufficientConditionInputs in;
  in.gamma_lower = 6e-4;
  in.w_t_g_sigma = 3.0;
  in.w_norm = 1.0;
  in.g_sigma = 2.0;
  double previous = -1.0;
  for (double c : {0.0, 0.5, 1.0, 10.0}) {
    in.c_lower = c;
    const auto r = sufficient_condition_report(regulation_gains(), in);
    EXPECT_GT(r.critic_lhs, previous);
    EXPECT_GT(r.critic_rhs, 0.0);
    previous = r.critic_lhs;
  }
}
