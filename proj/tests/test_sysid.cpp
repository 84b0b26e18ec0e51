#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "staf/dynamics.hpp"
#include "staf/sysid.hpp"

using namespace staf;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

StackEntry entry_with_features(const Eigen::VectorXd& s) {
  StackEntry e;
  e.features = s;
  e.regressand = Eigen::VectorXd::Zero(2);
  return e;
}

}  // namespace

TEST(Features, HandValues) {
  EXPECT_TRUE(features_benchmark(vec({0, 0})).isZero(0.0));
  EXPECT_TRUE(features_benchmark(vec({0, 1})).isApprox(vec({0, 1, 3}), 1e-15));
  EXPECT_THROW(features_benchmark(vec({0, 1, 2})), ContractViolation);
}

TEST(Features, IdealParametersReproduceTrackingPlantDrift) {
  const auto plant = tracking_benchmark<double>().plant;
  const Eigen::MatrixXd theta = theta_benchmark();
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = vec({u(gen), u(gen)});
    const Eigen::VectorXd f = theta.transpose() * features_benchmark(x);
    EXPECT_LE((f - plant.drift(x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Features, RegulationDriftIsNotInTheFeatureSpan) {
  // The regulation drift is quadratic in cos(2 x1) + 2; the features are linear in it.
  const auto reg = regulation_benchmark<double>().system;
  const Eigen::VectorXd x = vec({0.3, 1.0});
  EXPECT_GT((theta_benchmark().transpose() * features_benchmark(x) - reg.drift(x)).norm(), 1.0);
}

TEST(DriftModel, ParameterError) {
  LinearDriftModel m = benchmark_drift_model();
  EXPECT_DOUBLE_EQ(m.parameter_error(), 1.0);
  m.theta_hat = theta_benchmark();
  EXPECT_EQ(m.parameter_error(), 0.0);
  m.theta_true.reset();
  EXPECT_THROW(m.parameter_error(), ContractViolation);
}

TEST(Stack, EmptyStackAlwaysInserts) {
  HistoryStack s;
  s.capacity = 2;
  EXPECT_TRUE(stack_insert(s, entry_with_features(vec({0, 0, 0}))));
  EXPECT_EQ(s.entries.size(), 1u);
  EXPECT_EQ(s.min_singular_value, 0.0);
}

TEST(Stack, DuplicateAtCapacityIsDiscarded) {
  HistoryStack s;
  s.capacity = 3;
  stack_insert(s, entry_with_features(vec({1, 0, 0})));
  stack_insert(s, entry_with_features(vec({0, 1, 0})));
  stack_insert(s, entry_with_features(vec({0, 0, 1})));
  EXPECT_NEAR(s.min_singular_value, 1.0, 1e-12);
  EXPECT_FALSE(stack_insert(s, entry_with_features(vec({0, 1, 0}))));
  EXPECT_EQ(s.entries[1].features, vec({0, 1, 0}));
}

TEST(Stack, ReplacementMatchesExhaustiveSearch) {
  HistoryStack s;
  s.capacity = 3;
  const Eigen::VectorXd rows[3] = {vec({1, 0, 0}), vec({0, 1, 0}), vec({0.9, 0.1, 0.05})};
  for (const auto& r : rows) stack_insert(s, entry_with_features(r));
  const double before = s.min_singular_value;
  const Eigen::VectorXd candidate = vec({0, 0, 1});

  double best = before;
  int best_slot = -1;
  for (int j = 0; j < 3; ++j) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) m.row(i) = (i == j ? candidate : rows[i]).transpose();
    const double sv = Eigen::JacobiSVD<Eigen::Matrix3d>(m).singularValues()(2);
    if (sv > best) {
      best = sv;
      best_slot = j;
    }
  }
  ASSERT_EQ(best_slot, 2);
  EXPECT_TRUE(stack_insert(s, entry_with_features(candidate)));
  EXPECT_EQ(s.entries[2].features, candidate);
  EXPECT_NEAR(s.min_singular_value, best, 1e-12);
  EXPECT_GT(s.min_singular_value, before);
}

TEST(Stack, EntryRegressandRemovesControlContribution) {
  const auto plant = tracking_benchmark<double>().plant;
  const LinearDriftModel m = benchmark_drift_model();
  const StackEntry e = make_stack_entry(m, plant, vec({0, 1}), vec({2}), vec({1, 7}));
  EXPECT_TRUE(e.regressand.isApprox(vec({1, 1}), 1e-15));  // g([0,1]) = [0; 3]
  EXPECT_TRUE(e.features.isApprox(vec({0, 1, 3}), 1e-15));
}

TEST(SavitzkyGolay, ExactOnQuarticPolynomial) {
  const SavitzkyGolay sg(5, 11);
  const double dt = 0.01, t0 = 0.3;
  Eigen::MatrixXd samples(11, 2);
  for (int i = 0; i < 11; ++i) {
    const double t = t0 + (i - 5) * dt;
    samples(i, 0) = std::pow(t, 4);
    samples(i, 1) = 2.0 - t + 3.0 * t * t;
  }
  const Eigen::VectorXd d = sg.derivative(samples, dt);
  EXPECT_NEAR(d(0), 4.0 * std::pow(t0, 3), 1e-9);
  EXPECT_NEAR(d(1), -1.0 + 6.0 * t0, 1e-9);
  const Eigen::VectorXd v = sg.smooth(samples);
  EXPECT_NEAR(v(0), std::pow(t0, 4), 1e-12);
  EXPECT_NEAR(v(1), 2.0 - t0 + 3.0 * t0 * t0, 1e-12);
}

TEST(SavitzkyGolay, WeightsAreAntisymmetricAndSumToZero) {
  const SavitzkyGolay sg(5, 11);
  EXPECT_NEAR(sg.weights().sum(), 0.0, 1e-12);
  EXPECT_NEAR(sg.smoothing_weights().sum(), 1.0, 1e-12);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(sg.weights()(i), -sg.weights()(10 - i), 1e-12);
}

TEST(SavitzkyGolay, InvalidConfiguration) {
  EXPECT_THROW(SavitzkyGolay(5, 10), ConfigError);
  EXPECT_THROW(SavitzkyGolay(5, 5), ConfigError);
  EXPECT_THROW(SavitzkyGolay(0, 11), ConfigError);
  const SavitzkyGolay sg(2, 5);
  EXPECT_THROW(sg.derivative(Eigen::MatrixXd::Zero(4, 1), 0.1), ContractViolation);
}

class IdentifierTest : public ::testing::Test {
 protected:
  ControlAffineSystem<double> plant = tracking_benchmark<double>().plant;
  LinearDriftModel model = benchmark_drift_model();
  IdentifierGains gains;
};

TEST_F(IdentifierTest, IdealParametersAreAFixedPoint) {
  model.theta_hat = theta_benchmark();
  HistoryStack stack;
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int j = 0; j < 10; ++j) {
    const Eigen::VectorXd x = vec({u(gen), u(gen)});
    const Eigen::VectorXd uu = vec({u(gen)});
    const Eigen::VectorXd xdot = plant.drift(x) + plant.effectiveness(x) * uu;
    stack_insert(stack, make_stack_entry(model, plant, x, uu, xdot));
  }
  const Eigen::VectorXd x = vec({0.2, -0.4});
  const Eigen::VectorXd uu = vec({0.7});
  const auto r = identifier_rhs(model, stack, plant, x, x, uu, gains);
  EXPECT_LE(r.theta_dot.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((r.x_hat_dot - (plant.drift(x) + plant.effectiveness(x) * uu)).norm(), 1e-12);
}

TEST_F(IdentifierTest, EmptyStackWithMatchedObserverIsStill) {
  const Eigen::VectorXd x = vec({0.5, 0.5});
  const auto r = identifier_rhs(model, HistoryStack{}, plant, x, x, vec({1.0}), gains);
  EXPECT_TRUE(r.theta_dot.isZero(0.0));
}

TEST_F(IdentifierTest, SingleEntryAgainstHandEvaluation) {
  // theta_hat = 0, x_hat = x: theta' = k_theta Gamma s_j r_j' with
  // s_j = [0, 1, 3] and residual r_j = [1, 2].
  HistoryStack stack;
  StackEntry e;
  e.features = vec({0, 1, 3});
  e.regressand = vec({1, 2});
  stack.entries.push_back(e);
  gains.gamma_theta = 2.0 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd x = vec({0.1, 0.1});
  const auto r = identifier_rhs(model, stack, plant, x, x, vec({0.0}), gains);
  Eigen::MatrixXd expected(3, 2);
  expected << 0, 0, 40, 80, 120, 240;  // 2 * 20 * s r'
  EXPECT_TRUE(r.theta_dot.isApprox(expected, 1e-15));
}

TEST_F(IdentifierTest, ObserverErrorDrivesEstimate) {
  // theta_hat = 0, empty stack: theta' = Gamma s(x) (x - x_hat)'.
  const Eigen::VectorXd x = vec({0.0, 1.0});
  const Eigen::VectorXd xh = vec({0.0, 0.5});
  const auto r = identifier_rhs(model, HistoryStack{}, plant, x, xh, vec({0.0}), gains);
  Eigen::MatrixXd expected(3, 2);
  expected << 0, 0, 0, 0.5, 0, 1.5;
  EXPECT_TRUE(r.theta_dot.isApprox(expected, 1e-15));
  EXPECT_TRUE(r.x_hat_dot.isApprox(vec({0, 250}), 1e-15));  // k (x - x_hat)
}

TEST_F(IdentifierTest, StepConvergesOnPersistentData) {
  HistoryStack stack;
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int j = 0; j < 30; ++j) {
    const Eigen::VectorXd x = vec({u(gen), u(gen)});
    const Eigen::VectorXd uu = vec({u(gen)});
    stack_insert(stack, make_stack_entry(model, plant, x, uu, plant.drift(x) + plant.effectiveness(x) * uu));
  }
  // The plant rests at the origin, where the features vanish, so only the
  // recorded data drives the estimate.
  Eigen::VectorXd x_hat = vec({0.0, 0.0});
  for (int k = 0; k < 20000; ++k) identifier_step(model, stack, plant, vec({0.0, 0.0}), x_hat, vec({0.0}), gains, 1e-3);
  EXPECT_LT(model.parameter_error(), 1e-6);
}
