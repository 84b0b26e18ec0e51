#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "staf/dynamics.hpp"

namespace staf {

/// f_hat(x) = theta_hat' features(x) with theta_hat p x n.
struct LinearDriftModel {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> features;
  Eigen::MatrixXd theta_hat;
  std::optional<Eigen::MatrixXd> theta_true;

  int num_features() const { return static_cast<int>(theta_hat.rows()); }
  Eigen::VectorXd drift(const Eigen::VectorXd& x) const { return theta_hat.transpose() * features(x); }
  /// Max-abs parameter error; requires theta_true.
  double parameter_error() const;
};

/// [x1; x2; x2 (cos(2 x1) + 2)]
Eigen::VectorXd features_benchmark(const Eigen::VectorXd& x);

/// Ideal parameters of the benchmark drift in the feature basis above.
Eigen::MatrixXd theta_benchmark();

LinearDriftModel benchmark_drift_model();

struct StackEntry {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd xdot;
  Eigen::VectorXd features;   // features(x)
  Eigen::VectorXd regressand;  // xdot - g(x) u
};

/// Recorded data for concurrent learning. Once full, a candidate replaces an
/// entry only if that raises the smallest singular value of the stacked
/// feature matrix.
struct HistoryStack {
  int capacity = 10;
  std::vector<StackEntry> entries;
  double min_singular_value = 0.0;
};

/// p-th singular value of the k x p matrix whose rows are the features; zero
/// when k < p.
double stack_min_singular_value(const std::vector<StackEntry>& entries);

/// Returns true when the candidate was stored.
bool stack_insert(HistoryStack& stack, StackEntry candidate);

StackEntry make_stack_entry(const LinearDriftModel& model, const ControlAffineSystem<double>& plant,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xdot);

/// Least-squares polynomial smoothing differentiator over a centered window.
class SavitzkyGolay {
 public:
  SavitzkyGolay(int order, int window_length);

  int order() const { return order_; }
  int window_length() const { return window_length_; }

  /// First derivative at the window center; samples are rows, spacing dt.
  Eigen::VectorXd derivative(const Eigen::MatrixXd& samples, double dt) const;
  /// Smoothed value at the window center (the fitted polynomial at t = 0).
  Eigen::VectorXd smooth(const Eigen::MatrixXd& samples) const;
  /// Weights w such that derivative = (w' samples) / dt.
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& smoothing_weights() const { return smoothing_weights_; }

 private:
  int order_;
  int window_length_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd smoothing_weights_;
};

struct IdentifierGains {
  double k = 500.0;
  double k_theta = 20.0;
  Eigen::MatrixXd gamma_theta = Eigen::MatrixXd::Identity(3, 3);
};

struct IdentifierRates {
  Eigen::VectorXd x_hat_dot;
  Eigen::MatrixXd theta_dot;
};

/// Observer x_hat' = theta_hat' s(x) + g(x) u + k (x - x_hat) and parameter law
/// theta_hat' = G s(x)(x - x_hat)' + k_theta G sum_j s(x_j)(xdot_j - g_j u_j - theta_hat' s(x_j))'.
IdentifierRates identifier_rhs(const LinearDriftModel& model, const HistoryStack& stack,
                               const ControlAffineSystem<double>& plant, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& x_hat, const Eigen::VectorXd& u, const IdentifierGains& gains);

/// One RK4 step of the identifier with x and u held over the step.
void identifier_step(LinearDriftModel& model, const HistoryStack& stack, const ControlAffineSystem<double>& plant,
                     const Eigen::VectorXd& x, Eigen::VectorXd& x_hat, const Eigen::VectorXd& u,
                     const IdentifierGains& gains, double dt);

}  // namespace staf
