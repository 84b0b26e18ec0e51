#include "staf/sysid.hpp"

#include <cmath>

#include "staf/types.hpp"

namespace staf {

double LinearDriftModel::parameter_error() const {
  require(theta_true.has_value(), "parameter_error: no ideal parameters attached");
  return (theta_hat - *theta_true).cwiseAbs().maxCoeff();
}

Eigen::VectorXd features_benchmark(const Eigen::VectorXd& x) {
  require(x.size() == 2, "features_benchmark: state must be 2-dimensional");
  Eigen::VectorXd s(3);
  s << x(0), x(1), x(1) * (std::cos(2.0 * x(0)) + 2.0);
  return s;
}

Eigen::MatrixXd theta_benchmark() {
  // theta' = [-1 1 0; -0.5 0 -0.5]
  Eigen::MatrixXd theta(3, 2);
  theta << -1.0, -0.5,
            1.0,  0.0,
            0.0, -0.5;
  return theta;
}

LinearDriftModel benchmark_drift_model() {
  LinearDriftModel m;
  m.features = features_benchmark;
  m.theta_hat = Eigen::MatrixXd::Zero(3, 2);
  m.theta_true = theta_benchmark();
  return m;
}

double stack_min_singular_value(const std::vector<StackEntry>& entries) {
  if (entries.empty()) return 0.0;
  const Eigen::Index p = entries.front().features.size();
  if (static_cast<Eigen::Index>(entries.size()) < p) return 0.0;
  Eigen::MatrixXd stacked(entries.size(), p);
  for (std::size_t j = 0; j < entries.size(); ++j) stacked.row(j) = entries[j].features.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  return svd.singularValues()(p - 1);
}

bool stack_insert(HistoryStack& stack, StackEntry candidate) {
  require(stack.capacity > 0, "stack_insert: capacity must be positive");
  if (static_cast<int>(stack.entries.size()) < stack.capacity) {
    stack.entries.push_back(std::move(candidate));
    stack.min_singular_value = stack_min_singular_value(stack.entries);
    return true;
  }
  double best = stack.min_singular_value;
  int best_slot = -1;
  std::vector<StackEntry> trial = stack.entries;
  for (std::size_t j = 0; j < trial.size(); ++j) {
    std::swap(trial[j], candidate);
    const double s = stack_min_singular_value(trial);
    std::swap(trial[j], candidate);
    if (s > best) {
      best = s;
      best_slot = static_cast<int>(j);
    }
  }
  if (best_slot < 0) return false;
  stack.entries[best_slot] = std::move(candidate);
  stack.min_singular_value = best;
  return true;
}

StackEntry make_stack_entry(const LinearDriftModel& model, const ControlAffineSystem<double>& plant,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& xdot) {
  StackEntry e;
  e.x = x;
  e.u = u;
  e.xdot = xdot;
  e.features = model.features(x);
  e.regressand = xdot - plant.effectiveness(x) * u;
  return e;
}

SavitzkyGolay::SavitzkyGolay(int order, int window_length) : order_(order), window_length_(window_length) {
  if (order < 1) throw ConfigError("Savitzky-Golay order must be >= 1");
  if (window_length % 2 == 0 || window_length <= order)
    throw ConfigError("Savitzky-Golay window must be odd and longer than the order");
  const int half = window_length / 2;
  Eigen::MatrixXd vander(window_length, order + 1);
  for (int i = 0; i < window_length; ++i) {
    const double t = i - half;
    double pw = 1.0;
    for (int k = 0; k <= order; ++k) {
      vander(i, k) = pw;
      pw *= t;
    }
  }
  // Rows 0 and 1 of the least-squares solution operator give the value and
  // slope of the fitted polynomial at t = 0.
  const Eigen::MatrixXd solve =
      vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window_length, window_length));
  smoothing_weights_ = solve.row(0).transpose();
  weights_ = solve.row(1).transpose();
}

Eigen::VectorXd SavitzkyGolay::derivative(const Eigen::MatrixXd& samples, double dt) const {
  require(samples.rows() == window_length_, "SavitzkyGolay: sample count must equal the window length");
  require(dt > 0, "SavitzkyGolay: dt must be positive");
  return (weights_.transpose() * samples).transpose() / dt;
}

Eigen::VectorXd SavitzkyGolay::smooth(const Eigen::MatrixXd& samples) const {
  require(samples.rows() == window_length_, "SavitzkyGolay: sample count must equal the window length");
  return (smoothing_weights_.transpose() * samples).transpose();
}

IdentifierRates identifier_rhs(const LinearDriftModel& model, const HistoryStack& stack,
                               const ControlAffineSystem<double>& plant, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& x_hat, const Eigen::VectorXd& u,
                               const IdentifierGains& gains) {
  const Eigen::VectorXd s = model.features(x);
  const Eigen::VectorXd x_tilde = x - x_hat;
  IdentifierRates r;
  r.x_hat_dot = model.theta_hat.transpose() * s + plant.effectiveness(x) * u + gains.k * x_tilde;

  Eigen::MatrixXd stack_term = Eigen::MatrixXd::Zero(model.theta_hat.rows(), model.theta_hat.cols());
  for (const auto& e : stack.entries)
    stack_term += e.features * (e.regressand - model.theta_hat.transpose() * e.features).transpose();
  r.theta_dot = gains.gamma_theta * (s * x_tilde.transpose() + gains.k_theta * stack_term);
  return r;
}

void identifier_step(LinearDriftModel& model, const HistoryStack& stack, const ControlAffineSystem<double>& plant,
                     const Eigen::VectorXd& x, Eigen::VectorXd& x_hat, const Eigen::VectorXd& u,
                     const IdentifierGains& gains, double dt) {
  const Eigen::MatrixXd theta0 = model.theta_hat;
  const Eigen::VectorXd xh0 = x_hat;
  auto eval = [&](const Eigen::VectorXd& xh, const Eigen::MatrixXd& th) {
    model.theta_hat = th;
    return identifier_rhs(model, stack, plant, x, xh, u, gains);
  };
  const IdentifierRates k1 = eval(xh0, theta0);
  const IdentifierRates k2 = eval(xh0 + 0.5 * dt * k1.x_hat_dot, theta0 + 0.5 * dt * k1.theta_dot);
  const IdentifierRates k3 = eval(xh0 + 0.5 * dt * k2.x_hat_dot, theta0 + 0.5 * dt * k2.theta_dot);
  const IdentifierRates k4 = eval(xh0 + dt * k3.x_hat_dot, theta0 + dt * k3.theta_dot);
  x_hat = xh0 + dt / 6.0 * (k1.x_hat_dot + 2.0 * k2.x_hat_dot + 2.0 * k3.x_hat_dot + k4.x_hat_dot);
  model.theta_hat =
      theta0 + dt / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot);
}

}  // namespace staf
