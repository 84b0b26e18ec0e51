#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "staf/gains.hpp"

namespace staf {

enum class ExtrapolationKind { kUniformBoxSingle, kFixedGrid };

/// Where Bellman-error extrapolation points are drawn around the state.
/// Offsets lie in [-w, w]^n with w = half_width_factor / 2, multiplied by the
/// shrink value when `scale_by_shrink` is set.
struct ExtrapolationPolicy {
  ExtrapolationKind kind = ExtrapolationKind::kUniformBoxSingle;
  double half_width_factor = 2.1;
  int num_points = 1;
  std::uint64_t seed = 1;
  bool resample_every_step = true;
  bool scale_by_shrink = true;
};

/// Counter-based generator state: draw k is a pure function of (seed, k).
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
};

/// Uniform double in [0, 1) for draw `counter` of stream `seed`.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

struct SampledPoints {
  std::vector<Eigen::VectorXd> points;
  RngState rng;
};

/// Extrapolation points x + a_i. Deterministic in (policy, x, shrink, rng).
SampledPoints sample_points(const ExtrapolationPolicy& policy, const Eigen::VectorXd& x, double shrink_value,
                            RngState rng);

/// Empirical excitation constants over a recorded regressor history.
struct PeEstimate {
  double c1_hat = 0.0;
  double c2_hat = 0.0;
  double c3_hat = 0.0;
  double window_t = 1.0;

  bool satisfied() const { return c1_hat > 0.0 || c2_hat > 0.0 || c3_hat > 0.0; }
};

/// Normalized regressors recorded once per integrator step.
struct RegressorLog {
  std::vector<Eigen::VectorXd> current;       // omega / rho
  std::vector<Eigen::MatrixXd> extrapolated;  // L x N, column i is omega_i / rho_i
};

/// c1: min over windows of lambda_min(int w w'/rho^2)
/// c2: min over samples of lambda_min(1/N sum_i w_i w_i'/rho_i^2)
/// c3: min over windows of lambda_min(1/N int sum_i w_i w_i'/rho_i^2)
/// Integrals are left Riemann sums with step dt.
PeEstimate pe_windows(const RegressorLog& log, double window_t, double dt);

/// Sup-norm proxies gathered from a run; the ideal-weight quantities are
/// unknowable and stand in via running estimates.
struct SufficientConditionInputs {
  double gamma_lower = 0.0;
  double c_lower = 0.0;         // beta / (2 Gamma_upper eta_c2) + c2 / 2
  double g_w_sigma = 0.0;       // ||G_W sigma||
  double w_t_g_sigma = 0.0;     // ||W' G_sigma||
  double w_norm = 0.0;          // ||W||
  double g_sigma = 0.0;         // ||G_sigma||
};

struct SufficientConditionReport {
  double critic_lhs = 0.0;
  double critic_rhs = 0.0;
  bool critic_satisfied = false;
  double actor_lhs = 0.0;
  double actor_rhs = 0.0;
  bool actor_satisfied = false;
};

/// Evaluates the two gain inequalities of the ultimate-boundedness result.
/// Advisory only.
SufficientConditionReport sufficient_condition_report(const AdpGains& gains, const SufficientConditionInputs& in);

}  // namespace staf
