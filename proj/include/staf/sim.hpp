#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "staf/adp.hpp"
#include "staf/dynamics.hpp"
#include "staf/excitation.hpp"
#include "staf/gains.hpp"
#include "staf/integrator.hpp"
#include "staf/kernel.hpp"
#include "staf/sysid.hpp"

namespace staf {

struct SimConfig {
  double dt = 0.001;
  double duration = 10.0;
  Integrator integrator = Integrator::kRk45;
  AdaptiveOptions tolerances;
  std::uint64_t seed = 1;
  int record_stride = 1;
  bool record_regressors = true;
  bool check_be_identity = false;

  long num_steps() const;
  /// Throws ConfigError when dt, duration or stride are inconsistent.
  void validate() const;
};

/// Time-indexed record of a closed-loop run. All per-sample arrays have the
/// same length; the regressor log holds one entry per integrator step.
struct Trajectory {
  int regulated_dim = 0;  // leading state components entering the RMS metric
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;
  std::vector<Eigen::VectorXd> w_critic;
  std::vector<Eigen::VectorXd> w_actor;
  std::vector<double> gamma_min;
  std::vector<double> gamma_max;
  std::vector<double> accumulated_cost;
  std::vector<double> value_error;                // NaN without an analytic solution
  std::vector<Eigen::VectorXd> optimal_controls;  // regulation only
  std::vector<Eigen::MatrixXd> theta_hat;         // tracking only
  std::vector<double> stack_min_singular_value;   // tracking only

  RegressorLog regressors;
  double regressor_dt = 0.0;
  int gamma_clip_events = 0;
  long substeps = 0;
  double be_identity_max_error = 0.0;

  // Running sup-norms used as proxies in the sufficient-condition report.
  double sup_w_critic = 0.0;
  double sup_g_sigma = 0.0;
  double sup_w_t_g_sigma = 0.0;

  std::size_t size() const { return times.size(); }
};

struct RegulationSetup {
  AdpGains gains = regulation_gains();
  StaFBasis<double> basis = regulation_basis<double>();
  ExtrapolationPolicy policy;
  Eigen::VectorXd x0;
  Eigen::VectorXd w_critic0;
  Eigen::VectorXd w_actor0;
  Eigen::MatrixXd gamma0;

  /// x(0) = [-1, 1], Wc(0) = 0.4 * 1, Wa(0) = 0.7 Wc(0), Gamma(0) = 500 I.
  static RegulationSetup published();
};

struct TrackingSetup {
  AdpGains gains = tracking_gains();
  StaFBasis<double> basis;
  ExtrapolationPolicy policy;
  TrackingProblem<double> problem = tracking_benchmark<double>();
  LinearDriftModel model = benchmark_drift_model();
  IdentifierGains id_gains;
  Eigen::VectorXd x0;
  Eigen::VectorXd x_hat0;
  Eigen::VectorXd w_critic0;
  Eigen::VectorXd w_actor0;
  Eigen::MatrixXd gamma0;
  int stack_capacity = 10;
  int savgol_order = 5;
  int savgol_window = 11;
  int offer_every = 10;
  bool smooth_control = false;  // store the smoothed rather than the center-sample control

  /// x(0) = x_hat(0) = 0, Wc(0) = Wa(0) = 0.025 * 1, theta_hat(0) = 0,
  /// Gamma(0) = 50 I, five kernels on a regular simplex in the 4-d
  /// concatenated state.
  static TrackingSetup published();
};

/// Integrates plant, critic, actor, Gamma and running cost as one coupled
/// ODE. Extrapolation offsets are drawn once per step and held across stages.
/// Throws NumericRangeError (message carries the time stamp) on overflow.
Trajectory run_regulation(const SimConfig& config, const RegulationSetup& setup);

/// Tracking on the concatenated state [e; xd] with certainty-equivalence
/// feedforward from the identified drift, plus the concurrent-learning
/// identifier.
Trajectory run_tracking(const SimConfig& config, const TrackingSetup& setup);

struct Metrics {
  double total_cost = 0.0;
  double steady_state_rms = 0.0;
};

/// Total cost at the final sample and RMS of the regulated-state norm over
/// samples with t >= t_final - steady_window.
Metrics metrics(const Trajectory& trajectory, double steady_window);

}  // namespace staf
