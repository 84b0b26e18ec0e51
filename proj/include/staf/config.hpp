#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "staf/sim.hpp"

namespace staf {

enum class Experiment { kRegulation, kTracking };

/// Every knob of the two experiments. Defaults reproduce the published
/// regulation and tracking settings; see default_config().
struct ExperimentConfig {
  Experiment experiment = Experiment::kRegulation;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir;  // empty: resolved by the runner

  // Simulation
  double dt = 0.001;
  double duration = 10.0;
  Integrator integrator = Integrator::kRk45;
  AdaptiveOptions tolerances;
  int record_stride = 1;
  double steady_window = 2.0;  // final 20% of the run

  AdpGains gains = regulation_gains();

  // Basis
  ShrinkMode shrink_mode = ShrinkMode::kShrinking;
  double shrink_eps0 = 0.01;
  double shrink_nu2 = 1.0;
  double shrink_scale = 0.7;
  Eigen::MatrixXd offsets;  // L x n

  // Extrapolation
  ExtrapolationKind extrapolation_kind = ExtrapolationKind::kUniformBoxSingle;
  double half_width_factor = 2.1;
  bool scale_by_shrink = true;
  bool resample_every_step = true;

  // Initial conditions
  Eigen::VectorXd x0;
  Eigen::VectorXd w_critic0;
  Eigen::VectorXd w_actor0;
  double gamma0 = 500.0;  // Gamma(0) = gamma0 * I

  // Identifier (tracking only)
  IdentifierGains id_gains;
  Eigen::VectorXd x_hat0;
  int stack_capacity = 10;
  int savgol_order = 5;
  int savgol_window = 11;
  int offer_every = 10;
  bool smooth_control = false;

  // Diagnostics
  double pe_window = 1.0;
};

ExperimentConfig default_config(Experiment experiment);

/// Builds a config from a JSON document: the "experiment" key selects the
/// defaults, remaining keys override them. Unknown keys and type errors throw
/// ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Full effective configuration; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Aggregated list of invariant violations; empty when the config is valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Parses seed lists such as "1..10", "3", "1,4,7" or "1..3,9".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

std::string to_string(Experiment experiment);
Experiment parse_experiment(const std::string& name);

SimConfig sim_config(const ExperimentConfig& config, std::uint64_t seed);
StaFBasis<double> basis_from(const ExperimentConfig& config);
ExtrapolationPolicy policy_from(const ExperimentConfig& config, std::uint64_t seed);
RegulationSetup regulation_setup(const ExperimentConfig& config, std::uint64_t seed);
TrackingSetup tracking_setup(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace staf
