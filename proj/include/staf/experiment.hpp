#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "staf/config.hpp"

namespace staf {

/// Excitation and stability diagnostics of one run.
struct Diagnostics {
  std::optional<PeEstimate> pe;  // empty when the run is shorter than the PE window
  GammaBounds gamma;
  double c_lower = 0.0;
  SufficientConditionReport conditions;
  SufficientConditionInputs condition_inputs;
  int gamma_clip_events = 0;
  long substeps = 0;
  double observed_gamma_min = 0.0;
  double observed_gamma_max = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // numeric-range message when !ok
  double running_time = 0.0;
  Trajectory trajectory;
  Metrics metrics;
  Diagnostics diagnostics;
};

/// Runs one seed of the configured experiment. Numeric-range failures are
/// captured in the result; contract and config errors propagate.
SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// Runs every seed concurrently (one job per seed, no shared mutable state).
/// Results are ordered as config.seeds.
std::vector<SeedResult> run_seeds(const ExperimentConfig& config);

Diagnostics diagnose(const ExperimentConfig& config, const Trajectory& trajectory);

/// Gain-matrix bounds implied by the config alone, without a run.
GammaBounds static_gamma_bounds(const ExperimentConfig& config);

/// Header: t, x..., u..., Wc..., Wa..., gamma_min, gamma_max, cost,
/// value_error, then theta_hat (column-major) for tracking. Values are
/// written with 17 significant digits.
void write_csv(std::ostream& out, const Trajectory& trajectory, Experiment experiment);

/// Flat key/value record over all seeds.
nlohmann::json summary(const ExperimentConfig& config, const std::vector<SeedResult>& results);

nlohmann::json diagnostics_json(const std::vector<SeedResult>& results);

}  // namespace staf
