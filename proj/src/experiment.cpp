#include "staf/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>

namespace staf {

using nlohmann::json;

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

GammaBounds static_gamma_bounds(const ExperimentConfig& config) {
  return gamma_bounds(config.gains, config.gamma0, config.gamma0, PeEstimate{}, config.pe_window);
}

Diagnostics diagnose(const ExperimentConfig& config, const Trajectory& traj) {
  Diagnostics d;
  d.gamma_clip_events = traj.gamma_clip_events;
  d.substeps = traj.substeps;
  if (!traj.gamma_min.empty()) {
    d.observed_gamma_min = *std::min_element(traj.gamma_min.begin(), traj.gamma_min.end());
    d.observed_gamma_max = *std::max_element(traj.gamma_max.begin(), traj.gamma_max.end());
  }
  const auto window = std::llround(config.pe_window / config.dt);
  PeEstimate pe;
  pe.window_t = config.pe_window;
  if (window >= 1 && static_cast<std::size_t>(window) <= traj.regressors.current.size()) {
    pe = pe_windows(traj.regressors, config.pe_window, traj.regressor_dt);
    d.pe = pe;
  }
  d.gamma = gamma_bounds(config.gains, config.gamma0, config.gamma0, pe, config.pe_window);
  d.c_lower = excitation_margin(config.gains, d.gamma.upper, pe.c2_hat);

  SufficientConditionInputs& in = d.condition_inputs;
  in.gamma_lower = d.gamma.lower;
  in.c_lower = d.c_lower;
  in.g_w_sigma = 0.0;  // depends on the unknown ideal weights; no run-time proxy
  in.w_t_g_sigma = traj.sup_w_t_g_sigma;
  in.w_norm = traj.sup_w_critic;
  in.g_sigma = traj.sup_g_sigma;
  d.conditions = sufficient_condition_report(config.gains, in);
  return d;
}

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  const SimConfig sim = sim_config(config, seed);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.trajectory = config.experiment == Experiment::kRegulation ? run_regulation(sim, regulation_setup(config, seed))
                                                                 : run_tracking(sim, tracking_setup(config, seed));
    r.ok = true;
  } catch (const NumericRangeError& e) {
    r.error = e.what();
  }
  r.running_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.ok) {
    r.metrics = metrics(r.trajectory, std::min(config.steady_window, config.duration));
    r.diagnostics = diagnose(config, r.trajectory);
  }
  return r;
}

std::vector<SeedResult> run_seeds(const ExperimentConfig& config) {
  std::vector<std::future<SeedResult>> jobs;
  jobs.reserve(config.seeds.size());
  for (auto seed : config.seeds)
    jobs.push_back(std::async(std::launch::async, [&config, seed] { return run_seed(config, seed); }));
  std::vector<SeedResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

void write_csv(std::ostream& out, const Trajectory& traj, Experiment experiment) {
  const bool tracking = experiment == Experiment::kTracking;
  const Eigen::Index nx = traj.size() ? traj.states.front().size() : (tracking ? 4 : 2);
  const Eigen::Index nu = traj.size() ? traj.controls.front().size() : 1;
  const Eigen::Index nw = traj.size() ? traj.w_critic.front().size() : 0;
  const Eigen::Index nt = tracking && traj.size() ? traj.theta_hat.front().size() : 0;

  // Tracking states are the concatenated [e; xd].
  out << "t";
  for (Eigen::Index i = 0; i < nx; ++i) {
    if (tracking) out << (i < nx / 2 ? ",e" + std::to_string(i + 1) : ",xd" + std::to_string(i - nx / 2 + 1));
    else out << ",x" << i + 1;
  }
  for (Eigen::Index i = 0; i < nu; ++i) out << ",u" << i + 1;
  for (Eigen::Index i = 0; i < nw; ++i) out << ",Wc" << i + 1;
  for (Eigen::Index i = 0; i < nw; ++i) out << ",Wa" << i + 1;
  out << ",gamma_min,gamma_max,cost,value_error";
  for (Eigen::Index i = 0; i < nt; ++i) out << ",theta" << i + 1;
  out << '\n';

  for (std::size_t k = 0; k < traj.size(); ++k) {
    put(out, traj.times[k]);
    auto row = [&](const Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << ',';
        put(out, v(i));
      }
    };
    row(traj.states[k]);
    row(traj.controls[k]);
    row(traj.w_critic[k]);
    row(traj.w_actor[k]);
    for (double v : {traj.gamma_min[k], traj.gamma_max[k], traj.accumulated_cost[k], traj.value_error[k]}) {
      out << ',';
      put(out, v);
    }
    if (tracking) row(traj.theta_hat[k].reshaped());
    out << '\n';
  }
}

json summary(const ExperimentConfig& config, const std::vector<SeedResult>& results) {
  std::vector<double> cost, rms, runtime, theta_err, final_norm;
  int failed = 0;
  for (const auto& r : results) {
    runtime.push_back(r.running_time);
    if (!r.ok) {
      ++failed;
      continue;
    }
    cost.push_back(r.metrics.total_cost);
    rms.push_back(r.metrics.steady_state_rms);
    if (r.trajectory.size())
      final_norm.push_back(r.trajectory.states.back().head(r.trajectory.regulated_dim).norm());
    if (config.experiment == Experiment::kTracking && r.trajectory.size()) {
      LinearDriftModel m = benchmark_drift_model();
      m.theta_hat = r.trajectory.theta_hat.back();
      theta_err.push_back(m.parameter_error());
    }
  }
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return v.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };

  json j;
  j["experiment"] = to_string(config.experiment);
  j["seeds"] = results.size();
  j["failed_seeds"] = failed;
  j["duration_s"] = config.duration;
  j["dt_s"] = config.dt;
  j["steady_state_window_s"] = std::min(config.steady_window, config.duration);
  j["total_cost_mean"] = number_or_null(mean(cost));
  j["total_cost_stddev"] = number_or_null(stddev(cost));
  j["steady_state_rms_error_mean"] = number_or_null(mean(rms));
  j["steady_state_rms_error_stddev"] = number_or_null(stddev(rms));
  j["final_state_norm_mean"] = number_or_null(mean(final_norm));
  j["running_time_s_mean"] = number_or_null(mean(runtime));
  if (config.experiment == Experiment::kTracking) j["parameter_error_max_mean"] = number_or_null(mean(theta_err));
  for (const auto& r : results) {
    const std::string p = "seed_" + std::to_string(r.seed) + "_";
    j[p + "status"] = r.ok ? "ok" : "numeric_failure";
    if (!r.ok) {
      j[p + "error"] = r.error;
      continue;
    }
    j[p + "total_cost"] = r.metrics.total_cost;
    j[p + "steady_state_rms_error"] = r.metrics.steady_state_rms;
    j[p + "running_time_s"] = r.running_time;
  }
  return j;
}

json diagnostics_json(const std::vector<SeedResult>& results) {
  json out = json::object();
  for (const auto& r : results) {
    json d;
    d["status"] = r.ok ? "ok" : "numeric_failure";
    if (!r.ok) {
      d["error"] = r.error;
      out["seed_" + std::to_string(r.seed)] = d;
      continue;
    }
    const Diagnostics& g = r.diagnostics;
    if (g.pe) {
      d["pe_window_s"] = g.pe->window_t;
      d["pe_c1_hat"] = g.pe->c1_hat;
      d["pe_c2_hat"] = g.pe->c2_hat;
      d["pe_c3_hat"] = g.pe->c3_hat;
      d["pe_satisfied"] = g.pe->satisfied();
    } else {
      d["pe_window_s"] = nullptr;
    }
    d["gamma_lower"] = g.gamma.lower;
    d["gamma_upper"] = number_or_null(g.gamma.upper);
    d["gamma_upper_valid"] = g.gamma.upper_valid;
    d["gamma_short_horizon_upper"] = g.gamma.short_horizon_upper;
    d["gamma_observed_min"] = g.observed_gamma_min;
    d["gamma_observed_max"] = g.observed_gamma_max;
    d["gamma_clip_events"] = g.gamma_clip_events;
    d["c_lower"] = number_or_null(g.c_lower);
    d["sup_w_critic"] = g.condition_inputs.w_norm;
    d["sup_g_sigma"] = g.condition_inputs.g_sigma;
    d["sup_w_t_g_sigma"] = g.condition_inputs.w_t_g_sigma;
    d["critic_condition_lhs"] = g.conditions.critic_lhs;
    d["critic_condition_rhs"] = g.conditions.critic_rhs;
    d["critic_condition_satisfied"] = g.conditions.critic_satisfied;
    d["actor_condition_lhs"] = g.conditions.actor_lhs;
    d["actor_condition_rhs"] = g.conditions.actor_rhs;
    d["actor_condition_satisfied"] = g.conditions.actor_satisfied;
    d["integrator_substeps"] = g.substeps;
    out["seed_" + std::to_string(r.seed)] = d;
  }
  return out;
}

}  // namespace staf
