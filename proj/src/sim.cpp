#include "staf/sim.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <string>

namespace staf {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double max_abs_eig(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

// Quantities from the first stage of a step, used for recording and logs.
struct StageInfo {
  Eigen::VectorXd control;
  BePoint<double> current;
  std::vector<BePoint<double>> extrap;
};

struct AdpRates {
  Eigen::VectorXd w_critic;
  Eigen::VectorXd w_actor;
  Eigen::MatrixXd gamma;
};

AdpRates adp_rates(const AdpGains& gains, const Eigen::VectorXd& wc, const Eigen::VectorXd& wa,
                   const Eigen::MatrixXd& gamma, const BePoint<double>& current,
                   const std::vector<BePoint<double>>& extrap) {
  const std::span<const BePoint<double>> ex(extrap);
  return {critic_rhs<double>(gains, gamma, current, ex), actor_rhs<double>(gains, wa, wc, current, ex),
          gamma_rhs<double>(gains, gamma, current, ex)};
}

std::string at_time(double t, const std::exception& e) {
  std::ostringstream os;
  os.precision(6);
  os << "numeric range failure at t = " << std::fixed << t << " s: " << e.what();
  return os.str();
}

void log_regressors(Trajectory& traj, const StageInfo& info) {
  traj.regressors.current.push_back(info.current.omega / info.current.rho);
  Eigen::MatrixXd cols(info.current.omega.size(), info.extrap.size());
  for (std::size_t i = 0; i < info.extrap.size(); ++i)
    cols.col(static_cast<Eigen::Index>(i)) = info.extrap[i].omega / info.extrap[i].rho;
  traj.regressors.extrapolated.push_back(std::move(cols));
}

void track_sup_norms(Trajectory& traj, const Eigen::VectorXd& wc, const BePoint<double>& p) {
  traj.sup_w_critic = std::max(traj.sup_w_critic, wc.norm());
  traj.sup_g_sigma = std::max(traj.sup_g_sigma, max_abs_eig(p.g_sigma));
  traj.sup_w_t_g_sigma = std::max(traj.sup_w_t_g_sigma, (p.g_sigma.transpose() * wc).norm());
}

void record_gamma(Trajectory& traj, const Eigen::MatrixXd& gamma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma, Eigen::EigenvaluesOnly);
  traj.gamma_min.push_back(eig.eigenvalues().minCoeff());
  traj.gamma_max.push_back(eig.eigenvalues().maxCoeff());
}

double be_identity_error(double regressor_form, double direct) {
  return std::abs(regressor_form - direct) / std::max(1.0, std::abs(regressor_form));
}

}  // namespace

long SimConfig::num_steps() const { return std::lround(duration / dt); }

void SimConfig::validate() const {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  if (!(duration >= 0)) throw ConfigError("duration must be nonnegative");
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6)
    throw ConfigError("duration must be an integer number of steps");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
}

RegulationSetup RegulationSetup::published() {
  RegulationSetup s;
  s.x0 = Eigen::Vector2d(-1.0, 1.0);
  s.w_critic0 = Eigen::VectorXd::Constant(3, 0.4);
  s.w_actor0 = 0.7 * s.w_critic0;
  s.gamma0 = 500.0 * Eigen::MatrixXd::Identity(3, 3);
  return s;
}

TrackingSetup TrackingSetup::published() {
  TrackingSetup s;
  s.basis = simplex_basis<double>(4, 1.0);
  s.policy.scale_by_shrink = false;
  s.x0 = Eigen::VectorXd::Zero(2);
  s.x_hat0 = Eigen::VectorXd::Zero(2);
  s.w_critic0 = Eigen::VectorXd::Constant(5, 0.025);
  s.w_actor0 = Eigen::VectorXd::Constant(5, 0.025);
  s.gamma0 = 50.0 * Eigen::MatrixXd::Identity(5, 5);
  return s;
}

Trajectory run_regulation(const SimConfig& config, const RegulationSetup& setup) {
  config.validate();
  setup.basis.validate();
  const auto bench = regulation_benchmark<double>();
  const auto& sys = bench.system;
  const auto& cost = bench.cost;
  const AdpGains& gains = setup.gains;
  require(setup.policy.num_points == gains.num_extrap, "run_regulation: policy and gains disagree on N");

  const int n = sys.n;
  const int l = setup.basis.num_kernels();
  require(setup.x0.size() == n && setup.w_critic0.size() == l && setup.w_actor0.size() == l &&
              setup.gamma0.rows() == l && setup.gamma0.cols() == l,
          "run_regulation: initial condition dimensions");

  // y = [x, Wc, Wa, vec(Gamma), cost]
  const int ix = 0, iwc = n, iwa = n + l, ig = n + 2 * l, ic = n + 2 * l + l * l;
  Eigen::VectorXd y(ic + 1);
  y.segment(ix, n) = setup.x0;
  y.segment(iwc, l) = setup.w_critic0;
  y.segment(iwa, l) = setup.w_actor0;
  y.segment(ig, l * l) = Eigen::Map<const Eigen::VectorXd>(setup.gamma0.data(), l * l);
  y(ic) = 0.0;

  std::vector<Eigen::VectorXd> offsets;
  auto rhs = [&](const Eigen::VectorXd& s, StageInfo* info) {
    const Eigen::VectorXd x = s.segment(ix, n);
    const Eigen::VectorXd wc = s.segment(iwc, l);
    const Eigen::VectorXd wa = s.segment(iwa, l);
    const Eigen::MatrixXd gamma = Eigen::Map<const Eigen::MatrixXd>(s.data() + ig, l, l);
    BePoint<double> cur = bellman_point<double>(sys, cost, setup.basis, x, x, wc, wa, gains.nu);
    std::vector<BePoint<double>> ex;
    ex.reserve(offsets.size());
    for (const auto& a : offsets)
      ex.push_back(bellman_point<double>(sys, cost, setup.basis, x + a, x, wc, wa, gains.nu));
    if (gains.normalization == Normalization::kGammaWeighted) {
      apply_gamma_weighting(cur, gamma, gains.nu);
      for (auto& p : ex) apply_gamma_weighting(p, gamma, gains.nu);
    }
    const AdpRates r = adp_rates(gains, wc, wa, gamma, cur, ex);

    Eigen::VectorXd dy(s.size());
    dy.segment(ix, n) = sys.drift(x) + sys.effectiveness(x) * cur.u_hat;
    dy.segment(iwc, l) = r.w_critic;
    dy.segment(iwa, l) = r.w_actor;
    dy.segment(ig, l * l) = Eigen::Map<const Eigen::VectorXd>(r.gamma.data(), l * l);
    dy(ic) = running_cost(cost, x, cur.u_hat);
    if (info) {
      info->control = cur.u_hat;
      info->current = std::move(cur);
      info->extrap = std::move(ex);
    }
    return dy;
  };
  auto f = [&](const Eigen::VectorXd& s) { return rhs(s, nullptr); };

  Trajectory traj;
  traj.regulated_dim = n;
  traj.regressor_dt = config.dt;
  const long steps = config.num_steps();
  RngState rng{setup.policy.seed, 0};

  auto record = [&](double t, const StageInfo& info) {
    const Eigen::VectorXd x = y.segment(ix, n);
    const Eigen::VectorXd wc = y.segment(iwc, l);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(info.control);
    traj.w_critic.push_back(wc);
    traj.w_actor.push_back(y.segment(iwa, l));
    record_gamma(traj, Eigen::Map<const Eigen::MatrixXd>(y.data() + ig, l, l));
    traj.accumulated_cost.push_back(y(ic));
    traj.value_error.push_back(std::abs(value_estimate(setup.basis, x, wc) - bench.solution.value(x)));
    traj.optimal_controls.push_back(bench.solution.policy(x));
  };

  Stepper stepper(config.integrator, config.tolerances);
  double t = 0.0;
  try {
    for (long k = 0;; ++k) {
      t = static_cast<double>(k) * config.dt;
      const Eigen::VectorXd x = y.segment(ix, n);
      if (setup.policy.resample_every_step || k == 0) {
        SampledPoints sp = sample_points(setup.policy, x, setup.basis.shrink.value(x), rng);
        rng = sp.rng;
        offsets.clear();
        for (auto& p : sp.points) offsets.push_back(p - x);
      }
      StageInfo info;
      const Eigen::VectorXd k1 = rhs(y, &info);
      if (k % config.record_stride == 0 || k == steps) record(t, info);
      if (k == steps) break;

      const Eigen::VectorXd wc = y.segment(iwc, l);
      const Eigen::VectorXd wa = y.segment(iwa, l);
      track_sup_norms(traj, wc, info.current);
      if (config.record_regressors) log_regressors(traj, info);
      if (config.check_be_identity) {
        const double direct = bellman_error_direct<double>(sys, cost, setup.basis, x, x, wc, wa);
        traj.be_identity_max_error =
            std::max(traj.be_identity_max_error, be_identity_error(info.current.delta, direct));
        for (const auto& p : info.extrap) {
          const double d = bellman_error_direct<double>(sys, cost, setup.basis, p.x_eval, x, wc, wa);
          traj.be_identity_max_error = std::max(traj.be_identity_max_error, be_identity_error(p.delta, d));
        }
      }

      y = stepper.advance(f, y, config.dt, k1);
      Eigen::MatrixXd gamma = Eigen::Map<const Eigen::MatrixXd>(y.data() + ig, l, l);
      if (condition_gamma(gamma)) ++traj.gamma_clip_events;
      y.segment(ig, l * l) = Eigen::Map<const Eigen::VectorXd>(gamma.data(), l * l);
      if (!y.allFinite()) throw NumericRangeError("state became non-finite");
    }
  } catch (const NumericRangeError& e) {
    throw NumericRangeError(at_time(t, e));
  }
  traj.substeps = stepper.substeps();
  return traj;
}

Trajectory run_tracking(const SimConfig& config, const TrackingSetup& setup) {
  config.validate();
  setup.basis.validate();
  const AdpGains& gains = setup.gains;
  const auto& plant = setup.problem.plant;
  const auto& cost = setup.problem.error_cost;
  require(setup.policy.num_points == gains.num_extrap, "run_tracking: policy and gains disagree on N");

  const int n = plant.n;
  const int m = plant.m;
  const int l = setup.basis.num_kernels();
  const int p = setup.model.num_features();
  require(setup.basis.dimension == 2 * n, "run_tracking: basis must act on the concatenated state");
  require(setup.x0.size() == n && setup.x_hat0.size() == n && setup.w_critic0.size() == l &&
              setup.w_actor0.size() == l && setup.gamma0.rows() == l && setup.gamma0.cols() == l,
          "run_tracking: initial condition dimensions");

  // y = [x, xd, x_hat, vec(theta_hat), Wc, Wa, vec(Gamma), cost]
  const int ix = 0, ixd = n, ixh = 2 * n, ith = 3 * n, iwc = 3 * n + p * n, iwa = iwc + l, ig = iwa + l,
            ic = ig + l * l;
  Eigen::VectorXd y(ic + 1);
  y.segment(ix, n) = setup.x0;
  y.segment(ixd, n) = setup.problem.desired_initial;
  y.segment(ixh, n) = setup.x_hat0;
  y.segment(ith, p * n) = Eigen::Map<const Eigen::VectorXd>(setup.model.theta_hat.data(), p * n);
  y.segment(iwc, l) = setup.w_critic0;
  y.segment(iwa, l) = setup.w_actor0;
  y.segment(ig, l * l) = Eigen::Map<const Eigen::VectorXd>(setup.gamma0.data(), l * l);
  y(ic) = 0.0;

  HistoryStack stack;
  stack.capacity = setup.stack_capacity;
  const SavitzkyGolay filter(setup.savgol_order, setup.savgol_window);
  LinearDriftModel model = setup.model;

  // Certainty-equivalence model: the true plant with its drift replaced by
  // the identified one. The drift reads the estimate of the stage being
  // evaluated, so the concatenated system is built once.
  Eigen::MatrixXd theta_stage = setup.model.theta_hat;
  TrackingProblem<double> mp = setup.problem;
  mp.plant.drift = [features = model.features, th = &theta_stage](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return th->transpose() * features(x);
  };
  const ControlAffineSystem<double> zsys = tracking_transform(mp);

  std::vector<Eigen::VectorXd> offsets;
  auto rhs = [&](const Eigen::VectorXd& s, StageInfo* info) {
    const Eigen::VectorXd x = s.segment(ix, n);
    const Eigen::VectorXd xd = s.segment(ixd, n);
    const Eigen::VectorXd x_hat = s.segment(ixh, n);
    const Eigen::MatrixXd theta = Eigen::Map<const Eigen::MatrixXd>(s.data() + ith, p, n);
    const Eigen::VectorXd wc = s.segment(iwc, l);
    const Eigen::VectorXd wa = s.segment(iwa, l);
    const Eigen::MatrixXd gamma = Eigen::Map<const Eigen::MatrixXd>(s.data() + ig, l, l);

    theta_stage = theta;
    Eigen::VectorXd zeta(2 * n);
    zeta << x - xd, xd;

    BePoint<double> cur = bellman_point<double>(zsys, cost, setup.basis, zeta, zeta, wc, wa, gains.nu);
    std::vector<BePoint<double>> ex;
    ex.reserve(offsets.size());
    for (const auto& a : offsets)
      ex.push_back(bellman_point<double>(zsys, cost, setup.basis, zeta + a, zeta, wc, wa, gains.nu));
    if (gains.normalization == Normalization::kGammaWeighted) {
      apply_gamma_weighting(cur, gamma, gains.nu);
      for (auto& p : ex) apply_gamma_weighting(p, gamma, gains.nu);
    }
    const AdpRates r = adp_rates(gains, wc, wa, gamma, cur, ex);

    const Eigen::VectorXd u = cur.u_hat + tracking_feedforward(mp, xd);
    LinearDriftModel m = model;
    m.theta_hat = theta;
    const IdentifierRates id = identifier_rhs(m, stack, plant, x, x_hat, u, setup.id_gains);

    Eigen::VectorXd dy(s.size());
    dy.segment(ix, n) = plant.drift(x) + plant.effectiveness(x) * u;
    dy.segment(ixd, n) = setup.problem.desired_dynamics(xd);
    dy.segment(ixh, n) = id.x_hat_dot;
    dy.segment(ith, p * n) = Eigen::Map<const Eigen::VectorXd>(id.theta_dot.data(), p * n);
    dy.segment(iwc, l) = r.w_critic;
    dy.segment(iwa, l) = r.w_actor;
    dy.segment(ig, l * l) = Eigen::Map<const Eigen::VectorXd>(r.gamma.data(), l * l);
    dy(ic) = running_cost(cost, zeta, cur.u_hat);
    if (info) {
      info->control = u;
      info->current = std::move(cur);
      info->extrap = std::move(ex);
    }
    return dy;
  };
  auto f = [&](const Eigen::VectorXd& s) { return rhs(s, nullptr); };

  Trajectory traj;
  traj.regulated_dim = n;
  traj.regressor_dt = config.dt;
  const long steps = config.num_steps();
  RngState rng{setup.policy.seed, 0};
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> recent;  // (x, u) at step starts
  const int half = setup.savgol_window / 2;

  auto zeta_of = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd z(2 * n);
    z << s.segment(ix, n) - s.segment(ixd, n), s.segment(ixd, n);
    return z;
  };

  Stepper stepper(config.integrator, config.tolerances);
  double t = 0.0;
  try {
    for (long k = 0;; ++k) {
      t = static_cast<double>(k) * config.dt;
      const Eigen::VectorXd zeta = zeta_of(y);
      if (setup.policy.resample_every_step || k == 0) {
        SampledPoints sp = sample_points(setup.policy, zeta, setup.basis.shrink.value(zeta), rng);
        rng = sp.rng;
        offsets.clear();
        for (auto& pt : sp.points) offsets.push_back(pt - zeta);
      }
      StageInfo info;
      const Eigen::VectorXd k1 = rhs(y, &info);
      if (k % config.record_stride == 0 || k == steps) {
        traj.times.push_back(t);
        traj.states.push_back(zeta);
        traj.controls.push_back(info.control);
        traj.w_critic.push_back(y.segment(iwc, l));
        traj.w_actor.push_back(y.segment(iwa, l));
        record_gamma(traj, Eigen::Map<const Eigen::MatrixXd>(y.data() + ig, l, l));
        traj.accumulated_cost.push_back(y(ic));
        traj.value_error.push_back(kNan);
        traj.theta_hat.push_back(Eigen::Map<const Eigen::MatrixXd>(y.data() + ith, p, n));
        traj.stack_min_singular_value.push_back(stack.min_singular_value);
      }
      if (k == steps) break;

      const Eigen::VectorXd wc = y.segment(iwc, l);
      track_sup_norms(traj, wc, info.current);
      if (config.record_regressors) log_regressors(traj, info);

      // Concurrent-learning data: differentiate a centered window of past
      // states and offer the window center to the stack.
      recent.emplace_back(y.segment(ix, n), info.control);
      if (static_cast<int>(recent.size()) > setup.savgol_window) recent.pop_front();
      if (static_cast<int>(recent.size()) == setup.savgol_window && k % setup.offer_every == 0) {
        Eigen::MatrixXd window(setup.savgol_window, n);
        Eigen::MatrixXd controls(setup.savgol_window, m);
        for (int j = 0; j < setup.savgol_window; ++j) {
          window.row(j) = recent[j].first.transpose();
          controls.row(j) = recent[j].second.transpose();
        }
        const Eigen::VectorXd xdot = filter.derivative(window, config.dt);
        model.theta_hat = Eigen::Map<const Eigen::MatrixXd>(y.data() + ith, p, n);
        const Eigen::VectorXd u_entry = setup.smooth_control ? filter.smooth(controls) : recent[half].second;
        stack_insert(stack, make_stack_entry(model, plant, recent[half].first, u_entry, xdot));
      }

      y = stepper.advance(f, y, config.dt, k1);
      Eigen::MatrixXd gamma = Eigen::Map<const Eigen::MatrixXd>(y.data() + ig, l, l);
      if (condition_gamma(gamma)) ++traj.gamma_clip_events;
      y.segment(ig, l * l) = Eigen::Map<const Eigen::VectorXd>(gamma.data(), l * l);
      if (!y.allFinite()) throw NumericRangeError("state became non-finite");
    }
  } catch (const NumericRangeError& e) {
    throw NumericRangeError(at_time(t, e));
  }
  traj.substeps = stepper.substeps();
  return traj;
}

Metrics metrics(const Trajectory& trajectory, double steady_window) {
  Metrics m;
  if (trajectory.size() == 0) return m;
  const double t_end = trajectory.times.back();
  require(steady_window >= 0 && steady_window <= t_end + 1e-12, "metrics: steady window exceeds duration");
  m.total_cost = trajectory.accumulated_cost.back();
  double sum = 0.0;
  std::size_t count = 0;
  const double t_start = t_end - steady_window - 1e-9;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (trajectory.times[i] < t_start) continue;
    sum += trajectory.states[i].head(trajectory.regulated_dim).squaredNorm();
    ++count;
  }
  m.steady_state_rms = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
  return m;
}

}  // namespace staf
