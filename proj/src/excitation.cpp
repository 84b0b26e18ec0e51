#include "staf/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "staf/types.hpp"

namespace staf {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ (counter * 0xD1B54A32D192ED03ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

SampledPoints sample_points(const ExtrapolationPolicy& policy, const Eigen::VectorXd& x, double shrink_value,
                            RngState rng) {
  require(policy.num_points > 0, "sample_points: num_points must be positive");
  const Eigen::Index n = x.size();
  const double w = 0.5 * policy.half_width_factor * (policy.scale_by_shrink ? shrink_value : 1.0);
  SampledPoints out;
  out.points.reserve(policy.num_points);

  if (policy.kind == ExtrapolationKind::kFixedGrid) {
    int per_axis = static_cast<int>(std::lround(std::pow(policy.num_points, 1.0 / static_cast<double>(n))));
    long total = 1;
    for (Eigen::Index d = 0; d < n; ++d) total *= per_axis;
    require(total == policy.num_points, "sample_points: fixed grid needs num_points = k^n");
    for (int idx = 0; idx < policy.num_points; ++idx) {
      Eigen::VectorXd p = x;
      int rem = idx;
      for (Eigen::Index d = 0; d < n; ++d) {
        const int j = rem % per_axis;
        rem /= per_axis;
        if (per_axis > 1) p(d) += -w + 2.0 * w * j / (per_axis - 1);
      }
      out.points.push_back(std::move(p));
    }
    out.rng = rng;
    return out;
  }

  for (int i = 0; i < policy.num_points; ++i) {
    Eigen::VectorXd p = x;
    for (Eigen::Index d = 0; d < n; ++d) {
      const double u = counter_uniform(rng.seed, rng.counter++);
      p(d) += std::clamp(-w + 2.0 * w * u, -w, w);
    }
    out.points.push_back(std::move(p));
  }
  out.rng = rng;
  return out;
}

PeEstimate pe_windows(const RegressorLog& log, double window_t, double dt) {
  require(window_t > 0 && dt > 0, "pe_windows: window and step must be positive");
  const auto window = static_cast<std::size_t>(std::llround(window_t / dt));
  const std::size_t k = log.current.size();
  require(window >= 1 && window <= k, "pe_windows: window longer than the recorded trajectory");
  require(log.extrapolated.empty() || log.extrapolated.size() == k,
          "pe_windows: extrapolated log length mismatch");

  PeEstimate pe;
  pe.window_t = window_t;
  const Eigen::Index l = log.current.front().size();

  // Prefix sums of the per-sample outer products.
  std::vector<Eigen::MatrixXd> cur(k + 1, Eigen::MatrixXd::Zero(l, l));
  std::vector<Eigen::MatrixXd> ext(k + 1, Eigen::MatrixXd::Zero(l, l));
  double c2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::VectorXd& w = log.current[j];
    cur[j + 1] = cur[j] + w * w.transpose();
    if (!log.extrapolated.empty()) {
      const Eigen::MatrixXd& wi = log.extrapolated[j];
      const Eigen::MatrixXd mean = wi * wi.transpose() / static_cast<double>(wi.cols());
      ext[j + 1] = ext[j] + mean;
      c2 = std::min(c2, min_eig(mean));
    }
  }

  double c1 = std::numeric_limits<double>::infinity();
  double c3 = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s + window <= k; ++s) {
    c1 = std::min(c1, min_eig((cur[s + window] - cur[s]) * dt));
    if (!log.extrapolated.empty()) c3 = std::min(c3, min_eig((ext[s + window] - ext[s]) * dt));
  }
  // Rounding can push a singular Gram matrix slightly negative.
  pe.c1_hat = std::max(0.0, c1);
  pe.c2_hat = log.extrapolated.empty() ? 0.0 : std::max(0.0, c2);
  pe.c3_hat = log.extrapolated.empty() ? 0.0 : std::max(0.0, c3);
  return pe;
}

SufficientConditionReport sufficient_condition_report(const AdpGains& gains, const SufficientConditionInputs& in) {
  SufficientConditionReport r;
  const double sqrt_nu = std::sqrt(gains.nu);
  const double eta_c = gains.eta_c1 + gains.eta_c2;
  const double eta_a = gains.eta_a1 + gains.eta_a2;
  const double gw_term = in.g_w_sigma == 0.0 ? 0.0 : in.g_w_sigma / (2.0 * in.gamma_lower);
  const double inner = gw_term + eta_c * in.w_t_g_sigma / (4.0 * sqrt_nu) + gains.eta_a1;

  r.critic_lhs = gains.eta_c2 * in.c_lower / 3.0;
  r.critic_rhs = inner * inner / eta_a;
  r.critic_satisfied = r.critic_lhs >= r.critic_rhs;

  r.actor_lhs = eta_a / 4.0;
  r.actor_rhs = in.g_w_sigma / 2.0 + eta_c * in.w_norm * in.g_sigma / (4.0 * sqrt_nu);
  r.actor_satisfied = r.actor_lhs >= r.actor_rhs;
  return r;
}

}  // namespace staf
