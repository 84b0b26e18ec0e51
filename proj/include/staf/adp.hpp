#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "staf/dynamics.hpp"
#include "staf/excitation.hpp"
#include "staf/gains.hpp"
#include "staf/kernel.hpp"

namespace staf {

template <typename Scalar>
struct AdpState {
  VectorX<Scalar> w_critic;
  VectorX<Scalar> w_actor;
  MatrixX<Scalar> gamma;
};

/// Bellman error and regressors at one evaluation point.
template <typename Scalar>
struct BePoint {
  VectorX<Scalar> x_eval;
  VectorX<Scalar> u_hat;
  VectorX<Scalar> omega;
  Scalar rho = Scalar(1);
  Scalar delta = Scalar(0);
  MatrixX<Scalar> g_sigma;
};

/// Bellman error at `x_eval` with kernel centers anchored at `centers_state`
/// (the current plant state; for extrapolated points x_eval differs from it).
template <typename Scalar>
BePoint<Scalar> bellman_point(const ControlAffineSystem<Scalar>& system, const CostSpec<Scalar>& cost,
                              const StaFBasis<Scalar>& basis, const VectorX<Scalar>& x_eval,
                              const VectorX<Scalar>& centers_state, const VectorX<Scalar>& w_critic,
                              const VectorX<Scalar>& w_actor, Scalar nu) {
  const int l = basis.num_kernels();
  require(x_eval.size() == system.n && centers_state.size() == system.n,
          "bellman_point: state dimension mismatch");
  require(w_critic.size() == l && w_actor.size() == l, "bellman_point: weight dimension mismatch");

  const MatrixX<Scalar> grad = grad_sigma_at<Scalar>(x_eval, centers(basis, centers_state));
  const MatrixX<Scalar> g = system.effectiveness(x_eval);
  const MatrixX<Scalar> grad_g = grad * g;  // L x m

  BePoint<Scalar> p;
  p.x_eval = x_eval;
  p.g_sigma = grad_g * cost.control_weight_inv() * grad_g.transpose();
  p.u_hat = Scalar(-0.5) * cost.control_weight_inv() * grad_g.transpose() * w_actor;
  p.omega = grad * system.drift(x_eval) - Scalar(0.5) * p.g_sigma * w_actor;
  p.rho = std::sqrt(Scalar(1) + nu * p.omega.squaredNorm());
  p.delta = w_critic.dot(p.omega) + running_cost(cost, x_eval, p.u_hat);
  return p;
}

/// Bellman error from its definition r(x, u) + dV(x) (f(x) + g(x) u), used as
/// an independent cross-check of the regressor form.
template <typename Scalar>
Scalar bellman_error_direct(const ControlAffineSystem<Scalar>& system, const CostSpec<Scalar>& cost,
                            const StaFBasis<Scalar>& basis, const VectorX<Scalar>& x_eval,
                            const VectorX<Scalar>& centers_state, const VectorX<Scalar>& w_critic,
                            const VectorX<Scalar>& w_actor) {
  const MatrixX<Scalar> grad = grad_sigma_at<Scalar>(x_eval, centers(basis, centers_state));
  const MatrixX<Scalar> g = system.effectiveness(x_eval);
  const VectorX<Scalar> u =
      Scalar(-0.5) * cost.control_weight_inv() * g.transpose() * grad.transpose() * w_actor;
  const RowVectorX<Scalar> dv = w_critic.transpose() * grad;
  return running_cost(cost, x_eval, u) + dv.dot(system.drift(x_eval) + g * u);
}

/// Replaces rho by 1 + nu w' Gamma w (Normalization::kGammaWeighted).
template <typename Scalar>
void apply_gamma_weighting(BePoint<Scalar>& p, const MatrixX<Scalar>& gamma, Scalar nu) {
  p.rho = Scalar(1) + nu * p.omega.dot(gamma * p.omega);
}

/// Critic weight derivative. Regressors are normalized by rho (first power).
template <typename Scalar>
VectorX<Scalar> critic_rhs(const AdpGains& gains, const MatrixX<Scalar>& gamma, const BePoint<Scalar>& current,
                           std::span<const BePoint<Scalar>> extrap) {
  require(static_cast<int>(extrap.size()) == gains.num_extrap, "critic_rhs: expected N extrapolation points");
  VectorX<Scalar> acc = Scalar(gains.eta_c1) * (current.omega / current.rho) * current.delta;
  VectorX<Scalar> sum = VectorX<Scalar>::Zero(current.omega.size());
  for (const auto& p : extrap) sum += (p.omega / p.rho) * p.delta;
  acc += Scalar(gains.eta_c2 / gains.num_extrap) * sum;
  return -(gamma * acc);
}

/// Least-squares gain derivative. Outer products are normalized by rho^2.
template <typename Scalar>
MatrixX<Scalar> gamma_rhs(const AdpGains& gains, const MatrixX<Scalar>& gamma, const BePoint<Scalar>& current,
                          std::span<const BePoint<Scalar>> extrap) {
  require(static_cast<int>(extrap.size()) == gains.num_extrap, "gamma_rhs: expected N extrapolation points");
  const Eigen::Index l = gamma.rows();
  MatrixX<Scalar> info = Scalar(gains.eta_c1) * current.omega * current.omega.transpose() /
                         (current.rho * current.rho);
  MatrixX<Scalar> sum = MatrixX<Scalar>::Zero(l, l);
  for (const auto& p : extrap) sum += p.omega * p.omega.transpose() / (p.rho * p.rho);
  info += Scalar(gains.eta_c2 / gains.num_extrap) * sum;
  return Scalar(gains.beta) * gamma - gamma * info * gamma;
}

/// Actor weight derivative:
///   -eta_a1 (Wa - Wc) - eta_a2 Wa + eta_c1/(4 rho) (Gs' Wa)(w'Wc)
///   + sum_i eta_c2/(4 N rho_i) (Gs_i' Wa)(w_i'Wc).
template <typename Scalar>
VectorX<Scalar> actor_rhs(const AdpGains& gains, const VectorX<Scalar>& w_actor, const VectorX<Scalar>& w_critic,
                          const BePoint<Scalar>& current, std::span<const BePoint<Scalar>> extrap) {
  require(static_cast<int>(extrap.size()) == gains.num_extrap, "actor_rhs: expected N extrapolation points");
  VectorX<Scalar> out = -Scalar(gains.eta_a1) * (w_actor - w_critic) - Scalar(gains.eta_a2) * w_actor;
  out += (Scalar(gains.eta_c1) / (Scalar(4) * current.rho)) * (current.g_sigma.transpose() * w_actor) *
         current.omega.dot(w_critic);
  const Scalar n = Scalar(gains.num_extrap);
  for (const auto& p : extrap)
    out += (Scalar(gains.eta_c2) / (Scalar(4) * n * p.rho)) * (p.g_sigma.transpose() * w_actor) *
           p.omega.dot(w_critic);
  return out;
}

/// Feedback policy u = -1/2 R^-1 g(x)' grad_sigma(x, c(x))' Wa.
template <typename Scalar>
VectorX<Scalar> policy(const StaFBasis<Scalar>& basis, const ControlAffineSystem<Scalar>& system,
                       const CostSpec<Scalar>& cost, const VectorX<Scalar>& x, const VectorX<Scalar>& w_actor) {
  require(w_actor.size() == basis.num_kernels(), "policy: weight dimension mismatch");
  const MatrixX<Scalar> grad = grad_sigma(basis, x);
  return Scalar(-0.5) * cost.control_weight_inv() * system.effectiveness(x).transpose() * grad.transpose() *
         w_actor;
}

template <typename Scalar>
Scalar value_estimate(const StaFBasis<Scalar>& basis, const VectorX<Scalar>& x, const VectorX<Scalar>& w_critic) {
  require(w_critic.size() == basis.num_kernels(), "value_estimate: weight dimension mismatch");
  return w_critic.dot(sigma(basis, x));
}

/// Symmetrize Gamma and clip eigenvalues below `min_eig`. Returns true when
/// clipping occurred.
template <typename Scalar>
bool condition_gamma(MatrixX<Scalar>& gamma, Scalar min_eig = Scalar(1e-12)) {
  gamma = Scalar(0.5) * (gamma + gamma.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(gamma);
  if (eig.eigenvalues().minCoeff() >= min_eig) return false;
  const VectorX<Scalar> clipped = eig.eigenvalues().cwiseMax(min_eig);
  gamma = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  gamma = Scalar(0.5) * (gamma + gamma.transpose()).eval();
  return true;
}

/// Eigenvalue bounds on Gamma implied by the excitation constants.
struct GammaBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool upper_valid = false;       // false when the excitation constants give no bound
  double short_horizon_upper = 0;  // 1 / (lambda_min(Gamma0^-1) e^{-beta T}), valid for t < T
};

/// Gamma_lower = 1 / (lambda_max(Gamma0^-1) + (eta_c1 + eta_c2) / (beta nu))
/// Gamma_upper = 1 / (min{eta_c1 c1 + eta_c2 max{c2 T, c3}, lambda_min(Gamma0^-1)} e^{-beta T})
inline GammaBounds gamma_bounds(const AdpGains& gains, double gamma0_min_eig, double gamma0_max_eig,
                                const PeEstimate& pe, double window_t) {
  require(gamma0_min_eig > 0 && gamma0_max_eig >= gamma0_min_eig, "gamma_bounds: Gamma0 must be positive definite");
  const double inv_min = 1.0 / gamma0_max_eig;  // lambda_min(Gamma0^-1)
  const double inv_max = 1.0 / gamma0_min_eig;  // lambda_max(Gamma0^-1)
  GammaBounds b;
  b.lower = 1.0 / (inv_max + (gains.eta_c1 + gains.eta_c2) / (gains.beta * gains.nu));
  const double decay = std::exp(-gains.beta * window_t);
  b.short_horizon_upper = 1.0 / (inv_min * decay);
  const double excitation =
      gains.eta_c1 * pe.c1_hat + gains.eta_c2 * std::max(pe.c2_hat * window_t, pe.c3_hat);
  const double denom = std::min(excitation, inv_min) * decay;
  if (denom > 0.0) {
    b.upper = 1.0 / denom;
    b.upper_valid = true;
  }
  return b;
}

/// c_lower = beta / (2 Gamma_upper eta_c2) + c2 / 2; undefined (NaN) without
/// extrapolation.
inline double excitation_margin(const AdpGains& gains, double gamma_upper, double c2_hat) {
  if (!(gains.eta_c2 > 0)) return std::numeric_limits<double>::quiet_NaN();
  return gains.beta / (2.0 * gamma_upper * gains.eta_c2) + 0.5 * c2_hat;
}

}  // namespace staf
