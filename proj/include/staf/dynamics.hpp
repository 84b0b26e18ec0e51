#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "staf/types.hpp"

namespace staf {

/// x' = f(x) + g(x) u.
template <typename Scalar>
struct ControlAffineSystem {
  int n = 0;
  int m = 0;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> drift;
  std::function<MatrixX<Scalar>(const VectorX<Scalar>&)> effectiveness;
};

/// r(x, u) = Q(x) + u'Ru. R is validated (symmetric, positive definite) and
/// inverted once at construction.
template <typename Scalar>
class CostSpec {
 public:
  using StateCost = std::function<Scalar(const VectorX<Scalar>&)>;

  CostSpec() = default;
  CostSpec(StateCost state_cost, MatrixX<Scalar> control_weight)
      : state_cost_(std::move(state_cost)), control_weight_(std::move(control_weight)) {
    using std::abs;
    if (control_weight_.rows() == 0 || control_weight_.rows() != control_weight_.cols())
      throw ConfigError("control weight R must be square and nonempty");
    const Scalar asym = (control_weight_ - control_weight_.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-12)) throw ConfigError("control weight R must be symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(control_weight_);
    if (eig.eigenvalues().minCoeff() <= Scalar(0))
      throw ConfigError("control weight R must be positive definite");
    control_weight_inv_ = control_weight_.inverse();
  }

  Scalar state_cost(const VectorX<Scalar>& x) const { return state_cost_(x); }
  const MatrixX<Scalar>& control_weight() const { return control_weight_; }
  const MatrixX<Scalar>& control_weight_inv() const { return control_weight_inv_; }

 private:
  StateCost state_cost_;
  MatrixX<Scalar> control_weight_;
  MatrixX<Scalar> control_weight_inv_;
};

template <typename Scalar>
struct AnalyticSolution {
  std::function<Scalar(const VectorX<Scalar>&)> value;
  std::function<RowVectorX<Scalar>(const VectorX<Scalar>&)> value_gradient;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> policy;
};

template <typename Scalar>
struct RegulationBenchmark {
  ControlAffineSystem<Scalar> system;
  CostSpec<Scalar> cost;
  AnalyticSolution<Scalar> solution;
};

/// Two-state nonlinear plant
///   f(x) = [-x1 + x2; -x1/2 - x2 (1 - (cos(2 x1) + 2)^2) / 2],  g(x) = [0; cos(2 x1) + 2]
/// with cost x'x + u^2 and closed-form optimal value V*(x) = x1^2/2 + x2^2.
template <typename Scalar>
RegulationBenchmark<Scalar> regulation_benchmark() {
  using std::cos;
  RegulationBenchmark<Scalar> b;
  b.system.n = 2;
  b.system.m = 1;
  b.system.drift = [](const VectorX<Scalar>& x) {
    const Scalar c = cos(Scalar(2) * x(0)) + Scalar(2);
    VectorX<Scalar> f(2);
    f << -x(0) + x(1), Scalar(-0.5) * x(0) - Scalar(0.5) * x(1) * (Scalar(1) - c * c);
    return f;
  };
  b.system.effectiveness = [](const VectorX<Scalar>& x) {
    MatrixX<Scalar> g(2, 1);
    g << Scalar(0), cos(Scalar(2) * x(0)) + Scalar(2);
    return g;
  };
  MatrixX<Scalar> r(1, 1);
  r << Scalar(1);
  b.cost = CostSpec<Scalar>([](const VectorX<Scalar>& x) { return x.squaredNorm(); }, r);
  b.solution.value = [](const VectorX<Scalar>& x) {
    return Scalar(0.5) * x(0) * x(0) + x(1) * x(1);
  };
  b.solution.value_gradient = [](const VectorX<Scalar>& x) {
    RowVectorX<Scalar> g(2);
    g << x(0), Scalar(2) * x(1);
    return g;
  };
  b.solution.policy = [](const VectorX<Scalar>& x) {
    VectorX<Scalar> u(1);
    u << -(cos(Scalar(2) * x(0)) + Scalar(2)) * x(1);
    return u;
  };
  return b;
}

/// Closed-loop HJB residual
///   -1/4 dV g R^-1 g' dV' + dV f + Q
/// of a candidate value gradient at x.
template <typename Scalar, typename GradFn>
Scalar hjb_residual(const ControlAffineSystem<Scalar>& system, const CostSpec<Scalar>& cost,
                    const GradFn& value_gradient, const VectorX<Scalar>& x) {
  require(x.size() == system.n, "hjb_residual: state dimension mismatch");
  const RowVectorX<Scalar> dv = value_gradient(x);
  require(dv.size() == system.n, "hjb_residual: gradient must be 1 x n");
  const MatrixX<Scalar> g = system.effectiveness(x);
  const RowVectorX<Scalar> dvg = dv * g;
  const Scalar quad = (dvg * cost.control_weight_inv() * dvg.transpose())(0, 0);
  return Scalar(-0.25) * quad + dv.dot(system.drift(x)) + cost.state_cost(x);
}

/// u = -1/2 R^-1 g(x)' dV'.
template <typename Scalar>
VectorX<Scalar> optimal_policy_from_gradient(const ControlAffineSystem<Scalar>& system,
                                             const CostSpec<Scalar>& cost,
                                             const RowVectorX<Scalar>& value_gradient,
                                             const VectorX<Scalar>& x) {
  require(value_gradient.size() == system.n, "optimal_policy_from_gradient: gradient must be 1 x n");
  const MatrixX<Scalar> g = system.effectiveness(x);
  return Scalar(-0.5) * cost.control_weight_inv() * g.transpose() * value_gradient.transpose();
}

template <typename Scalar>
Scalar running_cost(const CostSpec<Scalar>& cost, const VectorX<Scalar>& x, const VectorX<Scalar>& u) {
  require(u.size() == cost.control_weight().rows(), "running_cost: control dimension mismatch");
  return cost.state_cost(x) + u.dot(cost.control_weight() * u);
}

/// Moore-Penrose pseudoinverse; singular values below 1e-10 * largest are
/// dropped. Throws NumericRangeError when `full_column_rank` is requested
/// and rank is lost.
template <typename Scalar>
MatrixX<Scalar> pseudoinverse(const MatrixX<Scalar>& a, bool full_column_rank = false) {
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod;
  cod.setThreshold(Scalar(1e-10));
  cod.compute(a);
  if (full_column_rank && cod.rank() < a.cols())
    throw NumericRangeError("pseudoinverse: matrix is rank deficient");
  return cod.pseudoInverse();
}

/// Plant, desired (exosystem) dynamics xd' = hd(xd), and a cost on the
/// tracking error e = x - xd and the residual control mu.
template <typename Scalar>
struct TrackingProblem {
  ControlAffineSystem<Scalar> plant;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> desired_dynamics;
  VectorX<Scalar> desired_initial;
  CostSpec<Scalar> error_cost;  // acts on the concatenated state zeta = [e; xd]
};

/// Steady-state feedforward g+(xd) (hd(xd) - f(xd)); u = mu + feedforward.
template <typename Scalar>
VectorX<Scalar> tracking_feedforward(const TrackingProblem<Scalar>& problem, const VectorX<Scalar>& xd) {
  const MatrixX<Scalar> gplus = pseudoinverse<Scalar>(problem.plant.effectiveness(xd), true);
  return gplus * (problem.desired_dynamics(xd) - problem.plant.drift(xd));
}

/// Concatenated-state system zeta' = F(zeta) + G(zeta) mu with zeta = [e; xd]:
///   F = [f(e+xd) - hd(xd) + g(e+xd) g+(xd) (hd(xd) - f(xd)); hd(xd)]
///   G = [g(e+xd); 0].
template <typename Scalar>
ControlAffineSystem<Scalar> tracking_transform(const TrackingProblem<Scalar>& problem) {
  const int n = problem.plant.n;
  ControlAffineSystem<Scalar> out;
  out.n = 2 * n;
  out.m = problem.plant.m;
  out.drift = [problem, n](const VectorX<Scalar>& zeta) {
    require(zeta.size() == 2 * n, "tracking drift: zeta dimension mismatch");
    const VectorX<Scalar> e = zeta.head(n);
    const VectorX<Scalar> xd = zeta.tail(n);
    const VectorX<Scalar> x = e + xd;
    const VectorX<Scalar> hd = problem.desired_dynamics(xd);
    VectorX<Scalar> f(2 * n);
    f.head(n) = problem.plant.drift(x) - hd +
                problem.plant.effectiveness(x) * tracking_feedforward(problem, xd);
    f.tail(n) = hd;
    return f;
  };
  out.effectiveness = [problem, n](const VectorX<Scalar>& zeta) {
    require(zeta.size() == 2 * n, "tracking effectiveness: zeta dimension mismatch");
    MatrixX<Scalar> g = MatrixX<Scalar>::Zero(2 * n, problem.plant.m);
    g.topRows(n) = problem.plant.effectiveness(zeta.head(n) + zeta.tail(n));
    return g;
  };
  return out;
}

/// Desired-trajectory tracking: xd' = [-1 1; -2 1] xd, xd(0) = [0; 1], cost
/// e' diag(10, 10) e + mu^2. The plant drift is the linearly parameterized
/// theta' [x1; x2; x2 (cos(2 x1) + 2)] with theta' = [-1 1 0; -0.5 0 -0.5],
/// which differs from the regulation drift in its last term (linear rather
/// than quadratic in cos(2 x1) + 2).
template <typename Scalar>
TrackingProblem<Scalar> tracking_benchmark() {
  using std::cos;
  TrackingProblem<Scalar> p;
  p.plant = regulation_benchmark<Scalar>().system;
  p.plant.drift = [](const VectorX<Scalar>& x) {
    VectorX<Scalar> f(2);
    f << -x(0) + x(1), Scalar(-0.5) * x(0) - Scalar(0.5) * x(1) * (cos(Scalar(2) * x(0)) + Scalar(2));
    return f;
  };
  p.desired_dynamics = [](const VectorX<Scalar>& xd) {
    MatrixX<Scalar> a(2, 2);
    a << Scalar(-1), Scalar(1), Scalar(-2), Scalar(1);
    return VectorX<Scalar>(a * xd);
  };
  p.desired_initial = VectorX<Scalar>(2);
  p.desired_initial << Scalar(0), Scalar(1);
  MatrixX<Scalar> r(1, 1);
  r << Scalar(1);
  p.error_cost = CostSpec<Scalar>(
      [](const VectorX<Scalar>& zeta) { return Scalar(10) * zeta.head(2).squaredNorm(); }, r);
  return p;
}

}  // namespace staf
