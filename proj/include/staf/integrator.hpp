#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "staf/types.hpp"

namespace staf {

/// kRk45 advances each sample interval with an embedded Dormand-Prince 5(4)
/// pair under error control; kRk4 and kEuler take exactly one step per
/// interval.
enum class Integrator { kRk45, kRk4, kEuler };

struct AdaptiveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double min_step = 1e-12;
  long max_substeps = 5'000'000;
};

namespace detail {

template <typename Rhs>
Eigen::VectorXd rk4_step(const Rhs& f, const Eigen::VectorXd& y, double h, const Eigen::VectorXd& k1) {
  const Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Integrates y' = f(y) across one sample interval. The step size carries
/// over between intervals through `h_hint`.
class Stepper {
 public:
  explicit Stepper(Integrator method, AdaptiveOptions options = {}) : method_(method), options_(options) {}

  Integrator method() const { return method_; }
  long substeps() const { return substeps_; }
  long rejected() const { return rejected_; }

  /// `k1` is f(y), already evaluated by the caller.
  template <typename Rhs>
  Eigen::VectorXd advance(const Rhs& f, const Eigen::VectorXd& y, double interval, const Eigen::VectorXd& k1) {
    if (method_ == Integrator::kEuler) {
      ++substeps_;
      return y + interval * k1;
    }
    if (method_ == Integrator::kRk4) {
      ++substeps_;
      return detail::rk4_step(f, y, interval, k1);
    }
    return dormand_prince(f, y, interval, k1);
  }

 private:
  template <typename Rhs>
  Eigen::VectorXd dormand_prince(const Rhs& f, Eigen::VectorXd y, double interval, Eigen::VectorXd k1) {
    // Dormand-Prince 5(4) tableau.
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    double remaining = interval;
    double h = h_hint_ > 0 ? std::min(h_hint_, interval) : interval;
    bool first = true;
    while (remaining > 0) {
      if (!first) k1 = f(y);
      first = false;
      bool last = false;
      if (h >= remaining * (1.0 - 1e-12)) {
        h = remaining;
        last = true;
      }
      for (;;) {
        if (++substeps_ > options_.max_substeps) throw NumericRangeError("integrator: substep budget exhausted");
        Eigen::VectorXd y_new;
        double err = 0.0;
        bool ok = true;
        try {
          const Eigen::VectorXd k2 = f(y + h * a21 * k1);
          const Eigen::VectorXd k3 = f(y + h * (a31 * k1 + a32 * k2));
          const Eigen::VectorXd k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
          const Eigen::VectorXd k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
          const Eigen::VectorXd k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
          y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
          const Eigen::VectorXd k7 = f(y_new);
          const Eigen::VectorXd e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
          const Eigen::ArrayXd scale =
              options_.atol + options_.rtol * y.cwiseAbs().array().max(y_new.cwiseAbs().array());
          err = std::sqrt((e.array() / scale).square().mean());
          ok = y_new.allFinite() && std::isfinite(err);
        } catch (const NumericRangeError&) {
          // A trial stage left the kernel range; shrink and retry.
          ok = false;
        }
        if (ok && err <= 1.0) {
          y = std::move(y_new);
          remaining = last ? 0.0 : remaining - h;
          const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
          h_hint_ = h * grow;
          h = h_hint_;
          break;
        }
        ++rejected_;
        h *= ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9) : 0.25;
        last = false;
        if (h < options_.min_step) throw NumericRangeError("integrator: step size underflow");
      }
    }
    return y;
  }

  Integrator method_;
  AdaptiveOptions options_;
  double h_hint_ = 0.0;
  long substeps_ = 0;
  long rejected_ = 0;
};

}  // namespace staf
