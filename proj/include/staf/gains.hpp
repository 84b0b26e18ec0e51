#pragma once

#include <string>
#include <vector>

namespace staf {

/// Regressor normalization. kSqrt: rho = sqrt(1 + nu w'w). kGammaWeighted:
/// rho = 1 + nu w' Gamma w, which scales the critic step with Gamma.
enum class Normalization { kSqrt, kGammaWeighted };

/// Learning gains for the critic, actor and least-squares gain matrix.
struct AdpGains {
  double eta_c1 = 0.001;
  double eta_c2 = 0.25;
  double eta_a1 = 1.2;
  double eta_a2 = 0.01;
  double beta = 0.003;
  double nu = 0.05;
  int num_extrap = 1;
  Normalization normalization = Normalization::kSqrt;

  /// Names of the fields that violate positivity; empty when valid. eta_c2 may
  /// be zero, which switches off extrapolation.
  std::vector<std::string> violations() const {
    std::vector<std::string> bad;
    if (!(eta_c1 > 0)) bad.emplace_back("eta_c1");
    if (!(eta_c2 >= 0)) bad.emplace_back("eta_c2");
    if (!(eta_a1 > 0)) bad.emplace_back("eta_a1");
    if (!(eta_a2 > 0)) bad.emplace_back("eta_a2");
    if (!(beta > 0)) bad.emplace_back("beta");
    if (!(nu > 0)) bad.emplace_back("nu");
    if (num_extrap <= 0) bad.emplace_back("num_extrap");
    return bad;
  }
};

inline AdpGains regulation_gains() { return {}; }

inline AdpGains tracking_gains() {
  AdpGains g;
  g.eta_c1 = 0.001;
  g.eta_c2 = 2.0;
  g.eta_a1 = 2.0;
  g.eta_a2 = 0.001;
  g.beta = 0.01;
  g.nu = 0.1;
  g.num_extrap = 1;
  return g;
}

}  // namespace staf
