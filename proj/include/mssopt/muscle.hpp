// Copyright 2026 The mssopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MSSOPT_MUSCLE_HPP_
#define MSSOPT_MUSCLE_HPP_

#include <algorithm>
#include <cmath>
#include <string>

#include "mssopt/errors.hpp"

namespace mssopt {

// Below this activation the contraction-rate factor is treated as undefined.
// The floor only keeps the force-balance inversion away from the a = 0
// singularity; it sits well under the ~1e-3 activations that minimal force
// reserves induce in the receding-horizon scenarios.
inline constexpr double kActivationFloor = 1e-4;

// Hill-type muscle-tendon parameters. The defaults are representative values
// for a human arm actuator; scenario configs override them per muscle.
struct MuscleParams {
  double k_s = 2.5e6;      // tendon quadratic stiffness [N/m^2]
  double l_s_slack = 0.15;  // tendon slack length [m]
  double k_p = 4.0e4;      // parallel-element quadratic stiffness [N/m^2]
  double l_p_slack = 0.156;  // parallel-element slack length [m]
  double f_max = 900.0;    // peak isometric force [N]
  double l_c_opt = 0.12;   // optimal contractile-element length [m]
  double width = 0.6;      // force-length width as a fraction of l_c_opt
  double v_max = 1.2;      // maximum shortening rate [m/s]
  double kappa = 0.25;     // force-velocity curvature
  double z_max = 1.5;      // lengthening force plateau
  double t_min = 0.03;     // fastest activation time constant [s]
  double t_max = 0.05;     // slowest activation time constant [s]

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string("MuscleParams: ") + name +
                          " must be positive");
      }
    };
    positive(k_s, "k_s");
    positive(l_s_slack, "l_s_slack");
    positive(k_p, "k_p");
    positive(l_p_slack, "l_p_slack");
    positive(f_max, "f_max");
    positive(l_c_opt, "l_c_opt");
    positive(width, "width");
    positive(v_max, "v_max");
    positive(kappa, "kappa");
    positive(t_min, "t_min");
    if (!(z_max > 1.0)) {
      throw DomainError("MuscleParams: z_max must exceed 1");
    }
    if (!(t_max > t_min)) {
      throw DomainError("MuscleParams: t_max must exceed t_min");
    }
  }
};

// Tendon force: quadratic beyond the slack length, zero when slack.
inline double tendon_force(const MuscleParams& p, double l_s) {
  const double stretch = l_s - p.l_s_slack;
  return stretch > 0.0 ? p.k_s * stretch * stretch : 0.0;
}

// d(tendon_force)/d(l_s); zero on the slack branch.
inline double tendon_force_slope(const MuscleParams& p, double l_s) {
  const double stretch = l_s - p.l_s_slack;
  return stretch > 0.0 ? 2.0 * p.k_s * stretch : 0.0;
}

// Tendon length producing the given positive force.
inline double tendon_force_inv(const MuscleParams& p, double force) {
  if (!(force > 0.0)) {
    throw NonPositiveForce("tendon_force_inv: force " +
                           std::to_string(force) + " is not positive");
  }
  return p.l_s_slack + std::sqrt(force / p.k_s);
}

// Parallel elastic force on the contractile element.
inline double passive_force(const MuscleParams& p, double l_c) {
  const double stretch = l_c - p.l_p_slack;
  return stretch > 0.0 ? p.k_p * stretch * stretch : 0.0;
}

// Gaussian force-length factor, peaking at l_c_opt.
inline double force_length(const MuscleParams& p, double l_c) {
  if (!(l_c > 0.0)) {
    throw DomainError("force_length: contractile length " +
                      std::to_string(l_c) + " is not positive");
  }
  const double r = (l_c - p.l_c_opt) / (p.width * p.l_c_opt);
  return std::exp(-r * r);
}

// Lengthening-side scale of the force-velocity curve; chosen so that both
// branches meet with matching value and slope at u = 0.
inline double eccentric_scale(const MuscleParams& p) {
  return p.v_max * (p.z_max - 1.0) * p.kappa / (p.kappa + 1.0);
}

// Force-velocity factor as a function of the shortening rate u = -dl_c/dt.
// Strictly decreasing from z_max (fast lengthening) through 1 at u = 0
// toward 0 as u approaches v_max.
inline double force_velocity(const MuscleParams& p, double u) {
  if (!(u < p.v_max)) {
    throw DomainError("force_velocity: shortening rate " + std::to_string(u) +
                      " reaches v_max " + std::to_string(p.v_max));
  }
  if (u >= 0.0) {
    return (p.v_max - u) / (p.v_max + u / p.kappa);
  }
  const double v_e = eccentric_scale(p);
  return p.z_max + (1.0 - p.z_max) * v_e / (v_e - u);
}

// Closed-form inverse of force_velocity on (0, z_max).
inline double force_velocity_inv(const MuscleParams& p, double z) {
  if (!(z > 0.0) || !(z < p.z_max)) {
    throw DomainError("force_velocity_inv: factor " + std::to_string(z) +
                      " outside (0, " + std::to_string(p.z_max) + ")");
  }
  if (z >= 1.0) {
    if (z == 1.0) return 0.0;
    const double v_e = eccentric_scale(p);
    return v_e * (z - 1.0) / (z - p.z_max);
  }
  return p.kappa * p.v_max * (1.0 - z) / (p.kappa + z);
}

// Force-velocity factor implied by force balance across the tendon:
// z = (tendon force - parallel force) / (a * f_max * force_length).
// l_total is the full muscle-tendon length, so l_c = l_total - l_s.
inline double z_value(const MuscleParams& p, double l_s, double l_total,
                      double a) {
  if (!(a >= kActivationFloor)) {
    throw ZeroActivation("z_value: activation " + std::to_string(a) +
                         " below floor " + std::to_string(kActivationFloor));
  }
  const double l_c = l_total - l_s;
  const double f = force_length(p, l_c);
  return (tendon_force(p, l_s) - passive_force(p, l_c)) / (a * p.f_max * f);
}

// Activation rate constant; linear in n, decreasing from 1/t_min at n = 0
// to 1/t_max at n = 1.
inline double activation_gain(const MuscleParams& p, double n) {
  return 1.0 / p.t_min + n * (1.0 / p.t_max - 1.0 / p.t_min);
}

// First-order activation dynamics: da/dt = sigma(n) * (n - a).
inline double activation_rate(const MuscleParams& p, double n, double a) {
  return activation_gain(p, n) * (n - a);
}

// Recovers the neural input n in [0, 1] with activation_rate(n, a) = a_dot.
// phi(n) = sigma(n) (n - a) is quadratic in n with a derivative linear in n,
// so checking the derivative at both endpoints certifies monotonicity.
inline double solve_neural(const MuscleParams& p, double a, double a_dot) {
  const double sigma0 = 1.0 / p.t_min;
  const double dsigma = 1.0 / p.t_max - 1.0 / p.t_min;
  auto phi = [&](double n) { return (sigma0 + dsigma * n) * (n - a); };
  auto dphi = [&](double n) { return sigma0 + dsigma * (2.0 * n - a); };
  if (!(dphi(0.0) > 0.0) || !(dphi(1.0) > 0.0)) {
    throw DomainError(
        "solve_neural: activation-rate map is not monotone for t_min=" +
        std::to_string(p.t_min) + ", t_max=" + std::to_string(p.t_max));
  }
  const double lo_val = phi(0.0);
  const double hi_val = phi(1.0);
  const double slack =
      1e-12 * std::max({1.0, std::abs(lo_val), std::abs(hi_val)});
  if (a_dot < lo_val - slack || a_dot > hi_val + slack) {
    throw NoRootInUnitInterval("solve_neural: rate " + std::to_string(a_dot) +
                               " outside [" + std::to_string(lo_val) + ", " +
                               std::to_string(hi_val) + "] for a=" +
                               std::to_string(a));
  }
  const double target = std::clamp(a_dot, lo_val, hi_val);
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace mssopt

#endif  // MSSOPT_MUSCLE_HPP_
