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

#ifndef MSSOPT_LINKAGE_HPP_
#define MSSOPT_LINKAGE_HPP_

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"
#include "mssopt/poly.hpp"

namespace mssopt {

// Two-link planar arm in a vertical plane. q1 is measured from the
// horizontal x-axis, q2 is the relative angle of the second link, so
// q = (pi/2, 0) points both links straight up and has zero gravity torque.
//
// Muscle routing is linear: lengths(q) = l_ref - A^T q with a constant
// moment-arm matrix A (2 x m). Antagonists carry arms of opposite sign.
class LinkageModel {
 public:
  Eigen::Vector2d mass{2.0, 1.5};        // link masses [kg]
  Eigen::Vector2d length{0.30, 0.28};    // link lengths [m]
  Eigen::Vector2d com{0.15, 0.14};       // pivot-to-center distances [m]
  Eigen::Vector2d inertia{0.020, 0.012};  // inertia about each center [kg m^2]
  double gravity = 9.81;                 // [m/s^2]

  // Moment arms [m]: pair (1,2) spans the shoulder, pair (3,4) spans both
  // joints, pair (5,6) spans the elbow.
  Eigen::Matrix<double, 2, Eigen::Dynamic> moment_arms{
      {0.045, -0.045, 0.030, -0.030, 0.000, 0.000},
      {0.000, 0.000, 0.022, -0.022, 0.035, -0.035}};

  // Muscle-tendon path lengths at q = 0 [m].
  Eigen::VectorXd path_ref{{0.309, 0.231, 0.384, 0.297, 0.248, 0.192}};

  [[nodiscard]] int muscle_count() const {
    return static_cast<int>(moment_arms.cols());
  }

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      if (!(mass[i] > 0.0) || !(length[i] > 0.0) || !(com[i] > 0.0) ||
          !(inertia[i] > 0.0)) {
        throw DomainError("LinkageModel: link " + std::to_string(i + 1) +
                          " parameters must be positive");
      }
      if (!(com[i] <= length[i])) {
        throw DomainError("LinkageModel: center of link " +
                          std::to_string(i + 1) + " lies past its tip");
      }
    }
    if (!(gravity >= 0.0)) {
      throw DomainError("LinkageModel: gravity must be non-negative");
    }
    if (muscle_count() <= 4) {
      throw DomainError("LinkageModel: need more than 2N = 4 muscles, got " +
                        std::to_string(muscle_count()));
    }
    if (path_ref.size() != muscle_count()) {
      throw DomainError("LinkageModel: path_ref size mismatch");
    }
    if (!(path_ref.minCoeff() > 0.0)) {
      throw DomainError("LinkageModel: path_ref must be positive");
    }
  }

  [[nodiscard]] Eigen::Matrix2d mass_matrix(const Eigen::Vector2d& q) const {
    const double c2 = std::cos(q[1]);
    const double a = inertia[0] + mass[0] * com[0] * com[0] +
                     mass[1] * length[0] * length[0];
    const double b = inertia[1] + mass[1] * com[1] * com[1];
    const double h = mass[1] * length[0] * com[1] * c2;
    Eigen::Matrix2d m;
    m << a + b + 2.0 * h, b + h, b + h, b;
    return m;
  }

  // Christoffel form: qd^T (dM/dt - 2C) qd vanishes identically.
  [[nodiscard]] Eigen::Matrix2d coriolis_matrix(
      const Eigen::Vector2d& q, const Eigen::Vector2d& qd) const {
    const double h = mass[1] * length[0] * com[1] * std::sin(q[1]);
    Eigen::Matrix2d c;
    c << -h * qd[1], -h * (qd[0] + qd[1]), h * qd[0], 0.0;
    return c;
  }

  [[nodiscard]] Eigen::Vector2d gravity_torque(const Eigen::Vector2d& q) const {
    const double c1 = std::cos(q[0]);
    const double c12 = std::cos(q[0] + q[1]);
    Eigen::Vector2d g;
    g[0] = gravity * ((mass[0] * com[0] + mass[1] * length[0]) * c1 +
                      mass[1] * com[1] * c12);
    g[1] = gravity * mass[1] * com[1] * c12;
    return g;
  }

  [[nodiscard]] Eigen::Vector2d inverse_dynamics(
      const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
      const Eigen::Vector2d& qdd) const {
    return mass_matrix(q) * qdd + coriolis_matrix(q, qd) * qd +
           gravity_torque(q);
  }

  // Joint torque along a polynomial trajectory.
  [[nodiscard]] Eigen::Vector2d trajectory_torque(const PolyVec& q,
                                                  double t) const {
    const Eigen::Vector2d qt = q.eval(t);
    const Eigen::Vector2d qdt = q.derivative(1).eval(t);
    const Eigen::Vector2d qddt = q.derivative(2).eval(t);
    return inverse_dynamics(qt, qdt, qddt);
  }

  // d(tau)/dt by a central difference of step h along the trajectory.
  [[nodiscard]] Eigen::Vector2d torque_dot(const PolyVec& q, double t,
                                           double h) const {
    if (!(h > 0.0)) throw DomainError("torque_dot: step must be positive");
    return (trajectory_torque(q, t + h) - trajectory_torque(q, t - h)) /
           (2.0 * h);
  }

  [[nodiscard]] Eigen::VectorXd muscle_lengths(const Eigen::Vector2d& q) const {
    return path_ref - moment_arms.transpose() * q;
  }

  // Joint torque produced by the given tendon forces.
  [[nodiscard]] Eigen::Vector2d muscle_torque(
      const Eigen::VectorXd& tendon_forces) const {
    return moment_arms * tendon_forces;
  }

  [[nodiscard]] double kinetic_energy(const Eigen::Vector2d& q,
                                      const Eigen::Vector2d& qd) const {
    return 0.5 * qd.dot(mass_matrix(q) * qd);
  }

  [[nodiscard]] double potential_energy(const Eigen::Vector2d& q) const {
    const double s1 = std::sin(q[0]);
    const double s12 = std::sin(q[0] + q[1]);
    return gravity * (mass[0] * com[0] * s1 +
                      mass[1] * (length[0] * s1 + com[1] * s12));
  }
};

}  // namespace mssopt

#endif  // MSSOPT_LINKAGE_HPP_
