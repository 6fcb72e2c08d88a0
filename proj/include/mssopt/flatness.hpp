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

#ifndef MSSOPT_FLATNESS_HPP_
#define MSSOPT_FLATNESS_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"
#include "mssopt/model.hpp"
#include "mssopt/muscle.hpp"
#include "mssopt/poly.hpp"

namespace mssopt {

namespace flat_detail {

// Derivative at x of the quadratic interpolating (x0,y0), (x1,y1), (x2,y2).
inline double lagrange3_derivative(double x0, double y0, double x1, double y1,
                                   double x2, double y2, double x) {
  return y0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
         y1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
         y2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

inline std::string muscle_tag(int j) {
  return "muscle " + std::to_string(j + 1);
}

inline std::string time_tag(double t) {
  return "t=" + std::to_string(t);
}

}  // namespace flat_detail

// Precomputed data for the flat parameterization. The square mixing map
// stacks the moment-arm rows on top of the output-averaging rows,
//   mix = [moment_arms; output_mix],
// and maps tendon forces to (joint torques, co-contraction outputs). Its
// inverse splits into torque_cols (how torques pull on each tendon) and
// output_cols (how outputs distribute across tendons); sigma holds the row
// sums of output_cols, which must be positive for co-contraction to raise
// every tendon force.
struct FlatConfig {
  Eigen::MatrixXd mix;          // m x m stacked map
  Eigen::MatrixXd mix_inv;      // inverse of mix
  Eigen::MatrixXd torque_cols;  // m x joints block of mix_inv
  Eigen::MatrixXd output_cols;  // m x outputs block of mix_inv
  Eigen::VectorXd sigma;        // row sums of output_cols
  double condition = 0.0;       // spectral condition number of mix
  int joints = 0;
  int outputs = 0;

  [[nodiscard]] int muscle_count() const { return joints + outputs; }
};

// Builds the flat-parameterization data from a moment-arm matrix (joints x
// muscles) and an output-mixing matrix (outputs x muscles). Throws
// RowSumViolation when a mixing row does not sum to one, SingularC when the
// stacked map is ill-conditioned, and FeasibilityConditionViolation when
// some row sum of output_cols is non-positive.
inline FlatConfig build_flat_config(const Eigen::MatrixXd& arms,
                                    const Eigen::MatrixXd& mix) {
  const Eigen::Index joints = arms.rows();
  const Eigen::Index muscles = arms.cols();
  const Eigen::Index outputs = mix.rows();
  if (joints < 1 || outputs < 1) {
    throw DomainError("build_flat_config: need at least one joint row and "
                      "one output row");
  }
  if (mix.cols() != muscles) {
    throw DomainError("build_flat_config: arm and mixing matrices disagree "
                      "on the muscle count");
  }
  if (joints + outputs != muscles) {
    throw DomainError("build_flat_config: joints + outputs must equal the "
                      "muscle count for a square map");
  }
  for (Eigen::Index r = 0; r < outputs; ++r) {
    const double sum = mix.row(r).sum();
    if (std::abs(sum - 1.0) > 1e-12) {
      throw RowSumViolation("output mix row " + std::to_string(r + 1) +
                            " sums to " + std::to_string(sum) +
                            "; each row must sum to 1");
    }
  }

  FlatConfig cfg;
  cfg.joints = static_cast<int>(joints);
  cfg.outputs = static_cast<int>(outputs);
  cfg.mix.resize(muscles, muscles);
  cfg.mix.topRows(joints) = arms;
  cfg.mix.bottomRows(outputs) = mix;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cfg.mix);
  const double s_max = svd.singularValues()(0);
  const double s_min = svd.singularValues()(muscles - 1);
  cfg.condition = s_min > 0.0 ? s_max / s_min
                              : std::numeric_limits<double>::infinity();
  if (!(cfg.condition < 1e12)) {
    throw SingularC("stacked arm/mixing map is numerically singular "
                    "(condition " + std::to_string(cfg.condition) + ")");
  }
  cfg.mix_inv = cfg.mix.partialPivLu().solve(
      Eigen::MatrixXd::Identity(muscles, muscles));
  cfg.torque_cols = cfg.mix_inv.leftCols(joints);
  cfg.output_cols = cfg.mix_inv.rightCols(outputs);
  cfg.sigma = cfg.output_cols.rowwise().sum();
  for (Eigen::Index j = 0; j < muscles; ++j) {
    if (!(cfg.sigma[j] > 0.0)) {
      throw FeasibilityConditionViolation(
          flat_detail::muscle_tag(static_cast<int>(j)) +
          ": uniform co-contraction weight sigma=" +
          std::to_string(cfg.sigma[j]) +
          " is not positive, so raising the outputs cannot keep every "
          "tendon taut");
    }
  }
  return cfg;
}

inline FlatConfig build_flat_config(const MssModel& model) {
  model.validate();
  return build_flat_config(model.linkage.moment_arms, model.output_mix);
}

// Tendon forces realizing the given joint torques and co-contraction
// outputs. Throws SlackViolation when any force fails to be positive.
inline Eigen::VectorXd tendon_forces_from_flat(const FlatConfig& cfg,
                                               const Eigen::VectorXd& torque,
                                               const Eigen::VectorXd& outputs) {
  if (torque.size() != cfg.joints || outputs.size() != cfg.outputs) {
    throw DomainError("tendon_forces_from_flat: dimension mismatch");
  }
  Eigen::VectorXd forces = cfg.torque_cols * torque + cfg.output_cols * outputs;
  for (Eigen::Index j = 0; j < forces.size(); ++j) {
    if (!(forces[j] > 0.0)) {
      throw SlackViolation(
          flat_detail::muscle_tag(static_cast<int>(j)) + ": tendon force " +
          std::to_string(forces[j]) +
          " is not positive for the requested torque and outputs");
    }
  }
  return forces;
}

// Co-contraction outputs read from the muscle state: the output-averaging
// rows applied to the tendon forces implied by the tendon lengths.
inline Eigen::VectorXd flat_outputs(const MssModel& model,
                                    const Eigen::VectorXd& tendon_lengths) {
  if (tendon_lengths.size() != model.muscle_count()) {
    throw DomainError("flat_outputs: tendon length count mismatch");
  }
  Eigen::VectorXd phi(tendon_lengths.size());
  for (Eigen::Index j = 0; j < phi.size(); ++j) {
    phi[j] = tendon_force(model.muscles[j], tendon_lengths[j]);
  }
  return model.output_mix * phi;
}

// Reference trajectory in the flat coordinates: joint angles q(t) and
// co-contraction outputs y(t) on a shared horizon.
struct FlatTrajectory {
  PolyVec q;
  PolyVec y;

  [[nodiscard]] double horizon() const { return q.horizon(); }

  void validate(const FlatConfig& cfg) const {
    if (q.size() != cfg.joints || y.size() != cfg.outputs) {
      throw DomainError("FlatTrajectory: component counts do not match the "
                        "flat configuration");
    }
    if (q.horizon() != y.horizon()) {
      throw DomainError("FlatTrajectory: q and y horizons differ");
    }
  }
};

// Full state and input recovered from the flat trajectory at one time.
struct InversePoint {
  Eigen::Vector2d q;
  Eigen::Vector2d q_dot;
  Eigen::Vector2d torque;
  Eigen::Vector2d torque_dot;
  Eigen::VectorXd outputs;          // co-contraction outputs y(t)
  Eigen::VectorXd forces;           // tendon forces
  Eigen::VectorXd tendon_lengths;
  Eigen::VectorXd tendon_rates;     // d(tendon length)/dt
  Eigen::VectorXd shortening;       // contractile shortening rate u
  Eigen::VectorXd velocity_factor;  // force-velocity factor z
  Eigen::VectorXd activation;
};

// Recovers the muscle state and activation at time t by inverting the
// model maps layer by layer: torque and outputs fix the tendon forces,
// forces fix the tendon lengths, their rates fix the shortening rates, and
// the force balance fixes the activation. fd_step is the central-difference
// step used for the torque rate.
inline InversePoint inverse_flat_at(const MssModel& model,
                                    const FlatConfig& cfg,
                                    const FlatTrajectory& traj, double t,
                                    double fd_step = 1e-5) {
  traj.validate(cfg);
  if (cfg.joints != model.joint_count() ||
      cfg.muscle_count() != model.muscle_count()) {
    throw DomainError("inverse_flat_at: flat configuration does not match "
                      "the model");
  }
  const int m = model.muscle_count();
  const auto& arms = model.linkage.moment_arms;

  InversePoint out;
  out.q = traj.q.eval(t);
  out.q_dot = traj.q.derivative(1).eval(t);
  out.torque = model.linkage.trajectory_torque(traj.q, t);
  out.torque_dot = model.linkage.torque_dot(traj.q, t, fd_step);
  out.outputs = traj.y.eval(t);
  const Eigen::VectorXd outputs_dot = traj.y.derivative(1).eval(t);

  out.forces = cfg.torque_cols * out.torque + cfg.output_cols * out.outputs;
  out.tendon_lengths.resize(m);
  Eigen::VectorXd slope(m);
  for (int j = 0; j < m; ++j) {
    if (!(out.forces[j] > 0.0)) {
      throw SlackViolation(
          flat_detail::time_tag(t) + ", " + flat_detail::muscle_tag(j) +
          ": flat inverse needs a positive tendon force, got " +
          std::to_string(out.forces[j]));
    }
    out.tendon_lengths[j] = tendon_force_inv(model.muscles[j], out.forces[j]);
    slope[j] = tendon_force_slope(model.muscles[j], out.tendon_lengths[j]);
  }

  out.tendon_rates =
      (cfg.torque_cols * out.torque_dot + cfg.output_cols * outputs_dot)
          .cwiseQuotient(slope);
  const Eigen::VectorXd total_lengths =
      model.linkage.muscle_lengths(out.q);
  out.shortening = out.tendon_rates + arms.transpose() * out.q_dot;

  out.velocity_factor.resize(m);
  out.activation.resize(m);
  for (int j = 0; j < m; ++j) {
    const MuscleParams& p = model.muscles[j];
    const double l_c = total_lengths[j] - out.tendon_lengths[j];
    if (!(l_c > 0.0)) {
      throw DomainError(flat_detail::time_tag(t) + ", " +
                        flat_detail::muscle_tag(j) +
                        ": contractile length " + std::to_string(l_c) +
                        " is not positive");
    }
    if (!(out.shortening[j] < p.v_max)) {
      throw DomainError(flat_detail::time_tag(t) + ", " +
                        flat_detail::muscle_tag(j) + ": shortening rate " +
                        std::to_string(out.shortening[j]) +
                        " reaches the contraction limit " +
                        std::to_string(p.v_max));
    }
    out.velocity_factor[j] = force_velocity(p, out.shortening[j]);
    const double scale = p.f_max * force_length(p, l_c) *
                         out.velocity_factor[j];
    out.activation[j] =
        (out.forces[j] - passive_force(p, l_c)) / scale;
    if (!(out.activation[j] >= kActivationFloor) ||
        !(out.activation[j] <= 1.0)) {
      throw ActivationOutOfRange(
          flat_detail::time_tag(t) + ", " + flat_detail::muscle_tag(j) +
          ": recovered activation " + std::to_string(out.activation[j]) +
          " outside [" + std::to_string(kActivationFloor) + ", 1]");
    }
  }
  return out;
}

// Inverse-flatness results on a time grid, stored column-per-sample.
struct InverseTrace {
  Eigen::VectorXd times;
  Eigen::MatrixXd q;                // joints x K
  Eigen::MatrixXd q_dot;            // joints x K
  Eigen::MatrixXd torque;           // joints x K
  Eigen::MatrixXd torque_dot;       // joints x K
  Eigen::MatrixXd outputs;          // outputs x K
  Eigen::MatrixXd forces;           // muscles x K
  Eigen::MatrixXd tendon_lengths;   // muscles x K
  Eigen::MatrixXd tendon_rates;     // muscles x K
  Eigen::MatrixXd shortening;       // muscles x K
  Eigen::MatrixXd velocity_factor;  // muscles x K
  Eigen::MatrixXd activation;       // muscles x K
  Eigen::MatrixXd activation_rate;  // muscles x K
  Eigen::MatrixXd excitation;       // muscles x K
};

// Runs the single-time inverse on every grid point, then recovers the
// neural excitations: the activation rate is estimated per muscle by a
// three-point interpolating-polynomial derivative (one-sided at the ends)
// and mapped through the activation dynamics inverse.
inline InverseTrace inverse_flat_on_grid(const MssModel& model,
                                         const FlatConfig& cfg,
                                         const FlatTrajectory& traj,
                                         const std::vector<double>& times,
                                         double fd_step = 1e-5) {
  const int k_count = static_cast<int>(times.size());
  if (k_count < 3) {
    throw DomainError("inverse_flat_on_grid: need at least 3 grid points to "
                      "recover excitations");
  }
  for (int k = 1; k < k_count; ++k) {
    if (!(times[k] > times[k - 1])) {
      throw DomainError("inverse_flat_on_grid: grid times must be strictly "
                        "increasing");
    }
  }

  const int m = model.muscle_count();
  InverseTrace tr;
  tr.times = Eigen::VectorXd::Map(times.data(), k_count);
  tr.q.resize(cfg.joints, k_count);
  tr.q_dot.resize(cfg.joints, k_count);
  tr.torque.resize(cfg.joints, k_count);
  tr.torque_dot.resize(cfg.joints, k_count);
  tr.outputs.resize(cfg.outputs, k_count);
  tr.forces.resize(m, k_count);
  tr.tendon_lengths.resize(m, k_count);
  tr.tendon_rates.resize(m, k_count);
  tr.shortening.resize(m, k_count);
  tr.velocity_factor.resize(m, k_count);
  tr.activation.resize(m, k_count);
  tr.activation_rate.resize(m, k_count);
  tr.excitation.resize(m, k_count);

  for (int k = 0; k < k_count; ++k) {
    const InversePoint pt = inverse_flat_at(model, cfg, traj, times[k],
                                            fd_step);
    tr.q.col(k) = pt.q;
    tr.q_dot.col(k) = pt.q_dot;
    tr.torque.col(k) = pt.torque;
    tr.torque_dot.col(k) = pt.torque_dot;
    tr.outputs.col(k) = pt.outputs;
    tr.forces.col(k) = pt.forces;
    tr.tendon_lengths.col(k) = pt.tendon_lengths;
    tr.tendon_rates.col(k) = pt.tendon_rates;
    tr.shortening.col(k) = pt.shortening;
    tr.velocity_factor.col(k) = pt.velocity_factor;
    tr.activation.col(k) = pt.activation;
  }

  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < k_count; ++k) {
      const int base = k == 0 ? 0 : (k == k_count - 1 ? k_count - 3 : k - 1);
      const double a_dot = flat_detail::lagrange3_derivative(
          times[base], tr.activation(j, base), times[base + 1],
          tr.activation(j, base + 1), times[base + 2],
          tr.activation(j, base + 2), times[k]);
      tr.activation_rate(j, k) = a_dot;
      try {
        tr.excitation(j, k) =
            solve_neural(model.muscles[j], tr.activation(j, k), a_dot);
      } catch (const NoRootInUnitInterval& e) {
        throw NoRootInUnitInterval(flat_detail::time_tag(times[k]) + ", " +
                                   flat_detail::muscle_tag(j) + ": " +
                                   e.what());
      }
    }
  }
  return tr;
}

// Boundary data implied by a full state (q, q_dot, tendon lengths,
// activations): the outputs and their rates plus the joint acceleration
// and jerk that any flat trajectory must match at that instant.
struct PointConditions {
  Eigen::VectorXd outputs;          // y
  Eigen::VectorXd output_rates;     // dy/dt
  Eigen::Vector2d accel;            // d2q/dt2
  Eigen::Vector2d jerk;             // d3q/dt3
  Eigen::Vector2d torque;
  Eigen::Vector2d torque_rate;
  Eigen::VectorXd forces;
  Eigen::VectorXd tendon_rates;
  Eigen::VectorXd shortening;
  Eigen::VectorXd velocity_factor;
};

// Derives the instantaneous boundary conditions from the state. The force
// balance is inverted through the force-velocity curve to obtain shortening
// rates (the reverse direction of inverse_flat_at, which makes the two
// implementations independent checks of each other), and the jerk follows
// from differentiating the joint dynamics along the flow, with the rigid-body
// terms differenced numerically using fd_step.
inline PointConditions point_constraints(const MssModel& model,
                                         const Eigen::Vector2d& q,
                                         const Eigen::Vector2d& q_dot,
                                         const Eigen::VectorXd& tendon_lengths,
                                         const Eigen::VectorXd& activation,
                                         double fd_step = 1e-5) {
  const int m = model.muscle_count();
  if (tendon_lengths.size() != m || activation.size() != m) {
    throw DomainError("point_constraints: state dimension mismatch");
  }
  if (!(fd_step > 0.0)) {
    throw DomainError("point_constraints: fd_step must be positive");
  }
  const auto& arms = model.linkage.moment_arms;

  PointConditions out;
  out.forces.resize(m);
  for (int j = 0; j < m; ++j) {
    out.forces[j] = tendon_force(model.muscles[j], tendon_lengths[j]);
  }
  out.outputs = model.output_mix * out.forces;
  out.torque = model.linkage.muscle_torque(out.forces);

  const Eigen::Matrix2d mass = model.linkage.mass_matrix(q);
  const Eigen::LLT<Eigen::Matrix2d> mass_chol(mass);
  out.accel = mass_chol.solve(out.torque -
                              model.linkage.coriolis_matrix(q, q_dot) * q_dot -
                              model.linkage.gravity_torque(q));

  const Eigen::VectorXd total_lengths = model.linkage.muscle_lengths(q);
  out.shortening.resize(m);
  out.velocity_factor.resize(m);
  Eigen::VectorXd force_rates(m);
  for (int j = 0; j < m; ++j) {
    const MuscleParams& p = model.muscles[j];
    const double l_c = total_lengths[j] - tendon_lengths[j];
    if (!(l_c > 0.0)) {
      throw DomainError(flat_detail::muscle_tag(j) + ": contractile length " +
                        std::to_string(l_c) + " is not positive");
    }
    const double z = z_value(p, tendon_lengths[j], total_lengths[j],
                             activation[j]);
    if (!(z > 0.0) || !(z < p.z_max)) {
      throw DomainError(flat_detail::muscle_tag(j) +
                        ": force balance needs a velocity factor in (0, " +
                        std::to_string(p.z_max) + "), got " +
                        std::to_string(z));
    }
    out.velocity_factor[j] = z;
    out.shortening[j] = force_velocity_inv(p, z);
  }
  out.tendon_rates = out.shortening - arms.transpose() * q_dot;
  for (int j = 0; j < m; ++j) {
    force_rates[j] = tendon_force_slope(model.muscles[j], tendon_lengths[j]) *
                     out.tendon_rates[j];
  }
  out.output_rates = model.output_mix * force_rates;
  out.torque_rate = model.linkage.muscle_torque(force_rates);

  // Differentiate M(q) qdd + C(q, qd) qd + g(q) = tau along the flow; the
  // states at t +/- fd_step are expanded to second order so the central
  // differences stay second-order accurate.
  const double h = fd_step;
  const Eigen::Vector2d q_plus = q + h * q_dot + 0.5 * h * h * out.accel;
  const Eigen::Vector2d q_minus = q - h * q_dot + 0.5 * h * h * out.accel;
  const Eigen::Vector2d qd_plus = q_dot + h * out.accel;
  const Eigen::Vector2d qd_minus = q_dot - h * out.accel;
  const Eigen::Matrix2d mass_rate =
      (model.linkage.mass_matrix(q_plus) - model.linkage.mass_matrix(q_minus)) /
      (2.0 * h);
  const Eigen::Vector2d coriolis_rate =
      (model.linkage.coriolis_matrix(q_plus, qd_plus) * qd_plus -
       model.linkage.coriolis_matrix(q_minus, qd_minus) * qd_minus) /
      (2.0 * h);
  const Eigen::Vector2d gravity_rate =
      (model.linkage.gravity_torque(q_plus) -
       model.linkage.gravity_torque(q_minus)) /
      (2.0 * h);
  out.jerk = mass_chol.solve(out.torque_rate - mass_rate * out.accel -
                             coriolis_rate - gravity_rate);
  return out;
}

}  // namespace mssopt

#endif  // MSSOPT_FLATNESS_HPP_
