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

#ifndef MSSOPT_COCONTRACTION_HPP_
#define MSSOPT_COCONTRACTION_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"
#include "mssopt/flatness.hpp"
#include "mssopt/linkage.hpp"
#include "mssopt/lp.hpp"
#include "mssopt/poly.hpp"
#include "mssopt/sdp.hpp"
#include "mssopt/sos.hpp"

namespace mssopt {

// One boundary equality on an output polynomial:
// d^order/dt^order Y_{output}(time) = value, with time at either end of the
// horizon.
struct OutputEquality {
  int output = 0;
  int order = 0;
  double time = 0.0;
  double value = 0.0;
};

// Co-contraction planning problem over one horizon: choose polynomial
// outputs Y(t) of the given even degree minimizing the integrated
// co-contraction while every tendon force stays above its reserve for the
// whole horizon and the boundary equalities hold.
struct CocontractionProblem {
  FlatConfig config;
  LinkageModel linkage;
  PolyVec joint_trajectory;        // the tracked q(t), one entry per joint
  int grid_points = 31;            // samples for the torque box bounds
  Eigen::VectorXd reserves;        // per-muscle force floor [N]
  int degree = 4;                  // even degree of each output polynomial
  std::vector<OutputEquality> equalities;

  [[nodiscard]] double horizon() const { return joint_trajectory.horizon(); }

  void validate() const {
    if (degree < 0 || degree % 2 != 0) {
      throw OddDegree("CocontractionProblem: output degree " +
                      std::to_string(degree) + " must be even");
    }
    if (grid_points < 2) {
      throw DomainError("CocontractionProblem: need at least 2 grid points");
    }
    if (joint_trajectory.size() != config.joints) {
      throw DomainError("CocontractionProblem: joint trajectory does not "
                        "match the flat configuration");
    }
    if (reserves.size() != config.muscle_count()) {
      throw DomainError("CocontractionProblem: one reserve per muscle "
                        "required");
    }
    if (reserves.size() > 0 && !(reserves.minCoeff() >= 0.0)) {
      throw DomainError("CocontractionProblem: reserves must be "
                        "non-negative");
    }
    std::vector<int> counts(config.outputs, 0);
    for (const OutputEquality& eq : equalities) {
      if (eq.output < 0 || eq.output >= config.outputs) {
        throw DomainError("CocontractionProblem: equality output index " +
                          std::to_string(eq.output) + " out of range");
      }
      if (eq.order < 0) {
        throw DomainError("CocontractionProblem: negative derivative order");
      }
      if (eq.time != 0.0 && eq.time != horizon()) {
        throw DomainError("CocontractionProblem: equality time " +
                          std::to_string(eq.time) +
                          " must be an endpoint of the horizon");
      }
      ++counts[eq.output];
    }
    for (int i = 0; i < config.outputs; ++i) {
      if (counts[i] > degree) {
        throw DegreeTooLow("output " + std::to_string(i + 1) + " carries " +
                           std::to_string(counts[i]) +
                           " equalities; a degree-" + std::to_string(degree) +
                           " polynomial keeps at most " +
                           std::to_string(degree) +
                           " while leaving a degree of freedom");
      }
    }
  }
};

// Componentwise torque envelope over the horizon.
struct TorqueBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Envelope of the inverse-dynamics torque along q(t), sampled on a uniform
// grid of the given size.
inline TorqueBounds torque_bounds(const LinkageModel& linkage,
                                  const PolyVec& q, int grid_points) {
  if (grid_points < 2) {
    throw DomainError("torque_bounds: need at least 2 grid points");
  }
  const std::vector<double> grid = uniform_grid(q.horizon(), grid_points);
  TorqueBounds out;
  out.lower = linkage.trajectory_torque(q, grid[0]);
  out.upper = out.lower;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const Eigen::Vector2d tau = linkage.trajectory_torque(q, grid[k]);
    out.lower = out.lower.cwiseMin(tau);
    out.upper = out.upper.cwiseMax(tau);
  }
  return out;
}

// Worst-case slack requirement per muscle: the reserve minus the smallest
// torque contribution the tendon can receive anywhere in the torque box.
// The box minimum of a linear form is attained at a vertex and splits by
// sign, so it is evaluated in closed form.
inline Eigen::VectorXd slack_rhs(const FlatConfig& cfg,
                                 const TorqueBounds& bounds,
                                 const Eigen::VectorXd& reserves) {
  const int m = cfg.muscle_count();
  if (bounds.lower.size() != cfg.joints ||
      bounds.upper.size() != cfg.joints) {
    throw DomainError("slack_rhs: bounds do not match the joint count");
  }
  if (!((bounds.upper - bounds.lower).minCoeff() >= 0.0)) {
    throw DomainError("slack_rhs: lower bound exceeds upper bound");
  }
  if (reserves.size() != m) {
    throw DomainError("slack_rhs: one reserve per muscle required");
  }
  Eigen::VectorXd b(m);
  for (int j = 0; j < m; ++j) {
    double box_min = 0.0;
    for (int k = 0; k < cfg.joints; ++k) {
      const double c = cfg.torque_cols(j, k);
      box_min += c > 0.0 ? c * bounds.lower[k] : c * bounds.upper[k];
    }
    b[j] = reserves[j] - box_min;
  }
  return b;
}

// Encodes the planning problem as a semidefinite program. Decision scalars
// are the output coefficients in output-major order (scalar i*(degree+1)+k
// multiplies t^k of output i). The objective integrates the output sum over
// the horizon; each boundary equality is one linear row; each tendon row
// of the mixing inverse and each output polynomial carries one Gram block
// certifying nonnegativity.
inline SemidefiniteProgram encode_cocontraction(const CocontractionProblem& prob,
                                      const Eigen::VectorXd& rhs) {
  prob.validate();
  const int p = prob.config.outputs;
  const int m = prob.config.muscle_count();
  const int ncoeff = prob.degree + 1;
  if (rhs.size() != m) {
    throw DomainError("encode_cocontraction: slack vector does not match the muscle "
                      "count");
  }

  SdpBuilder builder(p * ncoeff);
  const double horizon = prob.horizon();
  auto idx = [&](int output, int power) { return output * ncoeff + power; };

  Eigen::VectorXd objective = Eigen::VectorXd::Zero(p * ncoeff);
  for (int i = 0; i < p; ++i) {
    double weight = horizon;
    for (int k = 0; k < ncoeff; ++k) {
      objective[idx(i, k)] = weight / static_cast<double>(k + 1);
      weight *= horizon;
    }
  }
  builder.set_scalar_objective(objective);

  for (const OutputEquality& eq : prob.equalities) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(p * ncoeff);
    for (int k = eq.order; k < ncoeff; ++k) {
      double factor = 1.0;
      for (int r = 0; r < eq.order; ++r) factor *= static_cast<double>(k - r);
      row[idx(eq.output, k)] =
          factor * std::pow(eq.time, k - eq.order);
    }
    builder.add_scalar_equality(std::move(row), eq.value);
  }

  for (int j = 0; j < m; ++j) {
    AffinePoly poly;
    poly.constant = Eigen::VectorXd::Zero(ncoeff);
    poly.constant[0] = -rhs[j];
    poly.linear = Eigen::MatrixXd::Zero(ncoeff, p * ncoeff);
    for (int i = 0; i < p; ++i) {
      for (int k = 0; k < ncoeff; ++k) {
        poly.linear(k, idx(i, k)) = prob.config.output_cols(j, i);
      }
    }
    builder.add_sos(poly);
  }
  for (int i = 0; i < p; ++i) {
    AffinePoly poly;
    poly.constant = Eigen::VectorXd::Zero(ncoeff);
    poly.linear = Eigen::MatrixXd::Zero(ncoeff, p * ncoeff);
    for (int k = 0; k < ncoeff; ++k) poly.linear(k, idx(i, k)) = 1.0;
    builder.add_sos(poly);
  }
  return builder.program();
}

// Planning outcome: the optimized outputs with the envelope data the
// encoding used and the solver diagnostics.
struct CocontractionResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  PolyVec outputs;             // valid when status == kOptimal
  double objective = 0.0;
  TorqueBounds bounds;
  Eigen::VectorXd rhs;         // per-muscle slack requirement
  int iterations = 0;
  std::string note;
};

// Solves the polynomial planning problem end to end: torque envelope,
// slack vector, semidefinite encoding, and solution checks. A returned
// kOptimal guarantees every boundary equality holds within 1e-7 and the
// certified polynomials are non-negative within 1e-6 on a grid ten times
// denser than the envelope grid.
inline CocontractionResult solve_cocontraction(const CocontractionProblem& prob,
                           const SdpOptions& options = {}) {
  prob.validate();
  CocontractionResult out;
  out.bounds = torque_bounds(prob.linkage, prob.joint_trajectory,
                             prob.grid_points);
  out.rhs = slack_rhs(prob.config, out.bounds, prob.reserves);

  // Solve on the unit interval: the envelope slack is constant in time, so
  // substituting s = t / T only rescales the boundary equalities and the
  // objective. Monomial Gram matrices on [0, 1] stay well conditioned at
  // horizons where the direct encoding makes the interior-point scaling
  // collapse.
  const double T = prob.horizon();
  CocontractionProblem unit = prob;
  unit.joint_trajectory =
      PolyVec(prob.joint_trajectory.components(), 1.0);
  unit.equalities.clear();
  for (const OutputEquality& eq : prob.equalities) {
    double scale = 1.0;
    for (int r = 0; r < eq.order; ++r) scale *= T;
    unit.equalities.push_back(
        {eq.output, eq.order, eq.time / T, eq.value * scale});
  }
  const SemidefiniteProgram program = encode_cocontraction(unit, out.rhs);
  const SdpResult sol = solve_sdp(program, options);
  out.status = sol.status;
  out.objective = T * sol.objective;
  out.iterations = sol.iterations;
  out.note = sol.note;
  if (sol.status != SdpStatus::kOptimal) return out;

  const int p = prob.config.outputs;
  const int ncoeff = prob.degree + 1;
  std::vector<Poly> components;
  components.reserve(p);
  for (int i = 0; i < p; ++i) {
    Eigen::VectorXd coeffs = sol.scalars.segment(i * ncoeff, ncoeff);
    double power = 1.0;
    for (int k = 0; k < ncoeff; ++k) {
      coeffs[k] /= power;
      power *= T;
    }
    components.push_back(Poly(std::move(coeffs)));
  }
  out.outputs = PolyVec(std::move(components), prob.horizon());

  double equality_residual = 0.0;
  for (const OutputEquality& eq : prob.equalities) {
    const double got =
        out.outputs.component(eq.output).derivative(eq.order).eval(eq.time);
    equality_residual = std::max(equality_residual,
                                 std::abs(got - eq.value));
  }
  double min_margin = 0.0;
  const std::vector<double> dense =
      uniform_grid(prob.horizon(), 10 * prob.grid_points);
  for (const double t : dense) {
    const Eigen::VectorXd outputs_t = out.outputs.eval(t);
    min_margin = std::min(min_margin, outputs_t.minCoeff());
    const Eigen::VectorXd rows =
        prob.config.output_cols * outputs_t - out.rhs;
    min_margin = std::min(min_margin, rows.minCoeff());
  }
  if (equality_residual > 1e-7 || min_margin < -1e-6) {
    out.status = SdpStatus::kNumericalFailure;
    out.note = "solution check failed: equality residual " +
               std::to_string(equality_residual) + ", constraint margin " +
               std::to_string(min_margin);
  }
  return out;
}

// Constant co-contraction levels solving the linear reduction:
// minimize the level sum subject to output_cols * levels >= rhs and
// levels >= 0. Infeasibility cannot occur when the co-contraction weights
// are positive, so a non-optimal status indicates a configuration bug and
// throws.
inline Eigen::VectorXd solve_constant_levels(const FlatConfig& cfg,
                                 const Eigen::VectorXd& rhs) {
  if (rhs.size() != cfg.muscle_count()) {
    throw DomainError("solve_constant_levels: slack vector does not match the muscle "
                      "count");
  }
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Ones(cfg.outputs);
  lp.g = cfg.output_cols;
  lp.h = rhs;
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal) {
    throw MssError(std::string("solve_constant_levels: unexpected status ") +
                   to_string(res.status) +
                   "; a configuration with positive co-contraction weights "
                   "is always feasible and bounded");
  }
  return res.x;
}

// Feasible constant levels built from the co-contraction weights: lifting
// every output by gamma raises tendon j by gamma * sigma_j, so
// gamma = max(max_j rhs_j / sigma_j, 0) suffices.
inline Eigen::VectorXd feasible_levels(const FlatConfig& cfg,
                                          const Eigen::VectorXd& rhs) {
  const int m = cfg.muscle_count();
  if (rhs.size() != m) {
    throw DomainError("feasible_levels: slack vector does not match the "
                      "muscle count");
  }
  double gamma = 0.0;
  for (int j = 0; j < m; ++j) {
    if (!(cfg.sigma[j] > 0.0)) {
      throw NonPositiveSigma("feasible_levels: co-contraction weight of "
                             "muscle " + std::to_string(j + 1) + " is " +
                             std::to_string(cfg.sigma[j]) +
                             "; the construction needs positive weights");
    }
    gamma = std::max(gamma, rhs[j] / cfg.sigma[j]);
  }
  return Eigen::VectorXd::Constant(cfg.outputs, gamma);
}

// Horizon mean of each component, as constant polynomials. Replacing a
// trajectory by its mean preserves the integrated-sum objective exactly.
inline PolyVec horizon_mean(const PolyVec& v) {
  std::vector<Poly> components;
  components.reserve(v.size());
  for (const Poly& p : v.components()) {
    components.push_back(
        Poly({integral_over_horizon(p, v.horizon()) / v.horizon()}));
  }
  return PolyVec(std::move(components), v.horizon());
}

}  // namespace mssopt

#endif  // MSSOPT_COCONTRACTION_HPP_
