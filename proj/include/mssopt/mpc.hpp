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

#ifndef MSSOPT_MPC_HPP_
#define MSSOPT_MPC_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mssopt/cocontraction.hpp"
#include "mssopt/errors.hpp"
#include "mssopt/flatness.hpp"
#include "mssopt/lp.hpp"
#include "mssopt/model.hpp"
#include "mssopt/poly.hpp"
#include "mssopt/sim.hpp"

namespace mssopt {

// How the per-step output-level optimization is posed. Constant levels
// reduce to a linear program (sound when only terminal-rest conditions are
// requested); the polynomial mode solves the full semidefinite encoding and
// additionally matches the plant's output levels at the step start.
enum class LevelMode { kConstantLevels, kPolynomial };

enum class SolveOutcome { kOptimal, kInfeasible, kNumericalFailure };

[[nodiscard]] inline const char* to_string(SolveOutcome s) {
  switch (s) {
    case SolveOutcome::kOptimal: return "optimal";
    case SolveOutcome::kInfeasible: return "infeasible";
    case SolveOutcome::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

struct RecedingHorizonConfig {
  double horizon = 0.5;            // prediction span per step [s]
  double step = 0.05;              // applied control interval [s]
  int grid_points = 11;            // torque/constraint grid per horizon
  Eigen::Vector2d target = Eigen::Vector2d::Zero();  // [rad]
  Eigen::VectorXd reserves;        // per-muscle tendon-force floor [N]
  LevelMode mode = LevelMode::kConstantLevels;
  int max_steps = 100;
  double convergence_band = M_PI / 180.0;  // [rad] and [rad/s]
  int convergence_run = 10;        // consecutive in-band instants required
  int polynomial_degree = 4;       // polynomial mode only
  int inverse_grid = 5;            // samples on [0, step] for input recovery
  bool exact_model = false;        // restart each step on the planned state
  IntegrateOptions integrator;
  // Optional per-step reserve override (stress testing); null uses
  // `reserves` throughout.
  std::function<Eigen::VectorXd(int)> reserve_schedule;

  void validate(int muscles) const {
    if (!(horizon > 0.0) || !(step > 0.0) || !(step < horizon)) {
      throw DomainError("RecedingHorizonConfig: need 0 < step < horizon");
    }
    if (grid_points < 2) {
      throw DomainError("RecedingHorizonConfig: need at least 2 grid points");
    }
    if (reserves.size() != muscles) {
      throw DomainError("RecedingHorizonConfig: reserves have " +
                        std::to_string(reserves.size()) +
                        " entries; expected " + std::to_string(muscles));
    }
    if (reserves.size() > 0 && reserves.minCoeff() < 0.0) {
      throw DomainError("RecedingHorizonConfig: reserves must be >= 0");
    }
    if (!(convergence_band > 0.0)) {
      throw DomainError("RecedingHorizonConfig: convergence band must be "
                        "positive");
    }
    if (max_steps < 0) {
      throw DomainError("RecedingHorizonConfig: max_steps must be >= 0");
    }
    if (convergence_run < 1) {
      throw DomainError("RecedingHorizonConfig: convergence_run must be "
                        ">= 1");
    }
    if (inverse_grid < 3) {
      throw DomainError("RecedingHorizonConfig: inverse_grid must be >= 3");
    }
    if (mode == LevelMode::kPolynomial &&
        (polynomial_degree < 2 || polynomial_degree % 2 != 0)) {
      throw OddDegree("RecedingHorizonConfig: polynomial degree must be "
                      "even and >= 2");
    }
  }
};

// Smallest slack of the two constraint families over a uniform grid on the
// prediction horizon: force_margin is min over time and muscles of
// (C_Y Y(t) - rhs), level_margin is min over time and outputs of Y(t).
struct FeasibilityMargins {
  double force_margin = 0.0;
  double level_margin = 0.0;
};

inline FeasibilityMargins feasibility_margins(const FlatConfig& cfg,
                                              const PolyVec& outputs,
                                              const Eigen::VectorXd& rhs,
                                              int grid_points) {
  if (outputs.size() != cfg.outputs) {
    throw DomainError("feasibility_margins: outputs have " +
                      std::to_string(outputs.size()) +
                      " components; expected " + std::to_string(cfg.outputs));
  }
  if (rhs.size() != cfg.muscle_count()) {
    throw DomainError("feasibility_margins: rhs has " +
                      std::to_string(rhs.size()) + " entries; expected " +
                      std::to_string(cfg.muscle_count()));
  }
  if (grid_points < 2) {
    throw DomainError("feasibility_margins: need at least 2 grid points");
  }
  FeasibilityMargins m;
  m.force_margin = std::numeric_limits<double>::infinity();
  m.level_margin = std::numeric_limits<double>::infinity();
  for (const double t : uniform_grid(outputs.horizon(), grid_points)) {
    const Eigen::VectorXd levels = outputs.eval(t);
    m.force_margin =
        std::min(m.force_margin,
                 (cfg.output_cols * levels - rhs).minCoeff());
    m.level_margin = std::min(m.level_margin, levels.minCoeff());
  }
  return m;
}

// State of a static hold at q with the given output levels, recovered
// through the flat inverse. The natural way to seed a run from rest.
inline MssState hold_state(const MssModel& model, const FlatConfig& cfg,
                           const Eigen::Vector2d& q,
                           const Eigen::VectorXd& levels) {
  if (levels.size() != cfg.outputs) {
    throw DomainError("hold_state: one level per output required");
  }
  const PolyVec qp(std::vector<Poly>{Poly({q[0]}), Poly({q[1]})}, 1.0);
  std::vector<Poly> outs;
  for (int i = 0; i < cfg.outputs; ++i) {
    outs.push_back(Poly({levels[i]}));
  }
  const FlatTrajectory hold{qp, PolyVec(outs, 1.0)};
  return state_from_inverse(inverse_flat_at(model, cfg, hold, 0.0));
}

// Cheapest output levels that keep every tendon force above its reserve
// over the hold posture's torque requirement.
inline Eigen::VectorXd cheapest_hold_levels(const MssModel& model,
                                            const FlatConfig& cfg,
                                            const Eigen::Vector2d& q,
                                            const Eigen::VectorXd& reserves,
                                            int grid_points = 11) {
  const PolyVec qp(std::vector<Poly>{Poly({q[0]}), Poly({q[1]})}, 1.0);
  const TorqueBounds bounds = torque_bounds(model.linkage, qp, grid_points);
  return solve_constant_levels(cfg, slack_rhs(cfg, bounds, reserves));
}

// One executed control step. solve_seconds stays in memory for timing
// summaries; the file exports below leave it out so written logs are
// byte-reproducible.
struct RecedingHorizonStep {
  int index = 0;
  double time = 0.0;               // step start [s]
  SolveOutcome outcome = SolveOutcome::kNumericalFailure;
  double objective = 0.0;          // integral of the output sum over horizon
  double solve_seconds = 0.0;
  Eigen::Vector2d q = Eigen::Vector2d::Zero();       // measured at start
  Eigen::Vector2d q_dot = Eigen::Vector2d::Zero();
  PolyVec predicted;               // planned outputs on [0, horizon]
  Eigen::VectorXd predicted_outputs;    // planned levels at t = step
  Eigen::VectorXd closed_loop_outputs;  // plant levels reached at t = step
  FeasibilityMargins margins;
};

struct RecedingHorizonResult {
  std::vector<RecedingHorizonStep> steps;
  SimTrace trace;                  // closed-loop plant trajectory
  bool converged = false;
  int converged_at = -1;           // first instant of the in-band streak
  bool completed = true;           // false when the loop halted on an error
  std::string note;

  [[nodiscard]] std::string log_csv() const;
  [[nodiscard]] nlohmann::json log_json() const;
};

namespace mpc_detail {

inline void append_trace(SimTrace* dst, const SimTrace& src,
                         bool skip_first) {
  const int begin = skip_first ? 1 : 0;
  const int add = src.sample_count() - begin;
  if (add <= 0) return;
  const int old = dst->sample_count();
  const auto grow = [&](Eigen::MatrixXd* mat, const Eigen::MatrixXd& extra) {
    mat->conservativeResize(extra.rows(), old + add);
    mat->rightCols(add) = extra.rightCols(add);
  };
  grow(&dst->forces, src.forces);
  grow(&dst->neural, src.neural);
  grow(&dst->outputs, src.outputs);
  dst->times.insert(dst->times.end(), src.times.begin() + begin,
                    src.times.end());
  dst->states.insert(dst->states.end(), src.states.begin() + begin,
                     src.states.end());
}

}  // namespace mpc_detail

// Receding-horizon control toward a joint-space target: each step refits a
// cubic joint trajectory from the measured (q, q_dot) to the target at
// rest, re-derives torque bounds and force-reserve requirements on the
// horizon grid, optimizes the output levels, recovers neural inputs on the
// applied interval through the flat inverse, and advances the plant by one
// step. The loop stops on convergence (measured state within the band for
// convergence_run consecutive step instants), on max_steps, or on the first
// failure, which is recorded with its diagnostic instead of thrown.
inline RecedingHorizonResult run_receding_horizon(
    const MssModel& model, const RecedingHorizonConfig& rh,
    const MssState& x0) {
  model.validate();
  rh.validate(model.muscle_count());
  x0.validate(model);
  const FlatConfig cfg = build_flat_config(model);

  RecedingHorizonResult result;
  MssState x = x0;
  int streak = 0;

  for (int k = 0; k < rh.max_steps; ++k) {
    // Convergence is judged on the measured state at the step instant.
    const bool in_band =
        (x.q - rh.target).cwiseAbs().maxCoeff() < rh.convergence_band &&
        x.q_dot.cwiseAbs().maxCoeff() < rh.convergence_band;
    streak = in_band ? streak + 1 : 0;
    if (streak >= rh.convergence_run) {
      result.converged = true;
      result.converged_at = k - rh.convergence_run + 1;
      break;
    }

    RecedingHorizonStep step;
    step.index = k;
    step.time = static_cast<double>(k) * rh.step;
    step.q = x.q;
    step.q_dot = x.q_dot;

    try {
      // (1) Fresh cubic joint plan from the measured state to the target
      // at rest.
      std::vector<Poly> fits;
      for (int i = 0; i < 2; ++i) {
        fits.push_back(fit_boundary(
            {{0.0, 0, x.q[i]},
             {0.0, 1, x.q_dot[i]},
             {rh.horizon, 0, rh.target[i]},
             {rh.horizon, 1, 0.0}},
            3));
      }
      const PolyVec joint_plan(fits, rh.horizon);

      // (2) Torque envelope and per-muscle requirements on the grid.
      const Eigen::VectorXd reserves =
          rh.reserve_schedule ? rh.reserve_schedule(k) : rh.reserves;
      const TorqueBounds bounds =
          torque_bounds(model.linkage, joint_plan, rh.grid_points);
      const Eigen::VectorXd rhs = slack_rhs(cfg, bounds, reserves);

      // (3) Output-level optimization.
      PolyVec planned_outputs;
      const auto tic = std::chrono::steady_clock::now();
      if (rh.mode == LevelMode::kConstantLevels) {
        LinearProgram lp;
        lp.c = Eigen::VectorXd::Ones(cfg.outputs);
        lp.g = cfg.output_cols;
        lp.h = rhs;
        const LpResult sol = solve_lp(lp);
        step.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          tic)
                .count();
        if (sol.status != LpStatus::kOptimal) {
          step.outcome = sol.status == LpStatus::kInfeasible
                             ? SolveOutcome::kInfeasible
                             : SolveOutcome::kNumericalFailure;
          result.steps.push_back(std::move(step));
          result.completed = false;
          result.note = "step " + std::to_string(k) +
                        ": level program returned " + to_string(sol.status);
          break;
        }
        std::vector<Poly> constant;
        for (int i = 0; i < cfg.outputs; ++i) {
          constant.push_back(Poly({sol.x[i]}));
        }
        planned_outputs = PolyVec(constant, rh.horizon);
        step.objective = rh.horizon * sol.x.sum();
      } else {
        CocontractionProblem prob;
        prob.config = cfg;
        prob.linkage = model.linkage;
        prob.joint_trajectory = joint_plan;
        prob.grid_points = rh.grid_points;
        prob.reserves = reserves;
        prob.degree = rh.polynomial_degree;
        const Eigen::VectorXd current_levels =
            flat_outputs(model, x.tendon_lengths);
        for (int i = 0; i < cfg.outputs; ++i) {
          prob.equalities.push_back({i, 0, 0.0, current_levels[i]});
          prob.equalities.push_back({i, 1, rh.horizon, 0.0});
        }
        const CocontractionResult sol = solve_cocontraction(prob);
        step.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          tic)
                .count();
        if (sol.status != SdpStatus::kOptimal) {
          step.outcome = sol.status == SdpStatus::kInfeasible
                             ? SolveOutcome::kInfeasible
                             : SolveOutcome::kNumericalFailure;
          result.steps.push_back(std::move(step));
          result.completed = false;
          result.note = "step " + std::to_string(k) +
                        ": level program returned " + to_string(sol.status) +
                        (sol.note.empty() ? "" : "; " + sol.note);
          break;
        }
        planned_outputs = sol.outputs;
        step.objective = sol.objective;
      }
      step.outcome = SolveOutcome::kOptimal;
      step.predicted = planned_outputs;
      step.predicted_outputs = planned_outputs.eval(rh.step);
      step.margins =
          feasibility_margins(cfg, planned_outputs, rhs, rh.grid_points);

      // (4) Neural inputs over the applied interval via the flat inverse.
      const FlatTrajectory plan{joint_plan, planned_outputs};
      std::vector<double> local;
      for (int s = 0; s < rh.inverse_grid; ++s) {
        local.push_back(rh.step * static_cast<double>(s) /
                        static_cast<double>(rh.inverse_grid - 1));
      }
      const InverseTrace inverse =
          inverse_flat_on_grid(model, cfg, plan, local);
      NeuralInput input;
      for (const double s : local) input.times.push_back(step.time + s);
      input.values = inverse.excitation;

      // (5) Advance the plant by one step.
      if (rh.exact_model) {
        x = state_from_inverse(
            inverse_flat_at(model, cfg, plan, 0.0));
      }
      std::vector<double> samples;
      for (const double s : local) samples.push_back(step.time + s);
      const SimResult advanced =
          integrate_partial(model, x, input, samples, rh.integrator);
      mpc_detail::append_trace(&result.trace, advanced.trace, k > 0);
      if (advanced.status != SimStatus::kComplete) {
        result.steps.push_back(std::move(step));
        result.completed = false;
        result.note = "step " + std::to_string(k) + ": plant " +
                      to_string(advanced.status) + ": " + advanced.message;
        break;
      }
      x = advanced.trace.states.back();
      step.closed_loop_outputs = flat_outputs(model, x.tendon_lengths);

      result.steps.push_back(std::move(step));
    } catch (const MssError& e) {
      result.completed = false;
      result.note = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  return result;
}

inline std::string RecedingHorizonResult::log_csv() const {
  const int p =
      steps.empty() ? 0 : static_cast<int>(steps.front().predicted.size());
  std::ostringstream os;
  os << "step,t,status,objective,q1,q2,qd1,qd2,margin_forces,margin_levels";
  for (int i = 0; i < p; ++i) os << ",predY" << i + 1;
  for (int i = 0; i < p; ++i) os << ",clY" << i + 1;
  os << "\n";
  const auto cell = [&os](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    os << buf;
  };
  for (const RecedingHorizonStep& s : steps) {
    os << s.index;
    cell(s.time);
    os << ',' << to_string(s.outcome);
    cell(s.objective);
    cell(s.q[0]);
    cell(s.q[1]);
    cell(s.q_dot[0]);
    cell(s.q_dot[1]);
    cell(s.margins.force_margin);
    cell(s.margins.level_margin);
    for (int i = 0; i < p; ++i) {
      cell(s.predicted_outputs.size() > i ? s.predicted_outputs[i]
                                          : std::nan(""));
    }
    for (int i = 0; i < p; ++i) {
      cell(s.closed_loop_outputs.size() > i ? s.closed_loop_outputs[i]
                                            : std::nan(""));
    }
    os << "\n";
  }
  return os.str();
}

inline nlohmann::json RecedingHorizonResult::log_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const RecedingHorizonStep& s : steps) {
    nlohmann::json e;
    e["step"] = s.index;
    e["t"] = s.time;
    e["status"] = to_string(s.outcome);
    e["objective"] = s.objective;
    e["q"] = {s.q[0], s.q[1]};
    e["q_dot"] = {s.q_dot[0], s.q_dot[1]};
    e["margin_forces"] = s.margins.force_margin;
    e["margin_levels"] = s.margins.level_margin;
    e["predicted_outputs"] =
        std::vector<double>(s.predicted_outputs.begin(),
                            s.predicted_outputs.end());
    e["closed_loop_outputs"] =
        std::vector<double>(s.closed_loop_outputs.begin(),
                            s.closed_loop_outputs.end());
    entries.push_back(std::move(e));
  }
  nlohmann::json j;
  j["steps"] = std::move(entries);
  j["converged"] = converged;
  j["converged_at"] = converged_at;
  j["completed"] = completed;
  j["note"] = note;
  return j;
}

}  // namespace mssopt

#endif  // MSSOPT_MPC_HPP_
