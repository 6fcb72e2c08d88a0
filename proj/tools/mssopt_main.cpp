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

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "mssopt/cocontraction.hpp"
#include "mssopt/errors.hpp"
#include "mssopt/flatness.hpp"
#include "mssopt/io.hpp"
#include "mssopt/model.hpp"
#include "mssopt/mpc.hpp"
#include "mssopt/poly.hpp"
#include "mssopt/sim.hpp"

namespace {

// Exit codes shared by every command.
constexpr int kOk = 0;
constexpr int kConfigExit = 2;
constexpr int kInfeasibleExit = 3;
constexpr int kNumericalExit = 4;

struct CommonArgs {
  std::string config;
  std::string out;
  std::string mode;  // empty = keep the scenario's choice
  int grid = 0;      // 0 = keep the scenario's choice
  unsigned seed = 20260821;
  int threads = 1;
};

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Planned trajectory in the same column layout as the simulation trace so
// both files plot with the same tooling.
std::string planned_csv(const mssopt::InverseTrace& trace) {
  std::ostringstream os;
  os << "t,q1,q2,qd1,qd2";
  const int m = static_cast<int>(trace.forces.rows());
  const int p = static_cast<int>(trace.outputs.rows());
  for (int j = 1; j <= m; ++j) os << ",LS" << j;
  for (int j = 1; j <= m; ++j) os << ",a" << j;
  for (int j = 1; j <= m; ++j) os << ",n" << j;
  for (int j = 1; j <= m; ++j) os << ",FT" << j;
  for (int i = 1; i <= p; ++i) os << ",Y" << i;
  os << "\n";
  const auto cell = [&os](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    os << buf;
  };
  for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
    char head[32];
    std::snprintf(head, sizeof(head), "%.17g", trace.times[k]);
    os << head;
    cell(trace.q(0, k));
    cell(trace.q(1, k));
    cell(trace.q_dot(0, k));
    cell(trace.q_dot(1, k));
    for (int j = 0; j < m; ++j) cell(trace.tendon_lengths(j, k));
    for (int j = 0; j < m; ++j) cell(trace.activation(j, k));
    for (int j = 0; j < m; ++j) cell(trace.excitation(j, k));
    for (int j = 0; j < m; ++j) cell(trace.forces(j, k));
    for (int i = 0; i < p; ++i) cell(trace.outputs(i, k));
    os << "\n";
  }
  return os.str();
}

void write_outputs(const std::string& dir,
                   const std::vector<std::pair<std::string, std::string>>&
                       files) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) {
    mssopt::write_text_file(
        (std::filesystem::path(dir) / name).string(), content);
  }
}

mssopt::ScenarioConfig load_scenario_for(const CommonArgs& args,
                                         const std::string& kind) {
  mssopt::ScenarioConfig sc = mssopt::load_scenario(args.config);
  if (sc.kind != kind) {
    throw mssopt::ConfigError(args.config + ": field 'kind' is '" + sc.kind +
                              "' but this command needs '" + kind + "'");
  }
  if (!args.mode.empty()) sc.mode = args.mode;
  if (args.grid > 0) sc.grid_points = args.grid;
  return sc;
}

Eigen::VectorXd start_levels(const mssopt::MssModel& model,
                             const mssopt::FlatConfig& cfg,
                             const mssopt::ScenarioConfig& sc) {
  if (sc.initial_levels > 0.0) {
    return Eigen::VectorXd::Constant(cfg.outputs, sc.initial_levels);
  }
  return mssopt::cheapest_hold_levels(model, cfg, sc.q_start, sc.reserves,
                                      sc.grid_points);
}

int cmd_openloop(const CommonArgs& args) {
  using namespace mssopt;
  const ScenarioConfig sc = load_scenario_for(args, "openloop");
  const MssModel model = load_plant(sc.plant_path);
  const FlatConfig cfg = build_flat_config(model);
  if (sc.reserves.size() != cfg.muscle_count()) {
    throw ConfigError(args.config + ": field 'reserves_n' must have " +
                      std::to_string(cfg.muscle_count()) + " entries");
  }

  // Start state: a consistent hold at the initial posture, with the
  // requested initial joint rates superimposed.
  const Eigen::VectorXd levels0 = start_levels(model, cfg, sc);
  const MssState hold = hold_state(model, cfg, sc.q_start, levels0);
  const PointConditions pc =
      point_constraints(model, sc.q_start, sc.q_start_rate,
                        hold.tendon_lengths, hold.activation);

  // Joint plan: smooth transfer that is at full muscle-level equilibrium at
  // the end (torque rate and its derivative vanish along with the motion).
  const double T = sc.horizon;
  std::vector<Poly> joint_fits;
  for (int i = 0; i < 2; ++i) {
    joint_fits.push_back(fit_boundary(
        {{0.0, 0, sc.q_start[i]},
         {0.0, 1, sc.q_start_rate[i]},
         {0.0, 2, pc.accel[i]},
         {0.0, 3, pc.jerk[i]},
         {T, 0, sc.q_goal[i]},
         {T, 1, 0.0},
         {T, 2, 0.0},
         {T, 3, 0.0},
         {T, 4, 0.0}},
        8));
  }
  const PolyVec q_plan(joint_fits, T);

  // Output levels: either the full polynomial program matching the start
  // conditions, or constant levels from the linear program.
  PolyVec level_plan;
  double objective = 0.0;
  std::string solver_note;
  const auto tic = std::chrono::steady_clock::now();
  if (sc.mode == "sos") {
    CocontractionProblem prob;
    prob.config = cfg;
    prob.linkage = model.linkage;
    prob.joint_trajectory = q_plan;
    prob.grid_points = sc.grid_points;
    prob.reserves = sc.reserves;
    prob.degree = sc.output_degree;
    for (int i = 0; i < cfg.outputs; ++i) {
      prob.equalities.push_back({i, 0, 0.0, pc.outputs[i]});
      prob.equalities.push_back({i, 1, 0.0, pc.output_rates[i]});
      prob.equalities.push_back({i, 1, T, 0.0});
      prob.equalities.push_back({i, 2, T, 0.0});
    }
    const CocontractionResult sol = solve_cocontraction(prob);
    if (sol.status == SdpStatus::kInfeasible) {
      std::fprintf(stderr,
                   "openloop: level program infeasible%s\n",
                   sol.note.empty() ? "" : (": " + sol.note).c_str());
      return kInfeasibleExit;
    }
    if (sol.status != SdpStatus::kOptimal) {
      std::fprintf(stderr, "openloop: level program failed: %s%s\n",
                   to_string(sol.status),
                   sol.note.empty() ? "" : ("; " + sol.note).c_str());
      return kNumericalExit;
    }
    level_plan = sol.outputs;
    objective = sol.objective;
    solver_note = sol.note;
  } else {
    const TorqueBounds bounds =
        torque_bounds(model.linkage, q_plan, sc.grid_points);
    const Eigen::VectorXd alpha = solve_constant_levels(
        cfg, slack_rhs(cfg, bounds, sc.reserves));
    std::vector<Poly> constant;
    for (int i = 0; i < cfg.outputs; ++i) constant.push_back(Poly({alpha[i]}));
    level_plan = PolyVec(constant, T);
    objective = T * alpha.sum();
  }
  const double solve_seconds = seconds_since(tic);

  // Input recovery on a grid fine enough that the piecewise-linear neural
  // command resolves the plan, then open-loop verification by simulation.
  const FlatTrajectory plan{q_plan, level_plan};
  const int inverse_points = 4 * (sc.grid_points - 1) + 1;
  const InverseTrace itrace = inverse_flat_on_grid(
      model, cfg, plan, uniform_grid(T, inverse_points));
  const MssState x0 =
      state_from_inverse(inverse_flat_at(model, cfg, plan, 0.0));

  const auto sim_tic = std::chrono::steady_clock::now();
  const std::vector<double> samples = uniform_grid(T, 301);
  const SimResult sim = integrate_partial(
      model, x0, NeuralInput::from_plan(itrace), samples, {});
  const double sim_seconds = seconds_since(sim_tic);
  if (sim.status != SimStatus::kComplete) {
    std::fprintf(stderr, "openloop: simulation failed: %s\n",
                 sim.message.c_str());
    return kNumericalExit;
  }

  double tracking = 0.0;
  for (int k = 0; k < sim.trace.sample_count(); ++k) {
    const Eigen::Vector2d planned = q_plan.eval(sim.trace.times[k]);
    tracking = std::max(
        tracking, (sim.trace.states[k].q - planned).cwiseAbs().maxCoeff());
  }
  const double final_error =
      (sim.trace.states.back().q - sc.q_goal).cwiseAbs().maxCoeff();

  nlohmann::json summary;
  summary["schema"] = kConfigSchema;
  summary["name"] = sc.name;
  summary["command"] = "openloop";
  summary["mode"] = sc.mode;
  summary["status"] = "optimal";
  summary["objective"] = objective;
  summary["grid_points"] = sc.grid_points;
  summary["output_degree"] = sc.output_degree;
  summary["inverse_points"] = inverse_points;
  summary["samples"] = 301;
  summary["tracking_error_max_rad"] = tracking;
  summary["final_error_rad"] = final_error;
  summary["level_solve_seconds"] = solve_seconds;
  summary["sim_seconds"] = sim_seconds;
  if (!solver_note.empty()) summary["solver_note"] = solver_note;

  write_outputs(args.out,
                {{"planned.csv", planned_csv(itrace)},
                 {"simulated.csv", sim.trace.to_csv()},
                 {"summary.json", summary.dump(2) + "\n"}});

  std::printf("openloop %s: objective %.6g, tracking error %.3e rad, "
              "solve %.3f s, sim %.3f s\n",
              sc.name.c_str(), objective, tracking, solve_seconds,
              sim_seconds);
  return kOk;
}

int cmd_mpc(const CommonArgs& args) {
  using namespace mssopt;
  const ScenarioConfig sc = load_scenario_for(args, "mpc");
  const MssModel model = load_plant(sc.plant_path);
  const FlatConfig cfg = build_flat_config(model);
  if (sc.reserves.size() != cfg.muscle_count()) {
    throw ConfigError(args.config + ": field 'reserves_n' must have " +
                      std::to_string(cfg.muscle_count()) + " entries");
  }

  RecedingHorizonConfig rh;
  rh.horizon = sc.horizon;
  rh.step = sc.step;
  rh.grid_points = sc.grid_points;
  rh.target = sc.q_goal;
  rh.reserves = sc.reserves;
  rh.mode = sc.mode == "lp" ? LevelMode::kConstantLevels
                            : LevelMode::kPolynomial;
  rh.max_steps = sc.max_steps;
  rh.convergence_band = sc.convergence_band;
  rh.convergence_run = sc.convergence_run;
  rh.polynomial_degree = sc.output_degree;
  if (sc.override_from_step >= 0) {
    const int from = sc.override_from_step;
    const double value = sc.override_reserve;
    const Eigen::VectorXd base = sc.reserves;
    rh.reserve_schedule = [from, value, base](int k) {
      return k >= from
                 ? Eigen::VectorXd::Constant(base.size(), value).eval()
                 : base;
    };
  }

  const MssState x0 =
      hold_state(model, cfg, sc.q_start, start_levels(model, cfg, sc));

  const auto tic = std::chrono::steady_clock::now();
  const RecedingHorizonResult res = run_receding_horizon(model, rh, x0);
  const double loop_seconds = seconds_since(tic);

  std::vector<double> ms;
  for (const auto& s : res.steps) ms.push_back(s.solve_seconds * 1e3);
  std::sort(ms.begin(), ms.end());
  const double median_ms = ms.empty() ? 0.0 : ms[ms.size() / 2];
  const double max_ms = ms.empty() ? 0.0 : ms.back();

  const Eigen::Vector2d final_q =
      res.trace.states.empty() ? sc.q_start : res.trace.states.back().q;

  nlohmann::json summary;
  summary["schema"] = kConfigSchema;
  summary["name"] = sc.name;
  summary["command"] = "mpc";
  summary["mode"] = sc.mode;
  summary["steps_executed"] = res.steps.size();
  summary["converged"] = res.converged;
  summary["converged_at"] = res.converged_at;
  summary["completed"] = res.completed;
  summary["note"] = res.note;
  summary["final_q_deg"] = {final_q[0] / kRadiansPerDegree,
                            final_q[1] / kRadiansPerDegree};
  summary["final_error_deg"] =
      (final_q - sc.q_goal).cwiseAbs().maxCoeff() / kRadiansPerDegree;
  summary["solve_ms_median"] = median_ms;
  summary["solve_ms_max"] = max_ms;
  summary["loop_seconds"] = loop_seconds;

  write_outputs(args.out,
                {{"trace.csv", res.trace.to_csv()},
                 {"steps.csv", res.log_csv()},
                 {"steps.json", res.log_json().dump(2) + "\n"},
                 {"summary.json", summary.dump(2) + "\n"}});

  std::printf("mpc %s: %zu steps, converged %s (instant %d), "
              "solve median %.2f ms max %.2f ms, loop %.3f s\n",
              sc.name.c_str(), res.steps.size(),
              res.converged ? "yes" : "no", res.converged_at, median_ms,
              max_ms, loop_seconds);
  if (!res.completed) {
    std::fprintf(stderr, "mpc: halted: %s\n", res.note.c_str());
    const bool infeasible =
        !res.steps.empty() &&
        res.steps.back().outcome == SolveOutcome::kInfeasible;
    return infeasible ? kInfeasibleExit : kNumericalExit;
  }
  return kOk;
}

struct CheckRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

int cmd_validate(const CommonArgs& args) {
  using namespace mssopt;
  std::vector<CheckRow> rows;
  bool precondition_failed = false;
  bool numerical_failed = false;

  const auto report = [&rows](const std::string& name, bool pass,
                              const std::string& detail) {
    rows.push_back({name, pass, detail});
  };
  const auto flush = [&rows]() {
    for (const CheckRow& r : rows) {
      std::printf("%-22s %s  %s\n", r.name.c_str(),
                  r.pass ? "PASS" : "FAIL", r.detail.c_str());
    }
  };

  MssModel model;
  try {
    model = load_plant(args.config);
    report("plant-load", true,
           std::to_string(model.muscle_count()) + " muscles, " +
               std::to_string(model.output_count()) + " outputs");
  } catch (const ConfigError& e) {
    report("plant-load", false, e.what());
    flush();
    return kConfigExit;
  }

  FlatConfig cfg;
  try {
    cfg = build_flat_config(model);
    std::ostringstream os;
    os << "condition " << std::scientific << cfg.condition
       << ", min weight " << cfg.sigma.minCoeff();
    report("feasibility-weights", true, os.str());
  } catch (const RowSumViolation& e) {
    report("feasibility-weights", false,
           std::string("RowSumViolation: ") + e.what());
    precondition_failed = true;
  } catch (const SingularC& e) {
    report("feasibility-weights", false,
           std::string("SingularC: ") + e.what());
    precondition_failed = true;
  } catch (const FeasibilityConditionViolation& e) {
    report("feasibility-weights", false,
           std::string("FeasibilityConditionViolation: ") + e.what());
    precondition_failed = true;
  }
  if (precondition_failed) {
    flush();
    return kConfigExit;
  }

  // Static flat roundtrip on random smooth trajectories: outputs read back
  // from the recovered muscle state must match the planned levels.
  {
    const int reps = 24;
    const int threads =
        std::clamp(args.threads, 1,
                   static_cast<int>(std::thread::hardware_concurrency()));
    std::vector<double> worst(threads, 0.0);
    std::vector<std::string> errors(threads);
    // Pre-draw per-rep parameters so the result is independent of the
    // thread partition.
    std::mt19937 gen(args.seed);
    std::uniform_real_distribution<double> angle(0.3, 1.1);
    std::uniform_real_distribution<double> swing(-0.3, 0.3);
    std::uniform_real_distribution<double> level(180.0, 280.0);
    std::uniform_real_distribution<double> ramp(-30.0, 30.0);
    struct Draw {
      double a0, a1, s0, s1, base, slope;
    };
    std::vector<Draw> draws(reps);
    for (Draw& d : draws) {
      d = {angle(gen), angle(gen), swing(gen), swing(gen), level(gen),
           ramp(gen)};
    }
    const auto worker = [&](int tid) {
      try {
        for (int rep = tid; rep < reps; rep += threads) {
          const Draw& d = draws[rep];
          std::vector<Poly> qs{
              Poly({d.a0, d.s0, -d.s0 / 2.0}),
              Poly({d.a1, d.s1, -d.s1 / 2.0})};
          std::vector<Poly> ys;
          for (int i = 0; i < cfg.outputs; ++i) {
            ys.push_back(Poly({d.base, d.slope}));
          }
          const FlatTrajectory traj{PolyVec(qs, 1.0), PolyVec(ys, 1.0)};
          for (const double t : uniform_grid(1.0, 7)) {
            const InversePoint pt = inverse_flat_at(model, cfg, traj, t);
            const double err =
                (flat_outputs(model, pt.tendon_lengths) - traj.y.eval(t))
                    .cwiseAbs()
                    .maxCoeff();
            worst[tid] = std::max(worst[tid], err);
          }
        }
      } catch (const MssError& e) {
        errors[tid] = e.what();
      }
    };
    std::vector<std::thread> pool;
    for (int tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
    for (std::thread& th : pool) th.join();
    const std::string first_error =
        *std::max_element(errors.begin(), errors.end());
    const double err = *std::max_element(worst.begin(), worst.end());
    if (!first_error.empty()) {
      report("flat-roundtrip", false, first_error);
      numerical_failed = true;
    } else {
      std::ostringstream os;
      os << reps << " trajectories, worst output error " << std::scientific
         << err;
      report("flat-roundtrip", err < 1e-8, os.str());
      numerical_failed = numerical_failed || !(err < 1e-8);
    }
  }

  // Dynamic roundtrip: simulate under the recovered inputs and check the
  // joint plan is reproduced.
  try {
    std::vector<Poly> qs;
    const Eigen::Vector2d from(0.35, 0.65), to(0.85, 1.05);
    for (int i = 0; i < 2; ++i) {
      qs.push_back(fit_boundary({{0.0, 0, from[i]},
                                 {0.0, 1, 0.0},
                                 {1.0, 0, to[i]},
                                 {1.0, 1, 0.0}},
                                3));
    }
    std::vector<Poly> ys;
    for (int i = 0; i < cfg.outputs; ++i) ys.push_back(Poly({240.0}));
    const FlatTrajectory traj{PolyVec(qs, 1.0), PolyVec(ys, 1.0)};
    const InverseTrace itrace =
        inverse_flat_on_grid(model, cfg, traj, uniform_grid(1.0, 41));
    const MssState x0 =
        state_from_inverse(inverse_flat_at(model, cfg, traj, 0.0));
    const SimResult sim =
        integrate_partial(model, x0, NeuralInput::from_plan(itrace),
                          uniform_grid(1.0, 101), {});
    if (sim.status != SimStatus::kComplete) {
      report("dynamic-roundtrip", false, sim.message);
      numerical_failed = true;
    } else {
      double err = 0.0;
      for (int k = 0; k < sim.trace.sample_count(); ++k) {
        err = std::max(err, (sim.trace.states[k].q -
                             traj.q.eval(sim.trace.times[k]))
                                .cwiseAbs()
                                .maxCoeff());
      }
      std::ostringstream os;
      os << "tracking error " << std::scientific << err << " rad";
      report("dynamic-roundtrip", err < 0.02, os.str());
      numerical_failed = numerical_failed || !(err < 0.02);
    }
  } catch (const MssError& e) {
    report("dynamic-roundtrip", false, e.what());
    numerical_failed = true;
  }

  // Linear-program sanity: a separable program with a known optimum.
  try {
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Ones(2);
    lp.g = Eigen::MatrixXd::Identity(2, 2);
    lp.h = Eigen::Vector2d(1.0, 2.0);
    const LpResult sol = solve_lp(lp);
    const bool pass = sol.status == LpStatus::kOptimal &&
                      std::abs(sol.objective - 3.0) < 1e-9;
    report("lp-solver", pass,
           pass ? "known optimum reproduced"
                : std::string("status ") + to_string(sol.status));
    numerical_failed = numerical_failed || !pass;
  } catch (const MssError& e) {
    report("lp-solver", false, e.what());
    numerical_failed = true;
  }

  // Level-program reduction: with only terminal-rate conditions the
  // polynomial optimum collapses to the constant linear-program solution.
  try {
    const PolyVec qp(std::vector<Poly>{Poly({0.5}), Poly({0.8})}, 0.5);
    CocontractionProblem prob;
    prob.config = cfg;
    prob.linkage = model.linkage;
    prob.joint_trajectory = qp;
    prob.grid_points = 11;
    prob.reserves = Eigen::VectorXd::Constant(cfg.muscle_count(), 5.0);
    prob.degree = 4;
    for (int i = 0; i < cfg.outputs; ++i) {
      prob.equalities.push_back({i, 1, 0.5, 0.0});
    }
    const CocontractionResult sol = solve_cocontraction(prob);
    const Eigen::VectorXd alpha = solve_constant_levels(cfg, sol.rhs);
    const double lp_objective = 0.5 * alpha.sum();
    const double gap =
        std::abs(sol.objective - lp_objective) / std::max(1.0, lp_objective);
    std::ostringstream os;
    os << "relative gap " << std::scientific << gap;
    const bool pass = sol.status == SdpStatus::kOptimal && gap < 1e-4;
    report("level-reduction", pass, os.str());
    numerical_failed = numerical_failed || !pass;
  } catch (const MssError& e) {
    report("level-reduction", false, e.what());
    numerical_failed = true;
  }

  flush();
  if (precondition_failed) return kConfigExit;
  if (numerical_failed) return kNumericalExit;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion optimization for muscle-driven linkage models"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&args](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", args.config, "Scenario or plant JSON file")
        ->required();
    auto* out =
        cmd->add_option("--out", args.out, "Directory for result files");
    if (needs_out) out->required();
    cmd->add_option("--mode", args.mode, "Level optimization mode")
        ->check(CLI::IsMember({"lp", "sos"}));
    cmd->add_option("--grid", args.grid, "Constraint grid points override")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", args.seed, "Random seed for property checks");
    cmd->add_option("--threads", args.threads,
                    "Worker threads for property checks")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* openloop = app.add_subcommand(
      "openloop", "Plan a transfer and verify it by forward simulation");
  add_common(openloop, true);
  CLI::App* mpc = app.add_subcommand(
      "mpc", "Run the receding-horizon controller to a target posture");
  add_common(mpc, true);
  CLI::App* validate = app.add_subcommand(
      "validate", "Check a plant file against the model preconditions");
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }

  try {
    if (openloop->parsed()) return cmd_openloop(args);
    if (mpc->parsed()) return cmd_mpc(args);
    return cmd_validate(args);
  } catch (const mssopt::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigExit;
  } catch (const mssopt::MssError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalExit;
  }
}
