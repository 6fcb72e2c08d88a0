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

#include "mssopt/cocontraction.hpp"

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mssopt/flatness.hpp"
#include "mssopt/model.hpp"
#include "test_trajectories.hpp"
#include "test_util.hpp"

using mssopt::build_flat_config;
using mssopt::CocontractionProblem;
using mssopt::CocontractionResult;
using mssopt::FlatConfig;
using mssopt::MssModel;
using mssopt::OutputEquality;
using mssopt::Poly;
using mssopt::PolyVec;
using mssopt::reference_arm;
using mssopt::SdpStatus;
using mssopt::TorqueBounds;

namespace {

// Planning problem for the shared reach with the boundary set used
// throughout: outputs pinned at the start (level and rate) and brought to
// rest at the end (rate and curvature), leaving one degree of freedom per
// degree-4 output.
CocontractionProblem make_reach_problem(const MssModel& model) {
  CocontractionProblem prob;
  prob.config = build_flat_config(model);
  prob.linkage = model.linkage;
  prob.joint_trajectory = test_trajectories::reach_with_outputs().q;
  prob.reserves = Eigen::VectorXd::Constant(6, 10.0);
  prob.degree = 4;
  const double horizon = prob.horizon();
  for (int i = 0; i < 4; ++i) {
    prob.equalities.push_back({i, 0, 0.0, 300.0});
    prob.equalities.push_back({i, 1, 0.0, 0.0});
    prob.equalities.push_back({i, 1, horizon, 0.0});
    prob.equalities.push_back({i, 2, horizon, 0.0});
  }
  return prob;
}

// Minimal two-muscle, one-output configuration for encoding-level tests.
FlatConfig make_toy_config() {
  Eigen::MatrixXd arms(1, 2);
  arms << 1.0, -1.0;
  Eigen::MatrixXd mix(1, 2);
  mix << 0.5, 0.5;
  return build_flat_config(arms, mix);
}

FlatConfig random_level_config(int joints, int outputs) {
  const int muscles = joints + outputs;
  FlatConfig cfg;
  cfg.joints = joints;
  cfg.outputs = outputs;
  while (true) {
    cfg.output_cols =
        test_util::uniform_vec(muscles * outputs, -0.5, 1.0)
            .reshaped(muscles, outputs)
            .eval();
    cfg.sigma = cfg.output_cols.rowwise().sum();
    if (cfg.sigma.minCoeff() > 0.1) return cfg;
  }
}

}  // namespace

TEST_CASE("torque envelope collapses when holding a posture") {
  const MssModel model = reference_arm();
  const Eigen::Vector2d q(0.3, 0.8);
  const PolyVec hold(std::vector<Poly>{Poly({q[0]}), Poly({q[1]})}, 2.0);
  const TorqueBounds bounds = mssopt::torque_bounds(model.linkage, hold, 31);
  const Eigen::Vector2d gravity = model.linkage.gravity_torque(q);
  REQUIRE((bounds.lower - gravity).cwiseAbs().maxCoeff() < 1e-13);
  REQUIRE((bounds.upper - gravity).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("torque envelope is stable under grid refinement") {
  const MssModel model = reference_arm();
  const PolyVec q = test_trajectories::reach_with_outputs().q;
  const TorqueBounds coarse = mssopt::torque_bounds(model.linkage, q, 31);
  const TorqueBounds fine = mssopt::torque_bounds(model.linkage, q, 301);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(std::abs(coarse.lower[k] - fine.lower[k]) <=
            0.02 * std::max(1.0, std::abs(fine.lower[k])));
    REQUIRE(std::abs(coarse.upper[k] - fine.upper[k]) <=
            0.02 * std::max(1.0, std::abs(fine.upper[k])));
    // Refining can only widen the envelope.
    REQUIRE(fine.lower[k] <= coarse.lower[k] + 1e-12);
    REQUIRE(fine.upper[k] >= coarse.upper[k] - 1e-12);
  }
  REQUIRE_THROWS_AS(mssopt::torque_bounds(model.linkage, q, 1),
                    mssopt::DomainError);
}

TEST_CASE("slack requirement matches box-vertex enumeration") {
  const MssModel model = reference_arm();
  const FlatConfig cfg = build_flat_config(model);
  for (int rep = 0; rep < 200; ++rep) {
    TorqueBounds bounds;
    bounds.lower = test_util::uniform_vec(2, -20.0, 10.0);
    bounds.upper =
        bounds.lower + test_util::uniform_vec(2, 0.0, 25.0).cwiseAbs();
    const Eigen::VectorXd reserves =
        test_util::uniform_vec(6, 0.0, 15.0).cwiseAbs();
    const Eigen::VectorXd rhs = mssopt::slack_rhs(cfg, bounds, reserves);

    for (int j = 0; j < 6; ++j) {
      double vertex_min = std::numeric_limits<double>::infinity();
      for (int corner = 0; corner < 4; ++corner) {
        const double t0 = (corner & 1) ? bounds.upper[0] : bounds.lower[0];
        const double t1 = (corner & 2) ? bounds.upper[1] : bounds.lower[1];
        vertex_min = std::min(vertex_min, cfg.torque_cols(j, 0) * t0 +
                                              cfg.torque_cols(j, 1) * t1);
      }
      REQUIRE(rhs[j] == Catch::Approx(reserves[j] - vertex_min)
                            .margin(1e-12));
    }
  }

  // A muscle the torques cannot reach needs exactly its reserve.
  FlatConfig zero_row = cfg;
  zero_row.torque_cols.row(5).setZero();
  TorqueBounds bounds{Eigen::Vector2d(-3.0, -1.0), Eigen::Vector2d(2.0, 4.0)};
  const Eigen::VectorXd rhs = mssopt::slack_rhs(
      zero_row, bounds, Eigen::VectorXd::Constant(6, 7.5));
  REQUIRE(rhs[5] == Catch::Approx(7.5).margin(1e-14));

  TorqueBounds inverted{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  REQUIRE_THROWS_AS(
      mssopt::slack_rhs(cfg, inverted, Eigen::VectorXd::Zero(6)),
      mssopt::DomainError);
}

TEST_CASE("feasible levels satisfy the constant reduction constraints") {
  // Hand instance: weights per muscle (2, 1); requirements (4, 1) force
  // gamma = 2, lifting the tendons to (4, 2).
  FlatConfig cfg;
  cfg.joints = 1;
  cfg.outputs = 1;
  cfg.output_cols = Eigen::MatrixXd(2, 1);
  cfg.output_cols << 2.0, 1.0;
  cfg.sigma = cfg.output_cols.rowwise().sum();
  Eigen::VectorXd rhs(2);
  rhs << 4.0, 1.0;
  const Eigen::VectorXd levels = mssopt::feasible_levels(cfg, rhs);
  REQUIRE(levels.size() == 1);
  REQUIRE(levels[0] == Catch::Approx(2.0).margin(1e-14));
  const Eigen::VectorXd lifted = cfg.output_cols * levels;
  REQUIRE(lifted[0] == Catch::Approx(4.0).margin(1e-14));
  REQUIRE(lifted[1] == Catch::Approx(2.0).margin(1e-14));

  // Non-positive requirements need no lift at all.
  REQUIRE(mssopt::feasible_levels(cfg, Eigen::VectorXd::Constant(2, -1.0))
              .isZero());

  for (int rep = 0; rep < 1000; ++rep) {
    const int outputs = test_util::uniform_int(1, 4);
    const FlatConfig random_cfg = random_level_config(2, outputs);
    const Eigen::VectorXd req =
        test_util::uniform_vec(random_cfg.muscle_count(), -5.0, 5.0);
    const Eigen::VectorXd alpha = mssopt::feasible_levels(random_cfg, req);
    REQUIRE(alpha.minCoeff() >= 0.0);
    REQUIRE(((random_cfg.output_cols * alpha - req).minCoeff()) >= -1e-12);
  }

  FlatConfig bad = cfg;
  bad.sigma[1] = 0.0;
  REQUIRE_THROWS_AS(mssopt::feasible_levels(bad, rhs),
                    mssopt::NonPositiveSigma);
}

TEST_CASE("constant reduction solves to optimal levels") {
  // Non-positive requirements make zero levels optimal.
  const FlatConfig toy = make_toy_config();
  const Eigen::VectorXd zero_levels = mssopt::solve_constant_levels(
      toy, Eigen::VectorXd::Constant(2, -2.0));
  REQUIRE(zero_levels.cwiseAbs().maxCoeff() < 1e-12);

  for (int rep = 0; rep < 200; ++rep) {
    const int outputs = test_util::uniform_int(1, 4);
    const FlatConfig cfg = random_level_config(2, outputs);
    const Eigen::VectorXd req =
        test_util::uniform_vec(cfg.muscle_count(), -5.0, 8.0);
    const Eigen::VectorXd alpha = mssopt::solve_constant_levels(cfg, req);
    REQUIRE(alpha.minCoeff() >= -1e-12);
    REQUIRE((cfg.output_cols * alpha - req).minCoeff() >= -1e-8);
    // The closed-form construction is feasible, so the optimum cannot
    // exceed its objective.
    const Eigen::VectorXd fallback = mssopt::feasible_levels(cfg, req);
    REQUIRE(alpha.sum() <= fallback.sum() + 1e-8);
  }
}

TEST_CASE("polynomial encoding has the expected dimensions") {
  const MssModel model = reference_arm();
  CocontractionProblem prob = make_reach_problem(model);
  const TorqueBounds bounds =
      mssopt::torque_bounds(prob.linkage, prob.joint_trajectory,
                            prob.grid_points);
  const Eigen::VectorXd rhs =
      mssopt::slack_rhs(prob.config, bounds, prob.reserves);
  const mssopt::SemidefiniteProgram program =
      mssopt::encode_cocontraction(prob, rhs);

  // 4 outputs x 5 coefficients; one degree-4 Gram (3x3) per tendon row and
  // per output; 5 coefficient ties per Gram plus 16 boundary rows.
  REQUIRE(program.num_scalars == 20);
  REQUIRE(program.block_dims.size() == 10);
  for (const int dim : program.block_dims) REQUIRE(dim == 3);
  REQUIRE(program.equalities.size() == 16 + 10 * 5);

  const double horizon = prob.horizon();
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 5; ++k) {
      REQUIRE(program.scalar_objective[i * 5 + k] ==
              Catch::Approx(std::pow(horizon, k + 1) / (k + 1)));
    }
  }
}

TEST_CASE("planning problems reject malformed inputs") {
  const MssModel model = reference_arm();
  const CocontractionProblem base = make_reach_problem(model);

  CocontractionProblem odd = base;
  odd.degree = 3;
  REQUIRE_THROWS_AS(odd.validate(), mssopt::OddDegree);

  CocontractionProblem overfull = base;
  overfull.equalities.push_back({0, 0, base.horizon(), 310.0});
  REQUIRE_THROWS_AS(overfull.validate(), mssopt::DegreeTooLow);

  CocontractionProblem sparse = base;
  sparse.grid_points = 1;
  REQUIRE_THROWS_AS(sparse.validate(), mssopt::DomainError);

  CocontractionProblem negative = base;
  negative.reserves[2] = -1.0;
  REQUIRE_THROWS_AS(negative.validate(), mssopt::DomainError);

  CocontractionProblem bad_index = base;
  bad_index.equalities.push_back({4, 0, 0.0, 1.0});
  REQUIRE_THROWS_AS(bad_index.validate(), mssopt::DomainError);

  CocontractionProblem interior_time = base;
  interior_time.equalities.push_back({0, 0, 0.5, 1.0});
  REQUIRE_THROWS_AS(interior_time.validate(), mssopt::DomainError);
}

TEST_CASE("single-output program trades level against nonnegativity") {
  // Analytic optimum: minimize the integral of a degree-2 nonnegative
  // polynomial pinned to Y(0) = 2 on [0, T]. The best curve is the square
  // a (t - 2T/3)^2 with a = 9 / (2 T^2): it touches zero inside the
  // horizon and integrates to T/2.
  CocontractionProblem prob;
  prob.config = make_toy_config();
  prob.joint_trajectory = PolyVec(std::vector<Poly>{Poly({0.0})}, 2.0);
  prob.grid_points = 5;
  prob.reserves = Eigen::VectorXd::Zero(2);
  prob.degree = 2;
  prob.equalities.push_back({0, 0, 0.0, 2.0});

  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(2, -1.0);
  const mssopt::SemidefiniteProgram program =
      mssopt::encode_cocontraction(prob, rhs);
  const mssopt::SdpResult sol = mssopt::solve_sdp(program);
  REQUIRE(sol.status == SdpStatus::kOptimal);

  const double horizon = 2.0;
  REQUIRE(sol.objective == Catch::Approx(horizon / 2.0).margin(1e-5));
  const double quad = 9.0 / (2.0 * horizon * horizon);
  REQUIRE(sol.scalars[0] == Catch::Approx(2.0).margin(1e-4));
  REQUIRE(sol.scalars[1] == Catch::Approx(-6.0 / horizon).margin(1e-3));
  REQUIRE(sol.scalars[2] == Catch::Approx(quad).margin(1e-3));
}

TEST_CASE("reach planning meets reserves with room to spare") {
  const MssModel model = reference_arm();
  CocontractionProblem prob = make_reach_problem(model);
  REQUIRE(prob.grid_points == 31);
  const CocontractionResult res = mssopt::solve_cocontraction(prob);
  REQUIRE(res.status == SdpStatus::kOptimal);

  // Boundary equalities hold tightly.
  for (const OutputEquality& eq : prob.equalities) {
    const double got =
        res.outputs.component(eq.output).derivative(eq.order).eval(eq.time);
    REQUIRE(got == Catch::Approx(eq.value).margin(1e-7));
  }

  // Forces clear the reserves on a much denser grid than the encoding saw.
  const std::vector<double> dense = mssopt::uniform_grid(prob.horizon(), 301);
  double min_force = std::numeric_limits<double>::infinity();
  for (const double t : dense) {
    const Eigen::Vector2d tau =
        model.linkage.trajectory_torque(prob.joint_trajectory, t);
    const Eigen::VectorXd forces = prob.config.torque_cols * tau +
                                   prob.config.output_cols *
                                       res.outputs.eval(t);
    min_force = std::min(min_force, forces.minCoeff());
  }
  REQUIRE(min_force >= 10.0 - 1e-3);

  // The constant level-300 outputs satisfy every constraint, bounding the
  // optimum from above; the optimizer should do strictly better.
  REQUIRE(res.objective <= 4 * 300.0 * prob.horizon() + 1e-6);
  REQUIRE(res.objective > 0.0);

  // The planned outputs feed the inverse chain cleanly.
  const mssopt::FlatTrajectory planned{prob.joint_trajectory, res.outputs};
  const mssopt::InverseTrace trace = mssopt::inverse_flat_on_grid(
      model, prob.config, planned,
      mssopt::uniform_grid(prob.horizon(), 31));
  REQUIRE(trace.excitation.minCoeff() >= 0.0);
  REQUIRE(trace.excitation.maxCoeff() <= 1.0);
  REQUIRE(trace.activation.minCoeff() >= mssopt::kActivationFloor);
}

TEST_CASE("outputs pinned below the requirements are infeasible") {
  const MssModel model = reference_arm();
  CocontractionProblem prob = make_reach_problem(model);
  prob.equalities.clear();
  for (int i = 0; i < 4; ++i) prob.equalities.push_back({i, 0, 0.0, 0.001});
  prob.reserves = Eigen::VectorXd::Constant(6, 200.0);
  const CocontractionResult res = mssopt::solve_cocontraction(prob);
  REQUIRE(res.status == SdpStatus::kInfeasible);
}

TEST_CASE("averaging preserves the integrated objective") {
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Poly> components;
    for (int i = 0; i < 3; ++i) {
      components.push_back(Poly(test_util::uniform_vec(6, -3.0, 3.0)));
    }
    const PolyVec v(components, 1.7);
    const PolyVec mean = mssopt::horizon_mean(v);
    const double original = mssopt::integral_over_horizon(v);
    const double averaged = mssopt::integral_over_horizon(mean);
    REQUIRE(averaged == Catch::Approx(original).margin(
                            1e-10 * std::max(1.0, std::abs(original))));
    for (int i = 0; i < 3; ++i) REQUIRE(mean.component(i).degree() == 0);
  }
  // Mean of the identity ramp is half the horizon.
  const PolyVec ramp(std::vector<Poly>{Poly({0.0, 1.0})}, 2.0);
  REQUIRE(mssopt::horizon_mean(ramp).component(0).eval(0.0) ==
          Catch::Approx(1.0));
}

TEST_CASE("terminal-rate-only planning reduces to constant levels") {
  const MssModel model = reference_arm();
  CocontractionProblem prob = make_reach_problem(model);
  prob.equalities.clear();
  for (int i = 0; i < 4; ++i) {
    prob.equalities.push_back({i, 1, prob.horizon(), 0.0});
  }
  const CocontractionResult res = mssopt::solve_cocontraction(prob);
  REQUIRE(res.status == SdpStatus::kOptimal);

  const Eigen::VectorXd levels =
      mssopt::solve_constant_levels(prob.config, res.rhs);
  const double reduced = prob.horizon() * levels.sum();
  REQUIRE(std::abs(res.objective - reduced) <=
          1e-4 * std::max(1.0, reduced));

  // The polynomial optimum is the constant one: degree >= 1 coefficients
  // vanish and the constant terms match the linear reduction.
  for (int i = 0; i < 4; ++i) {
    const Eigen::VectorXd& coeffs = res.outputs.component(i).coeffs();
    REQUIRE(coeffs.tail(coeffs.size() - 1).cwiseAbs().maxCoeff() < 1e-5);
    REQUIRE(coeffs[0] == Catch::Approx(levels[i]).margin(1e-4));
  }
}
