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

#include "mssopt/sdp.hpp"

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mssopt/lp.hpp"
#include "mssopt/sos.hpp"
#include "test_util.hpp"

using Catch::Approx;
using mssopt::AffinePoly;
using mssopt::SdpBuilder;
using mssopt::SdpResult;
using mssopt::SdpStatus;
using mssopt::SdpTerm;
using mssopt::solve_sdp;

TEST_CASE("fixed quadratic has its unique Gram matrix") {
  // (t - 1)^2 = 1 - 2t + t^2 admits exactly one Gram matrix; the feasible
  // set is a single point with a zero eigenvalue, so this also exercises
  // the no-interior fallback.
  SdpBuilder builder(0);
  AffinePoly p;
  p.constant = Eigen::VectorXd(3);
  p.constant << 1.0, -2.0, 1.0;
  const int blk = builder.add_sos(p);
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  const Eigen::MatrixXd& g = res.blocks[blk];
  CHECK(g(0, 0) == Approx(1.0).margin(1e-5));
  CHECK(g(0, 1) == Approx(-1.0).margin(1e-5));
  CHECK(g(1, 0) == Approx(-1.0).margin(1e-5));
  CHECK(g(1, 1) == Approx(1.0).margin(1e-5));
  CHECK(res.min_block_eigenvalue >= -1e-7);
  const Eigen::VectorXd rec = mssopt::gram_poly_coeffs(g);
  CHECK((rec - p.constant).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("best constant lower bound on a quadratic") {
  // max lambda with t^2 - 2t + 0.5 - lambda a sum of squares. The global
  // minimum of the quadratic sits at t = 1 with value -0.5.
  SdpBuilder builder(1);
  AffinePoly p;
  p.constant = Eigen::VectorXd(3);
  p.constant << 0.5, -2.0, 1.0;
  p.linear = Eigen::MatrixXd::Zero(3, 1);
  p.linear(0, 0) = -1.0;
  builder.add_sos(p);
  Eigen::VectorXd obj(1);
  obj << -1.0;  // maximize lambda
  builder.set_scalar_objective(obj);
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  CHECK(res.scalars[0] == Approx(-0.5).margin(1e-6));
  CHECK(res.min_block_eigenvalue >= -1e-7);
}

TEST_CASE("best constant lower bound on a quartic") {
  // q(t) = t^4 + 2t^3 + 3t^2 has q'(t) = 2t(2t^2 + 3t + 3); the quadratic
  // factor has negative discriminant, so t = 0 is the only critical point
  // and the global minimum value is 0.
  SdpBuilder builder(1);
  AffinePoly p;
  p.constant = Eigen::VectorXd(5);
  p.constant << 0.0, 0.0, 3.0, 2.0, 1.0;
  p.linear = Eigen::MatrixXd::Zero(5, 1);
  p.linear(0, 0) = -1.0;
  builder.add_sos(p);
  Eigen::VectorXd obj(1);
  obj << -1.0;
  builder.set_scalar_objective(obj);
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  CHECK(res.scalars[0] == Approx(0.0).margin(1e-6));
}

TEST_CASE("strictly positive quartic has an interior Gram point") {
  SdpBuilder builder(0);
  AffinePoly p;
  p.constant = Eigen::VectorXd(5);
  p.constant << 1.0, 0.0, 0.0, 0.0, 1.0;  // t^4 + 1
  const int blk = builder.add_sos(p);
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  CHECK_FALSE(res.marginal);
  CHECK(res.min_block_eigenvalue >= -1e-8);
  const Eigen::VectorXd rec = mssopt::gram_poly_coeffs(res.blocks[blk]);
  CHECK((rec - p.constant).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("trace minimization with a pinned corner") {
  // min tr(X) over 2x2 PSD X with X11 = 1: the optimum drops the free
  // diagonal entry to zero.
  SdpBuilder builder(0);
  const int blk = builder.add_block(2);
  Eigen::MatrixXd corner = Eigen::MatrixXd::Zero(2, 2);
  corner(0, 0) = 1.0;
  builder.add_equality(Eigen::VectorXd(), {{blk, corner}}, 1.0);
  builder.add_matrix_objective(blk, Eigen::MatrixXd::Identity(2, 2));
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  CHECK(res.objective == Approx(1.0).margin(1e-6));
  CHECK(res.blocks[blk](0, 0) == Approx(1.0).margin(1e-6));
  CHECK(std::abs(res.blocks[blk](1, 1)) <= 1e-5);
}

TEST_CASE("scalar coupling with a closed-form optimum") {
  // X = [[s1, 0.3], [0.3, s2]] with s2 = 1; minimizing s1 over PSD X
  // gives the Schur-complement bound s1 = 0.09.
  SdpBuilder builder(2);
  const int blk = builder.add_block(2);
  Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(2, 2);
  e11(0, 0) = 1.0;
  Eigen::MatrixXd e22 = Eigen::MatrixXd::Zero(2, 2);
  e22(1, 1) = 1.0;
  Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(2, 2);
  e12(0, 1) = 0.5;
  e12(1, 0) = 0.5;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(2);
  s1[0] = -1.0;
  Eigen::VectorXd s2 = Eigen::VectorXd::Zero(2);
  s2[1] = -1.0;
  builder.add_equality(s1, {{blk, e11}}, 0.0);   // X11 = s1
  builder.add_equality(s2, {{blk, e22}}, 0.0);   // X22 = s2
  builder.add_equality(Eigen::VectorXd(), {{blk, e12}}, 0.3);  // X12 = 0.3
  Eigen::VectorXd pin = Eigen::VectorXd::Zero(2);
  pin[1] = 1.0;
  builder.add_scalar_equality(pin, 1.0);  // s2 = 1
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(2);
  obj[0] = 1.0;
  builder.set_scalar_objective(obj);
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  CHECK(res.scalars[0] == Approx(0.09).margin(1e-6));
  CHECK(res.scalars[1] == Approx(1.0).margin(1e-9));
}

TEST_CASE("diagonal-block programs agree with the simplex solver") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = test_util::uniform_int(2, 4);
    const int m = test_util::uniform_int(2, 6);
    mssopt::LinearProgram lp;
    lp.g = test_util::uniform_vec(n * m, -1.0, 1.0).reshaped(m, n).eval();
    const Eigen::VectorXd x0 = test_util::uniform_vec(n, 0.0, 1.0);
    lp.h = lp.g * x0 - test_util::uniform_vec(m, 0.1, 0.6);
    lp.c = test_util::uniform_vec(n, 0.05, 1.0);
    const mssopt::LpResult lp_res = mssopt::solve_lp(lp);
    REQUIRE(lp_res.status == mssopt::LpStatus::kOptimal);

    // Same polytope as 1x1 blocks: X_r = g_r . u - h_r and X_bound = u_j.
    SdpBuilder builder(n);
    const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    for (int r = 0; r < m; ++r) {
      const int blk = builder.add_block(1);
      builder.add_equality(-lp.g.row(r).transpose(), {{blk, one}},
                           -lp.h[r]);
    }
    for (int j = 0; j < n; ++j) {
      const int blk = builder.add_block(1);
      Eigen::VectorXd coeff = Eigen::VectorXd::Zero(n);
      coeff[j] = -1.0;
      builder.add_equality(coeff, {{blk, one}}, 0.0);
    }
    builder.set_scalar_objective(lp.c);
    const SdpResult res = solve_sdp(builder.program());
    REQUIRE(res.status == SdpStatus::kOptimal);
    CHECK(res.objective ==
          Approx(lp_res.objective)
              .margin(1e-6 * (1.0 + std::abs(lp_res.objective))));
  }
}

TEST_CASE("complementarity shrinks along the iteration") {
  SdpBuilder builder(0);
  AffinePoly p;
  p.constant = Eigen::VectorXd(5);
  p.constant << 2.0, -1.0, 3.0, 0.5, 2.0;
  builder.add_sos(p);
  const SdpResult res = solve_sdp(builder.program());
  REQUIRE(res.status == SdpStatus::kOptimal);
  REQUIRE(res.mu_trace.size() >= 2);
  for (double mu : res.mu_trace) CHECK(mu > 0.0);
  CHECK(res.mu_trace.back() <= 1e-6 * (1.0 + res.mu_trace.front()));
  CHECK(res.gap <= 1e-7);
}

TEST_CASE("negative-definite coefficient pattern is infeasible") {
  SECTION("fully pinned") {
    SdpBuilder builder(0);
    AffinePoly p;
    p.constant = Eigen::VectorXd(3);
    p.constant << -1.0, 0.0, -1.0;  // -1 - t^2
    builder.add_sos(p);
    CHECK(solve_sdp(builder.program()).status == SdpStatus::kInfeasible);
  }
  SECTION("free direction cannot rescue a negative corner") {
    SdpBuilder builder(1);
    AffinePoly p;
    p.constant = Eigen::VectorXd(3);
    p.constant << -1.0, 0.0, 1.0;  // -1 + s t + t^2
    p.linear = Eigen::MatrixXd::Zero(3, 1);
    p.linear(1, 0) = 1.0;
    builder.add_sos(p);
    CHECK(solve_sdp(builder.program()).status == SdpStatus::kInfeasible);
  }
}

TEST_CASE("inconsistent equalities are rejected in presolve") {
  SdpBuilder builder(0);
  const int blk = builder.add_block(1);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  builder.add_equality(Eigen::VectorXd(), {{blk, one}}, 1.0);
  builder.add_equality(Eigen::VectorXd(), {{blk, one}}, 2.0);
  const SdpResult res = solve_sdp(builder.program());
  CHECK(res.status == SdpStatus::kInfeasible);
  CHECK(res.note.find("inconsistent") != std::string::npos);
}

TEST_CASE("fully pinned blocks reduce to an eigenvalue check") {
  SdpBuilder builder(0);
  const int blk = builder.add_block(2);
  Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(2, 2);
  e11(0, 0) = 1.0;
  Eigen::MatrixXd e22 = Eigen::MatrixXd::Zero(2, 2);
  e22(1, 1) = 1.0;
  Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(2, 2);
  e12(0, 1) = 0.5;
  e12(1, 0) = 0.5;
  SECTION("positive definite values pass") {
    builder.add_equality(Eigen::VectorXd(), {{blk, e11}}, 1.0);
    builder.add_equality(Eigen::VectorXd(), {{blk, e22}}, 2.0);
    builder.add_equality(Eigen::VectorXd(), {{blk, e12}}, 0.5);
    const SdpResult res = solve_sdp(builder.program());
    REQUIRE(res.status == SdpStatus::kOptimal);
    CHECK(res.blocks[blk](0, 0) == Approx(1.0).margin(1e-9));
    CHECK(res.blocks[blk](1, 1) == Approx(2.0).margin(1e-9));
    CHECK(res.blocks[blk](0, 1) == Approx(0.5).margin(1e-9));
  }
  SECTION("indefinite values fail") {
    builder.add_equality(Eigen::VectorXd(), {{blk, e11}}, 1.0);
    builder.add_equality(Eigen::VectorXd(), {{blk, e22}}, 1.0);
    builder.add_equality(Eigen::VectorXd(), {{blk, e12}}, 2.0);
    CHECK(solve_sdp(builder.program()).status == SdpStatus::kInfeasible);
  }
}

TEST_CASE("degree-zero squares") {
  SdpBuilder ok(0);
  AffinePoly p;
  p.constant = Eigen::VectorXd::Constant(1, 5.0);
  ok.add_sos(p);
  CHECK(solve_sdp(ok.program()).status == SdpStatus::kOptimal);

  SdpBuilder bad(0);
  p.constant = Eigen::VectorXd::Constant(1, -5.0);
  bad.add_sos(p);
  CHECK(solve_sdp(bad.program()).status == SdpStatus::kInfeasible);
}

TEST_CASE("odd-degree polynomials are rejected by the builder") {
  SdpBuilder builder(0);
  AffinePoly p;
  p.constant = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(builder.add_sos(p), mssopt::OddDegree);
  p.constant = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(builder.add_sos(p), mssopt::OddDegree);
  p.constant = Eigen::VectorXd();
  CHECK_THROWS_AS(builder.add_sos(p), mssopt::MssError);
  CHECK_THROWS_AS(builder.add_block(0), mssopt::MssError);
}

TEST_CASE("cost on a fully free scalar is flagged, zero cost is fine") {
  SECTION("nonzero cost cannot be bounded") {
    SdpBuilder builder(1);
    Eigen::VectorXd obj(1);
    obj << 1.0;
    builder.set_scalar_objective(obj);
    const SdpResult res = solve_sdp(builder.program());
    CHECK(res.status == SdpStatus::kNumericalFailure);
    CHECK(res.note.find("unbounded") != std::string::npos);
  }
  SECTION("zero cost pins the free scalar at the least-norm value") {
    SdpBuilder builder(1);
    const SdpResult res = solve_sdp(builder.program());
    REQUIRE(res.status == SdpStatus::kOptimal);
    CHECK(res.scalars[0] == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("random Gram-generated quartics round-trip") {
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd root =
        test_util::uniform_vec(9, -1.0, 1.0).reshaped(3, 3).eval();
    Eigen::MatrixXd g0 =
        root * root.transpose() + 0.05 * Eigen::MatrixXd::Identity(3, 3);
    AffinePoly p;
    p.constant = mssopt::gram_poly_coeffs(g0);
    SdpBuilder builder(0);
    const int blk = builder.add_sos(p);
    const SdpResult res = solve_sdp(builder.program());
    REQUIRE(res.status == SdpStatus::kOptimal);
    CHECK(res.min_block_eigenvalue >= -1e-8);
    const Eigen::VectorXd rec = mssopt::gram_poly_coeffs(res.blocks[blk]);
    CHECK((rec - p.constant).cwiseAbs().maxCoeff() <=
          1e-7 * (1.0 + p.constant.cwiseAbs().maxCoeff()));
    CHECK(res.max_equality_violation <= 1e-8);
  }
}
