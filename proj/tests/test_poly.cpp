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

#include "mssopt/poly.hpp"

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using mssopt::BoundaryCondition;
using mssopt::fit_boundary;
using mssopt::integral_over_horizon;
using mssopt::Poly;
using mssopt::PolyVec;

namespace {

Poly random_poly(int degree) {
  return Poly(test_util::uniform_vec(degree + 1, -1.0, 1.0));
}

}  // namespace

TEST_CASE("evaluation uses ascending coefficients") {
  CHECK(Poly({1.0, 2.0}).eval(3.0) == Catch::Approx(7.0));
  CHECK(Poly({0.0}).eval(11.5) == 0.0);
  CHECK(Poly({1.0, -2.0, 1.0}).eval(1.0) == Catch::Approx(0.0).margin(1e-15));
  // Sample a random quartic against the naive monomial sum.
  for (int rep = 0; rep < 50; ++rep) {
    Poly p = random_poly(4);
    const double t = test_util::uniform(-2.0, 2.0);
    double direct = 0.0;
    for (int k = 0; k <= 4; ++k) direct += p.coeffs()[k] * std::pow(t, k);
    CHECK(p.eval(t) == Catch::Approx(direct).margin(1e-12));
  }
}

TEST_CASE("derivatives are exact") {
  const Poly tsq({0.0, 0.0, 1.0});
  CHECK(tsq.derivative().coeffs().isApprox(Eigen::Vector2d(0.0, 2.0)));
  CHECK(tsq.derivative(0).coeffs() == tsq.coeffs());
  CHECK(Poly({1.0, 1.0, 1.0, 1.0}).derivative(4).coeffs() ==
        Eigen::VectorXd::Zero(1));

  // k-fold first derivative equals the direct k-th derivative.
  for (int rep = 0; rep < 20; ++rep) {
    Poly p = random_poly(test_util::uniform_int(3, 8));
    const int k = test_util::uniform_int(1, 3);
    Poly iterated = p;
    for (int i = 0; i < k; ++i) iterated = iterated.derivative();
    CHECK(p.derivative(k).coeffs().isApprox(iterated.coeffs(), 1e-12));
  }
}

TEST_CASE("derivative of antiderivative is the identity") {
  for (int rep = 0; rep < 20; ++rep) {
    Poly p = random_poly(test_util::uniform_int(0, 8));
    CHECK(p.antiderivative().derivative().coeffs().isApprox(p.coeffs(), 1e-14));
  }
}

TEST_CASE("integral over horizon matches quadrature") {
  CHECK(integral_over_horizon(Poly({2.0}), 3.0) == Catch::Approx(6.0));
  CHECK(integral_over_horizon(Poly({0.0, 1.0}), 2.0) == Catch::Approx(2.0));
  for (int rep = 0; rep < 30; ++rep) {
    Poly p = random_poly(test_util::uniform_int(0, 8));
    const double horizon = test_util::uniform(0.3, 1.8);
    const double reference = test_util::simpson(
        [&](double t) { return p.eval(t); }, 0.0, horizon, 2000);
    CHECK(integral_over_horizon(p, horizon) ==
          Catch::Approx(reference).margin(1e-10));
  }
}

TEST_CASE("integration is linear") {
  for (int rep = 0; rep < 20; ++rep) {
    Poly p = random_poly(5);
    Poly q = random_poly(5);
    const double alpha = test_util::uniform(-3.0, 3.0);
    const double beta = test_util::uniform(-3.0, 3.0);
    Poly combo(alpha * p.coeffs() + beta * q.coeffs());
    const double horizon = test_util::uniform(0.5, 2.0);
    CHECK(integral_over_horizon(combo, horizon) ==
          Catch::Approx(alpha * integral_over_horizon(p, horizon) +
                        beta * integral_over_horizon(q, horizon))
              .margin(1e-12));
  }
}

TEST_CASE("boundary fit reproduces the closed-form cubic") {
  const double t0 = 20.0 * M_PI / 180.0;
  const double t1 = 80.0 * M_PI / 180.0;
  const double horizon = 0.5;
  const std::vector<BoundaryCondition> conds = {
      {0.0, 0, t0}, {0.0, 1, 0.0}, {horizon, 0, t1}, {horizon, 1, 0.0}};
  Poly p = fit_boundary(conds, 3);
  const double delta = t1 - t0;
  Eigen::Vector4d expected(t0, 0.0, 3.0 * delta / (horizon * horizon),
                           -2.0 * delta / (horizon * horizon * horizon));
  CHECK(p.coeffs().isApprox(expected, 1e-9));
}

TEST_CASE("underdetermined fits satisfy all conditions") {
  // Eight rest-to-rest conditions on a degree-8 polynomial leave one free
  // coefficient; the minimum-norm solution must still hit every condition.
  const double horizon = 3.0;
  std::vector<BoundaryCondition> conds;
  conds.push_back({0.0, 0, 0.1});
  conds.push_back({0.0, 1, 0.01});
  conds.push_back({0.0, 2, -0.2});
  conds.push_back({0.0, 3, 0.05});
  conds.push_back({horizon, 0, 1.4});
  conds.push_back({horizon, 1, 0.0});
  conds.push_back({horizon, 2, 0.0});
  conds.push_back({horizon, 3, 0.0});
  Poly p = fit_boundary(conds, 8);
  for (const BoundaryCondition& bc : conds) {
    CHECK(p.derivative(bc.order).eval(bc.time) ==
          Catch::Approx(bc.value).margin(1e-9));
  }
}

TEST_CASE("single condition with degree zero") {
  Poly p = fit_boundary({{0.0, 0, 4.5}}, 0);
  CHECK(p.coeffs()[0] == Catch::Approx(4.5));
}

TEST_CASE("inconsistent or over-determined conditions are rejected") {
  CHECK_THROWS_AS(fit_boundary({{0.0, 0, 1.0}, {0.0, 0, 2.0}}, 3),
                  mssopt::SingularFit);
  CHECK_THROWS_AS(
      fit_boundary({{0.0, 0, 1.0}, {0.0, 1, 0.0}, {1.0, 0, 2.0}}, 1),
      mssopt::SingularFit);
}

TEST_CASE("random well-posed fits stay within tolerance") {
  for (int rep = 0; rep < 1000; ++rep) {
    const int degree = test_util::uniform_int(2, 8);
    const double horizon = test_util::uniform(0.4, 3.0);
    // Contiguous derivative orders at each endpoint keep the system
    // nonsingular (Hermite interpolation conditions).
    const int max_conds = degree + 1;
    const int at_start = test_util::uniform_int(1, max_conds - 1);
    const int at_end = test_util::uniform_int(1, max_conds - at_start);
    std::vector<BoundaryCondition> conds;
    for (int k = 0; k < at_start; ++k) {
      conds.push_back({0.0, k, test_util::uniform(-2.0, 2.0)});
    }
    for (int k = 0; k < at_end; ++k) {
      conds.push_back({horizon, k, test_util::uniform(-2.0, 2.0)});
    }
    Poly p = fit_boundary(conds, degree);
    for (const BoundaryCondition& bc : conds) {
      REQUIRE(p.derivative(bc.order).eval(bc.time) ==
              Catch::Approx(bc.value).margin(1e-9));
    }
  }
}

TEST_CASE("polynomial vectors share a positive horizon") {
  PolyVec v({Poly({1.0, 1.0}), Poly({0.0, 0.0, 2.0})}, 2.0);
  CHECK(v.size() == 2);
  CHECK(v.eval(1.0).isApprox(Eigen::Vector2d(2.0, 2.0)));
  CHECK(v.derivative().eval(1.0).isApprox(Eigen::Vector2d(1.0, 4.0)));
  CHECK(integral_over_horizon(v) ==
        Catch::Approx(integral_over_horizon(v.component(0), 2.0) +
                      integral_over_horizon(v.component(1), 2.0)));
  CHECK_THROWS_AS(PolyVec({Poly({1.0})}, 0.0), mssopt::DomainError);
  CHECK_THROWS_AS(PolyVec({Poly({1.0})}, -1.0), mssopt::DomainError);
}

TEST_CASE("uniform grid covers the horizon") {
  const std::vector<double> g = mssopt::uniform_grid(3.0, 31);
  CHECK(g.size() == 31);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 3.0);
  CHECK(g[1] == Catch::Approx(0.1));
}
