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

#ifndef MSSOPT_POLY_HPP_
#define MSSOPT_POLY_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"

namespace mssopt {

// Dense univariate polynomial in the monomial basis. coeffs()[k] multiplies
// t^k; the coefficient vector always holds at least one entry.
class Poly {
 public:
  Poly() = default;

  explicit Poly(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() == 0) coeffs_ = Eigen::VectorXd::Zero(1);
  }

  explicit Poly(std::initializer_list<double> coeffs)
      : Poly(Eigen::VectorXd::Map(coeffs.begin(),
                                  static_cast<Eigen::Index>(coeffs.size()))) {}

  [[nodiscard]] const Eigen::VectorXd& coeffs() const { return coeffs_; }
  [[nodiscard]] int degree() const {
    return static_cast<int>(coeffs_.size()) - 1;
  }

  // Horner evaluation.
  [[nodiscard]] double eval(double t) const {
    double acc = 0.0;
    for (Eigen::Index i = coeffs_.size() - 1; i >= 0; --i) {
      acc = acc * t + coeffs_[i];
    }
    return acc;
  }

  // Exact k-th derivative; k past the degree yields the zero polynomial.
  [[nodiscard]] Poly derivative(int k = 1) const {
    if (k < 0) throw DomainError("Poly::derivative: negative order");
    const Eigen::Index n = coeffs_.size();
    if (k >= n) return Poly(Eigen::VectorXd::Zero(1));
    Eigen::VectorXd out(n - k);
    for (Eigen::Index j = 0; j < n - k; ++j) {
      double factor = 1.0;
      for (int i = 1; i <= k; ++i) factor *= static_cast<double>(j + i);
      out[j] = coeffs_[j + k] * factor;
    }
    return Poly(std::move(out));
  }

  // Antiderivative with zero constant term.
  [[nodiscard]] Poly antiderivative() const {
    Eigen::VectorXd out(coeffs_.size() + 1);
    out[0] = 0.0;
    for (Eigen::Index j = 0; j < coeffs_.size(); ++j) {
      out[j + 1] = coeffs_[j] / static_cast<double>(j + 1);
    }
    return Poly(std::move(out));
  }

 private:
  Eigen::VectorXd coeffs_{Eigen::VectorXd::Zero(1)};
};

// Integral over [0, T]: sum_k coeffs[k] T^(k+1) / (k+1).
inline double integral_over_horizon(const Poly& p, double horizon) {
  if (!(horizon >= 0.0)) {
    throw DomainError("integral_over_horizon: horizon must be >= 0");
  }
  double acc = 0.0;
  const Eigen::VectorXd& c = p.coeffs();
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) {
    acc = acc * horizon + c[i] / static_cast<double>(i + 1);
  }
  return acc * horizon;
}

// One endpoint condition on a polynomial: d^order/dt^order p(time) = value.
struct BoundaryCondition {
  double time = 0.0;
  int order = 0;
  double value = 0.0;
};

// Fits the minimum-coefficient-norm polynomial of the given degree through
// the conditions. Throws SingularFit when the conditions over-determine the
// degree or cannot be met to 1e-9 (relative for large values).
inline Poly fit_boundary(const std::vector<BoundaryCondition>& conditions,
                         int degree) {
  if (degree < 0) throw SingularFit("fit_boundary: negative degree");
  const int n = degree + 1;
  const int m = static_cast<int>(conditions.size());
  if (m > n) {
    throw SingularFit("fit_boundary: " + std::to_string(m) +
                      " conditions for " + std::to_string(n) +
                      " coefficients");
  }
  if (m == 0) return Poly(Eigen::VectorXd::Zero(n));

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    const BoundaryCondition& bc = conditions[r];
    if (bc.order < 0 || !std::isfinite(bc.time) || !std::isfinite(bc.value)) {
      throw SingularFit("fit_boundary: malformed condition");
    }
    b[r] = bc.value;
    for (int j = bc.order; j <= degree; ++j) {
      double factor = 1.0;
      for (int i = 0; i < bc.order; ++i) factor *= static_cast<double>(j - i);
      a(r, j) = factor * std::pow(bc.time, j - bc.order);
    }
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  Eigen::VectorXd x = cod.solve(b);
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double residual = (a * x - b).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-9 * scale)) {
    throw SingularFit("fit_boundary: residual " + std::to_string(residual) +
                      " exceeds tolerance; conditions are inconsistent");
  }
  return Poly(std::move(x));
}

// Vector of polynomials sharing one horizon T > 0; component i describes
// coordinate i on [0, T].
class PolyVec {
 public:
  PolyVec() = default;

  PolyVec(std::vector<Poly> components, double horizon)
      : components_(std::move(components)), horizon_(horizon) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
      throw DomainError("PolyVec: horizon must be positive and finite");
    }
  }

  [[nodiscard]] int size() const { return static_cast<int>(components_.size()); }
  [[nodiscard]] double horizon() const { return horizon_; }
  [[nodiscard]] const Poly& component(int i) const { return components_.at(i); }
  [[nodiscard]] const std::vector<Poly>& components() const {
    return components_;
  }

  [[nodiscard]] Eigen::VectorXd eval(double t) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = components_[i].eval(t);
    return out;
  }

  [[nodiscard]] PolyVec derivative(int k = 1) const {
    std::vector<Poly> out;
    out.reserve(components_.size());
    for (const Poly& p : components_) out.push_back(p.derivative(k));
    return PolyVec(std::move(out), horizon_);
  }

 private:
  std::vector<Poly> components_;
  double horizon_ = 1.0;
};

// Sum over components of the integral over [0, T].
inline double integral_over_horizon(const PolyVec& v) {
  double acc = 0.0;
  for (const Poly& p : v.components()) {
    acc += integral_over_horizon(p, v.horizon());
  }
  return acc;
}

// Uniform grid of `points` samples covering [0, T].
inline std::vector<double> uniform_grid(double horizon, int points) {
  if (points < 2) throw DomainError("uniform_grid: need at least 2 points");
  std::vector<double> out(points);
  const double h = horizon / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) out[i] = h * i;
  out.back() = horizon;
  return out;
}

}  // namespace mssopt

#endif  // MSSOPT_POLY_HPP_
