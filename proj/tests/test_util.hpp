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

#ifndef MSSOPT_TESTS_TEST_UTIL_HPP_
#define MSSOPT_TESTS_TEST_UTIL_HPP_

#include <functional>
#include <random>

#include <Eigen/Dense>

namespace test_util {

// Deterministic RNG so expected values stay frozen across runs.
inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed1234u);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline int uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng());
}

inline Eigen::VectorXd uniform_vec(int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

// Composite Simpson quadrature on [a, b]; `intervals` is rounded up to even.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    acc += f(a + h * i) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return acc * h / 3.0;
}

// Central difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double t,
                           double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace test_util

#endif  // MSSOPT_TESTS_TEST_UTIL_HPP_
