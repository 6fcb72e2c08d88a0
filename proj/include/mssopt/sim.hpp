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

#ifndef MSSOPT_SIM_HPP_
#define MSSOPT_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mssopt/errors.hpp"
#include "mssopt/flatness.hpp"
#include "mssopt/linkage.hpp"
#include "mssopt/model.hpp"
#include "mssopt/muscle.hpp"

namespace mssopt {

// Full state of the muscle-driven system: joint coordinates and rates,
// tendon lengths, and muscle activations.
struct MssState {
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Vector2d q_dot = Eigen::Vector2d::Zero();
  Eigen::VectorXd tendon_lengths;
  Eigen::VectorXd activation;

  [[nodiscard]] int muscle_count() const {
    return static_cast<int>(tendon_lengths.size());
  }

  [[nodiscard]] Eigen::VectorXd pack() const {
    const int m = muscle_count();
    Eigen::VectorXd v(4 + 2 * m);
    v.head<2>() = q;
    v.segment<2>(2) = q_dot;
    v.segment(4, m) = tendon_lengths;
    v.segment(4 + m, m) = activation;
    return v;
  }

  static MssState unpack(const Eigen::VectorXd& v, int muscles) {
    if (v.size() != 4 + 2 * muscles) {
      throw DomainError("MssState: packed vector has " +
                        std::to_string(v.size()) + " entries; expected " +
                        std::to_string(4 + 2 * muscles));
    }
    MssState x;
    x.q = v.head<2>();
    x.q_dot = v.segment<2>(2);
    x.tendon_lengths = v.segment(4, muscles);
    x.activation = v.segment(4 + muscles, muscles);
    return x;
  }

  void validate(const MssModel& model) const {
    const int m = model.muscle_count();
    if (tendon_lengths.size() != m || activation.size() != m) {
      throw DomainError("MssState: muscle-indexed fields have sizes " +
                        std::to_string(tendon_lengths.size()) + " and " +
                        std::to_string(activation.size()) + "; expected " +
                        std::to_string(m));
    }
    for (int j = 0; j < m; ++j) {
      if (!(activation[j] >= 0.0) || !(activation[j] <= 1.0)) {
        throw DomainError("MssState: activation of muscle " +
                          std::to_string(j + 1) + " is " +
                          std::to_string(activation[j]) +
                          "; must lie in [0, 1]");
      }
    }
  }
};

// Time derivative of an MssState, kept with named fields so each dynamic
// equation can be inspected on its own.
struct MssRates {
  Eigen::Vector2d q_dot = Eigen::Vector2d::Zero();
  Eigen::Vector2d q_ddot = Eigen::Vector2d::Zero();
  Eigen::VectorXd tendon_rates;
  Eigen::VectorXd activation_rates;

  [[nodiscard]] Eigen::VectorXd pack() const {
    const int m = static_cast<int>(tendon_rates.size());
    Eigen::VectorXd v(4 + 2 * m);
    v.head<2>() = q_dot;
    v.segment<2>(2) = q_ddot;
    v.segment(4, m) = tendon_rates;
    v.segment(4 + m, m) = activation_rates;
    return v;
  }
};

// Adapts a single-time inverse-chain evaluation to an integrable state.
inline MssState state_from_inverse(const InversePoint& pt) {
  MssState x;
  x.q = pt.q;
  x.q_dot = pt.q_dot;
  x.tendon_lengths = pt.tendon_lengths;
  x.activation = pt.activation;
  return x;
}

namespace sim_detail {

inline std::string snapshot(const MssState& x, int j) {
  std::ostringstream os;
  os << "q=[" << x.q[0] << ", " << x.q[1] << "], q_dot=[" << x.q_dot[0]
     << ", " << x.q_dot[1] << "], tendon length " << x.tendon_lengths[j]
     << ", activation " << x.activation[j];
  return os.str();
}

}  // namespace sim_detail

// State derivative of the muscle-driven system under neural inputs n:
//   q_ddot = M(q)^-1 (A Phi_S(L_S) - C(q, q_dot) q_dot - g(q))
//   L_dot_S = u - A^T q_dot, with u the contractile shortening rate
//             recovered from the force balance across the tendon
//   a_dot_j = sigma_j(n_j) (n_j - a_j)
// Throws DomainError (with muscle index and a state snapshot) when the
// force-velocity factor of any muscle leaves its invertible range.
inline MssRates mss_derivative(const MssModel& model, const MssState& x,
                               const Eigen::VectorXd& neural) {
  const int m = model.muscle_count();
  x.validate(model);
  if (neural.size() != m) {
    throw DomainError("mss_derivative: neural input has " +
                      std::to_string(neural.size()) + " entries; expected " +
                      std::to_string(m));
  }

  const Eigen::VectorXd path = model.linkage.muscle_lengths(x.q);
  const Eigen::VectorXd arm_rates =
      model.linkage.moment_arms.transpose() * x.q_dot;

  MssRates d;
  d.q_dot = x.q_dot;
  d.tendon_rates.resize(m);
  d.activation_rates.resize(m);
  Eigen::VectorXd forces(m);
  for (int j = 0; j < m; ++j) {
    const MuscleParams& p = model.muscles[j];
    try {
      forces[j] = tendon_force(p, x.tendon_lengths[j]);
      const double z =
          z_value(p, x.tendon_lengths[j], path[j], x.activation[j]);
      if (!(z > 0.0) || !(z < p.z_max)) {
        throw DomainError("force-velocity factor " + std::to_string(z) +
                          " outside (0, " + std::to_string(p.z_max) + ")");
      }
      const double u = force_velocity_inv(p, z);
      d.tendon_rates[j] = u - arm_rates[j];
      d.activation_rates[j] =
          activation_rate(p, neural[j], x.activation[j]);
    } catch (const ZeroActivation& e) {
      throw ZeroActivation("mss_derivative: muscle " + std::to_string(j + 1) +
                           ": " + e.what() + "; " +
                           sim_detail::snapshot(x, j));
    } catch (const DomainError& e) {
      throw DomainError("mss_derivative: muscle " + std::to_string(j + 1) +
                        ": " + e.what() + "; " + sim_detail::snapshot(x, j));
    }
  }

  const Eigen::Vector2d torque = model.linkage.muscle_torque(forces);
  const Eigen::Vector2d bias =
      model.linkage.coriolis_matrix(x.q, x.q_dot) * x.q_dot +
      model.linkage.gravity_torque(x.q);
  d.q_ddot = model.linkage.mass_matrix(x.q).llt().solve(torque - bias);
  return d;
}

// Neural input trajectory defined on a time grid. Between grid points the
// levels are linearly interpolated by default; with zero_order_hold set,
// each column is held constant until the next grid time. Outside the grid
// the nearest endpoint column applies.
struct NeuralInput {
  std::vector<double> times;
  Eigen::MatrixXd values;  // muscles x grid
  bool zero_order_hold = false;

  void validate(int muscles) const {
    const int k = static_cast<int>(times.size());
    if (k < 1) throw DomainError("NeuralInput: empty time grid");
    if (values.rows() != muscles || values.cols() != k) {
      throw DomainError("NeuralInput: values are " +
                        std::to_string(values.rows()) + "x" +
                        std::to_string(values.cols()) + "; expected " +
                        std::to_string(muscles) + "x" + std::to_string(k));
    }
    for (int i = 1; i < k; ++i) {
      if (!(times[i] > times[i - 1])) {
        throw DomainError("NeuralInput: times must increase strictly");
      }
    }
    if (values.minCoeff() < 0.0 || values.maxCoeff() > 1.0) {
      throw DomainError("NeuralInput: levels must lie in [0, 1]");
    }
  }

  [[nodiscard]] Eigen::VectorXd eval(double t) const {
    const int k = static_cast<int>(times.size());
    if (t <= times.front()) return values.col(0);
    if (t >= times.back()) return values.col(k - 1);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const int hi = static_cast<int>(it - times.begin());
    const int lo = hi - 1;
    if (zero_order_hold) return values.col(lo);
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * values.col(lo) + w * values.col(hi);
  }

  static NeuralInput constant(const Eigen::VectorXd& levels, double t0,
                              double t1) {
    NeuralInput n;
    n.times = {t0, t1};
    n.values.resize(levels.size(), 2);
    n.values.col(0) = levels;
    n.values.col(1) = levels;
    return n;
  }

  static NeuralInput from_plan(const InverseTrace& trace,
                               bool zero_order_hold = false) {
    NeuralInput n;
    n.times.assign(trace.times.begin(), trace.times.end());
    n.values = trace.excitation;
    n.zero_order_hold = zero_order_hold;
    return n;
  }
};

// Sampled trajectory of a forward integration. Rows of the matrix fields
// are muscles (or outputs); columns follow the sampled times.
struct SimTrace {
  std::vector<double> times;
  std::vector<MssState> states;
  Eigen::MatrixXd outputs;  // outputs x samples
  Eigen::MatrixXd neural;   // muscles x samples
  Eigen::MatrixXd forces;   // muscles x samples

  [[nodiscard]] int sample_count() const {
    return static_cast<int>(times.size());
  }

  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

enum class SimStatus { kComplete, kDomainFailure, kStepFailure };

[[nodiscard]] inline const char* to_string(SimStatus s) {
  switch (s) {
    case SimStatus::kComplete: return "complete";
    case SimStatus::kDomainFailure: return "domain failure";
    case SimStatus::kStepFailure: return "step failure";
  }
  return "unknown";
}

// Outcome of integrate_partial: the trace that was produced, and on failure
// the diagnostic message plus the last time the state was still valid, so a
// caller can inspect how far the run got instead of losing it.
struct SimResult {
  SimTrace trace;
  SimStatus status = SimStatus::kComplete;
  std::string message;
  double failure_time = 0.0;
};

struct IntegrateOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double fixed_step = 0.0;  // > 0 disables adaptive error control
  double max_step = std::numeric_limits<double>::infinity();
  int max_steps = 1000000;
};

namespace sim_detail {

// Dormand-Prince embedded 4(5) pair. One trial step from (t, y) of size h:
// fills the fifth-order solution, the embedded error estimate, and the
// first-same-as-last stage for reuse. k1 must hold f(t, y) on entry.
template <typename F>
void dp45_step(const F& f, double t, const Eigen::VectorXd& y, double h,
               const Eigen::VectorXd& k1, Eigen::VectorXd* y5,
               Eigen::VectorXd* error, Eigen::VectorXd* k_last) {
  const Eigen::VectorXd k2 = f(t + h / 5.0, y + h * (k1 / 5.0));
  const Eigen::VectorXd k3 =
      f(t + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
  const Eigen::VectorXd k4 =
      f(t + 4.0 * h / 5.0,
        y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
  const Eigen::VectorXd k5 =
      f(t + 8.0 * h / 9.0,
        y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
  const Eigen::VectorXd k6 =
      f(t + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                        46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                        5103.0 / 18656.0 * k5));
  *y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                 11.0 / 84.0 * k6);
  *k_last = f(t + h, *y5);
  // Difference of the fifth- and fourth-order solutions.
  *error = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 +
                (500.0 / 1113.0 - 7571.0 / 16695.0) * k3 +
                (125.0 / 192.0 - 393.0 / 640.0) * k4 +
                (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5 +
                (11.0 / 84.0 - 187.0 / 2100.0) * k6 -
                1.0 / 40.0 * (*k_last));
}

inline double error_norm(const Eigen::VectorXd& error,
                         const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& y1, double rtol,
                         double atol) {
  double sum = 0.0;
  for (int i = 0; i < error.size(); ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = error[i] / scale;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(error.size()));
}

}  // namespace sim_detail

// Integrates the muscle-driven dynamics from x0 under the given neural
// input, sampling the state at every requested time. sample_times must
// increase strictly; the first entry is the initial time. The stepper is an
// adaptive Dormand-Prince 4(5) pair that always lands exactly on requested
// sample times and on neural-input grid times (the vector field is only
// piecewise smooth across input grid points, so steps never straddle them).
// Failures do not discard the run: the result carries the trace up to the
// last valid sample together with the diagnostic.
inline SimResult integrate_partial(const MssModel& model, const MssState& x0,
                                   const NeuralInput& input,
                                   const std::vector<double>& sample_times,
                                   const IntegrateOptions& options = {}) {
  const int m = model.muscle_count();
  x0.validate(model);
  input.validate(m);
  if (sample_times.size() < 2) {
    throw DomainError("integrate: need at least two sample times");
  }
  for (std::size_t i = 1; i < sample_times.size(); ++i) {
    if (!(sample_times[i] > sample_times[i - 1])) {
      throw DomainError("integrate: sample times must increase strictly");
    }
  }
  if (!(options.rtol > 0.0) || !(options.atol > 0.0)) {
    throw DomainError("integrate: tolerances must be positive");
  }
  if (!(options.fixed_step >= 0.0)) {
    throw DomainError("integrate: fixed_step must be non-negative");
  }

  const double t_begin = sample_times.front();
  const double t_end = sample_times.back();

  // Times the stepper must land on: every sample, plus every input grid
  // point interior to the span.
  std::set<double> stops(sample_times.begin(), sample_times.end());
  for (const double t : input.times) {
    if (t > t_begin && t < t_end) stops.insert(t);
  }

  SimResult result;
  const int max_samples = static_cast<int>(sample_times.size());
  result.trace.forces.resize(m, max_samples);
  result.trace.neural.resize(m, max_samples);
  result.trace.outputs.resize(model.output_count(), max_samples);
  const auto record = [&](double t, const MssState& x) {
    const int k = result.trace.sample_count();
    result.trace.times.push_back(t);
    result.trace.states.push_back(x);
    Eigen::VectorXd forces(m);
    for (int j = 0; j < m; ++j) {
      forces[j] = tendon_force(model.muscles[j], x.tendon_lengths[j]);
    }
    result.trace.forces.col(k) = forces;
    result.trace.neural.col(k) = input.eval(t);
    result.trace.outputs.col(k) = model.output_mix * forces;
  };
  const auto finish = [&]() {
    const int k = result.trace.sample_count();
    result.trace.forces.conservativeResize(m, k);
    result.trace.neural.conservativeResize(m, k);
    result.trace.outputs.conservativeResize(model.output_count(), k);
    return std::move(result);
  };

  const auto f = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return mss_derivative(model, MssState::unpack(y, m), input.eval(t))
        .pack();
  };

  double t = t_begin;
  Eigen::VectorXd y = x0.pack();
  std::size_t next_sample = 0;
  if (sample_times[0] == t) {
    record(t, x0);
    next_sample = 1;
  }

  const bool fixed = options.fixed_step > 0.0;
  double h = fixed ? options.fixed_step
                   : std::min({1e-3, options.max_step, t_end - t_begin});
  const double h_floor = 1e-13 * std::max(1.0, std::abs(t_end));

  Eigen::VectorXd k1;
  try {
    k1 = f(t, y);
  } catch (const MssError& e) {
    result.status = SimStatus::kDomainFailure;
    result.message = e.what();
    result.failure_time = t;
    return finish();
  }

  auto stop_it = stops.upper_bound(t);
  int steps = 0;
  while (t < t_end) {
    if (++steps > options.max_steps) {
      result.status = SimStatus::kStepFailure;
      result.message = "integrate: exceeded " +
                       std::to_string(options.max_steps) +
                       " steps at time " + std::to_string(t);
      result.failure_time = t;
      return finish();
    }
    const double t_stop = (stop_it == stops.end()) ? t_end : *stop_it;
    double h_try = std::min({h, options.max_step, t_stop - t});

    Eigen::VectorXd y5, error, k_last;
    bool domain_hit = false;
    std::string domain_message;
    double err = 0.0;
    try {
      sim_detail::dp45_step(f, t, y, h_try, k1, &y5, &error, &k_last);
      err = fixed ? 0.0
                  : sim_detail::error_norm(error, y, y5, options.rtol,
                                           options.atol);
    } catch (const MssError& e) {
      domain_hit = true;
      domain_message = e.what();
    }

    if (domain_hit || (!fixed && err > 1.0)) {
      if (fixed || h_try <= h_floor) {
        result.status = domain_hit ? SimStatus::kDomainFailure
                                   : SimStatus::kStepFailure;
        result.message =
            domain_hit ? domain_message
                       : "integrate: step size underflow at time " +
                             std::to_string(t);
        result.failure_time = t;
        return finish();
      }
      // Rejected: shrink and retry from the same point.
      h = domain_hit
              ? 0.5 * h_try
              : h_try * std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    // Accepted.
    const double t_new = t + h_try;
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= t_new + h_floor) {
      // Samples are stop points, so an accepted step can only land on one.
      record(sample_times[next_sample], MssState::unpack(y5, m));
      ++next_sample;
    }
    t = t_new;
    y = std::move(y5);
    k1 = std::move(k_last);
    while (stop_it != stops.end() && *stop_it <= t + h_floor) ++stop_it;
    if (!fixed) {
      const double grow =
          (err == 0.0) ? 5.0
                       : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h = std::min(h_try * grow, options.max_step);
    }
  }
  return finish();
}

// Throwing form of integrate_partial: returns the full trace on success and
// raises the failure as an exception otherwise.
inline SimTrace integrate(const MssModel& model, const MssState& x0,
                          const NeuralInput& input,
                          const std::vector<double>& sample_times,
                          const IntegrateOptions& options = {}) {
  SimResult result =
      integrate_partial(model, x0, input, sample_times, options);
  switch (result.status) {
    case SimStatus::kComplete:
      return std::move(result.trace);
    case SimStatus::kDomainFailure:
      throw DomainError(result.message);
    case SimStatus::kStepFailure:
      throw StepFailure(result.message);
  }
  throw MssError("integrate: unknown status");
}

inline std::string SimTrace::to_csv() const {
  const int k = sample_count();
  const int m = k > 0 ? states.front().muscle_count()
                      : static_cast<int>(neural.rows());
  const int p = static_cast<int>(outputs.rows());
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < 2; ++i) os << ",q" << i + 1;
  for (int i = 0; i < 2; ++i) os << ",qd" << i + 1;
  for (int j = 0; j < m; ++j) os << ",LS" << j + 1;
  for (int j = 0; j < m; ++j) os << ",a" << j + 1;
  for (int j = 0; j < m; ++j) os << ",n" << j + 1;
  for (int j = 0; j < m; ++j) os << ",FT" << j + 1;
  for (int i = 0; i < p; ++i) os << ",Y" << i + 1;
  os << "\n";
  const auto cell = [&os](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    os << buf;
  };
  for (int s = 0; s < k; ++s) {
    char head[32];
    std::snprintf(head, sizeof(head), "%.17g", times[s]);
    os << head;
    for (int i = 0; i < 2; ++i) cell(states[s].q[i]);
    for (int i = 0; i < 2; ++i) cell(states[s].q_dot[i]);
    for (int j = 0; j < m; ++j) cell(states[s].tendon_lengths[j]);
    for (int j = 0; j < m; ++j) cell(states[s].activation[j]);
    for (int j = 0; j < m; ++j) cell(neural(j, s));
    for (int j = 0; j < m; ++j) cell(forces(j, s));
    for (int i = 0; i < p; ++i) cell(outputs(i, s));
    os << "\n";
  }
  return os.str();
}

inline nlohmann::json SimTrace::to_json() const {
  const auto matrix = [](const Eigen::MatrixXd& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < a.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  const int k = sample_count();
  const int m = k > 0 ? states.front().muscle_count() : 0;
  Eigen::MatrixXd q(2, k), q_dot(2, k), tendon(m, k), act(m, k);
  for (int s = 0; s < k; ++s) {
    q.col(s) = states[s].q;
    q_dot.col(s) = states[s].q_dot;
    tendon.col(s) = states[s].tendon_lengths;
    act.col(s) = states[s].activation;
  }
  nlohmann::json j;
  j["times"] = times;
  j["q"] = matrix(q);
  j["q_dot"] = matrix(q_dot);
  j["tendon_lengths"] = matrix(tendon);
  j["activation"] = matrix(act);
  j["neural"] = matrix(neural);
  j["forces"] = matrix(forces);
  j["outputs"] = matrix(outputs);
  return j;
}

}  // namespace mssopt

#endif  // MSSOPT_SIM_HPP_
