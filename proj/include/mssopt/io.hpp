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

#ifndef MSSOPT_IO_HPP_
#define MSSOPT_IO_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mssopt/errors.hpp"
#include "mssopt/model.hpp"

namespace mssopt {

// Version stamp every config file must carry; bumped on breaking layout
// changes so stale files fail loudly instead of silently misparsing.
inline constexpr int kConfigSchema = 1;

namespace io_detail {

inline const nlohmann::json& require(const nlohmann::json& j,
                                     const std::string& key,
                                     const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(where + ": missing required field '" + key + "'");
  }
  return *it;
}

inline double number(const nlohmann::json& j, const std::string& key,
                     const std::string& where) {
  const nlohmann::json& v = require(j, key, where);
  if (!v.is_number()) {
    throw ConfigError(where + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

inline double number_or(const nlohmann::json& j, const std::string& key,
                        const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  return number(j, key, where);
}

inline int integer(const nlohmann::json& j, const std::string& key,
                   const std::string& where) {
  const nlohmann::json& v = require(j, key, where);
  if (!v.is_number_integer()) {
    throw ConfigError(where + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

inline int integer_or(const nlohmann::json& j, const std::string& key,
                      const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  return integer(j, key, where);
}

inline std::string text(const nlohmann::json& j, const std::string& key,
                        const std::string& where) {
  const nlohmann::json& v = require(j, key, where);
  if (!v.is_string()) {
    throw ConfigError(where + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

inline Eigen::VectorXd vector(const nlohmann::json& j, const std::string& key,
                              const std::string& where, int expected = -1) {
  const nlohmann::json& v = require(j, key, where);
  if (!v.is_array()) {
    throw ConfigError(where + ": field '" + key +
                      "' must be an array of numbers");
  }
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(where + ": field '" + key +
                        "' must be an array of numbers");
    }
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  if (expected >= 0 && out.size() != expected) {
    throw ConfigError(where + ": field '" + key + "' must have " +
                      std::to_string(expected) + " entries, got " +
                      std::to_string(out.size()));
  }
  return out;
}

inline Eigen::MatrixXd matrix(const nlohmann::json& j, const std::string& key,
                              const std::string& where) {
  const nlohmann::json& v = require(j, key, where);
  if (!v.is_array() || v.empty() || !v[0].is_array()) {
    throw ConfigError(where + ": field '" + key +
                      "' must be an array of number rows");
  }
  const std::size_t cols = v[0].size();
  Eigen::MatrixXd out(v.size(), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v[r].is_array() || v[r].size() != cols) {
      throw ConfigError(where + ": field '" + key +
                        "' rows must all have " + std::to_string(cols) +
                        " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number()) {
        throw ConfigError(where + ": field '" + key +
                          "' must contain only numbers");
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          v[r][c].get<double>();
    }
  }
  return out;
}

inline nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path + ": cannot open file");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError(path + ": top level must be a JSON object");
  }
  const int schema = integer(j, "schema", path);
  if (schema != kConfigSchema) {
    throw ConfigError(path + ": schema version " + std::to_string(schema) +
                      " is not supported (expected " +
                      std::to_string(kConfigSchema) + ")");
  }
  return j;
}

}  // namespace io_detail

inline constexpr double kRadiansPerDegree = M_PI / 180.0;

// Reads a plant description: linkage parameters, one parameter object per
// muscle, and the output-averaging rows. All validation beyond shape is
// delegated to the model's own checks.
inline MssModel load_plant(const std::string& path) {
  namespace d = io_detail;
  const nlohmann::json j = d::parse_file(path);

  MssModel model;
  const nlohmann::json& lk = d::require(j, "linkage", path);
  const std::string lk_where = path + ": linkage";
  model.linkage.mass = d::vector(lk, "mass_kg", lk_where, 2);
  model.linkage.length = d::vector(lk, "length_m", lk_where, 2);
  model.linkage.com = d::vector(lk, "com_m", lk_where, 2);
  model.linkage.inertia = d::vector(lk, "inertia_kgm2", lk_where, 2);
  model.linkage.gravity = d::number(lk, "gravity_mps2", lk_where);
  const Eigen::MatrixXd arms = d::matrix(lk, "moment_arms_m", lk_where);
  if (arms.rows() != 2) {
    throw ConfigError(lk_where + ": moment_arms_m must have 2 rows");
  }
  model.linkage.moment_arms = arms;
  model.linkage.path_ref = d::vector(lk, "path_ref_m", lk_where,
                                     static_cast<int>(arms.cols()));

  const nlohmann::json& muscles = d::require(j, "muscles", path);
  if (!muscles.is_array() ||
      muscles.size() != static_cast<std::size_t>(arms.cols())) {
    throw ConfigError(path + ": muscles must be an array with one entry "
                      "per moment-arm column");
  }
  for (std::size_t k = 0; k < muscles.size(); ++k) {
    const std::string where = path + ": muscles[" + std::to_string(k) + "]";
    const nlohmann::json& mj = muscles[k];
    if (!mj.is_object()) {
      throw ConfigError(where + ": must be an object");
    }
    MuscleParams p;
    p.k_s = d::number(mj, "tendon_stiffness_npm2", where);
    p.l_s_slack = d::number(mj, "tendon_slack_m", where);
    p.k_p = d::number(mj, "parallel_stiffness_npm2", where);
    p.l_p_slack = d::number(mj, "parallel_slack_m", where);
    p.f_max = d::number(mj, "peak_force_n", where);
    p.l_c_opt = d::number(mj, "optimal_length_m", where);
    p.width = d::number(mj, "length_width", where);
    p.v_max = d::number(mj, "max_shortening_mps", where);
    p.kappa = d::number(mj, "velocity_curvature", where);
    p.z_max = d::number(mj, "lengthening_plateau", where);
    p.t_min = d::number(mj, "activation_time_s", where);
    p.t_max = d::number(mj, "deactivation_time_s", where);
    model.muscles.push_back(p);
  }

  model.output_mix = d::matrix(j, "output_mix", path);
  try {
    model.validate();
  } catch (const MssError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model;
}

// Scenario description shared by the open-loop and receding-horizon
// commands. Angles cross this boundary in degrees and are stored in
// radians; all other quantities keep SI units.
struct ScenarioConfig {
  std::string name;
  std::string kind;        // "openloop" or "mpc"
  std::string plant_path;  // resolved against the scenario file's directory
  Eigen::Vector2d q_start = Eigen::Vector2d::Zero();       // [rad]
  Eigen::Vector2d q_start_rate = Eigen::Vector2d::Zero();  // [rad/s]
  Eigen::Vector2d q_goal = Eigen::Vector2d::Zero();        // [rad]
  double horizon = 1.0;          // [s]
  double step = 0.05;            // [s], receding-horizon only
  int grid_points = 31;
  int output_degree = 4;
  Eigen::VectorXd reserves;      // [N]
  std::string mode = "sos";      // "lp" or "sos"
  // Uniform hold levels defining the start state; non-positive selects the
  // cheapest admissible hold instead.
  double initial_levels = -1.0;
  int max_steps = 100;                  // receding-horizon only
  double convergence_band = kRadiansPerDegree;
  int convergence_run = 10;
  // Optional reserve override from a given step (fault injection).
  int override_from_step = -1;
  double override_reserve = 0.0;
};

inline ScenarioConfig load_scenario(const std::string& path) {
  namespace d = io_detail;
  const nlohmann::json j = d::parse_file(path);

  ScenarioConfig sc;
  sc.name = d::text(j, "name", path);
  sc.kind = d::text(j, "kind", path);
  if (sc.kind != "openloop" && sc.kind != "mpc") {
    throw ConfigError(path + ": field 'kind' must be 'openloop' or 'mpc', "
                      "got '" + sc.kind + "'");
  }
  const std::filesystem::path plant(d::text(j, "plant", path));
  sc.plant_path =
      plant.is_absolute()
          ? plant.string()
          : (std::filesystem::path(path).parent_path() / plant).string();

  const Eigen::VectorXd q0 = d::vector(j, "q_start_deg", path, 2);
  const Eigen::VectorXd qg = d::vector(j, "q_goal_deg", path, 2);
  sc.q_start = q0 * kRadiansPerDegree;
  sc.q_goal = qg * kRadiansPerDegree;
  if (j.contains("q_start_rate_deg_per_s")) {
    sc.q_start_rate =
        Eigen::Vector2d(d::vector(j, "q_start_rate_deg_per_s", path, 2) *
                        kRadiansPerDegree);
  }

  sc.horizon = d::number(j, "horizon_s", path);
  if (!(sc.horizon > 0.0)) {
    throw ConfigError(path + ": field 'horizon_s' must be positive");
  }
  sc.grid_points = d::integer(j, "grid_points", path);
  sc.output_degree = d::integer_or(j, "output_degree", path, 4);
  sc.reserves = d::vector(j, "reserves_n", path);
  if (sc.reserves.size() > 0 && sc.reserves.minCoeff() < 0.0) {
    throw ConfigError(path + ": field 'reserves_n' must be non-negative");
  }
  sc.mode = j.contains("mode") ? d::text(j, "mode", path) : sc.mode;
  if (sc.mode != "lp" && sc.mode != "sos") {
    throw ConfigError(path + ": field 'mode' must be 'lp' or 'sos', got '" +
                      sc.mode + "'");
  }
  sc.initial_levels = d::number_or(j, "initial_levels_n", path, -1.0);

  if (sc.kind == "mpc") {
    sc.step = d::number(j, "step_s", path);
    sc.max_steps = d::integer_or(j, "max_steps", path, 100);
    sc.convergence_band =
        d::number_or(j, "convergence_band_deg", path, 1.0) *
        kRadiansPerDegree;
    sc.convergence_run = d::integer_or(j, "convergence_run", path, 10);
    if (j.contains("reserve_override")) {
      const nlohmann::json& ov = j["reserve_override"];
      const std::string where = path + ": reserve_override";
      sc.override_from_step = d::integer(ov, "from_step", where);
      sc.override_reserve = d::number(ov, "value_n", where);
      if (sc.override_from_step < 0) {
        throw ConfigError(where + ": field 'from_step' must be >= 0");
      }
    }
  }
  return sc;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError(path + ": cannot open for writing");
  }
  out << content;
  if (!out) {
    throw ConfigError(path + ": write failed");
  }
}

}  // namespace mssopt

#endif  // MSSOPT_IO_HPP_
