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

#ifndef MSSOPT_MODEL_HPP_
#define MSSOPT_MODEL_HPP_

#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"
#include "mssopt/linkage.hpp"
#include "mssopt/muscle.hpp"

namespace mssopt {

// Complete actuated model: the rigid linkage, one parameter set per
// muscle-tendon unit, and the output-mixing matrix whose rows average
// tendon forces into the co-contraction outputs.
struct MssModel {
  LinkageModel linkage;
  std::vector<MuscleParams> muscles;
  Eigen::MatrixXd output_mix;  // output_count x muscle_count, rows sum to 1

  int muscle_count() const { return linkage.muscle_count(); }
  int output_count() const { return static_cast<int>(output_mix.rows()); }
  int joint_count() const { return 2; }

  void validate() const {
    linkage.validate();
    if (static_cast<int>(muscles.size()) != muscle_count()) {
      throw DomainError("model: one parameter set per muscle required");
    }
    for (const MuscleParams& p : muscles) p.validate();
    if (output_mix.cols() != muscle_count()) {
      throw DomainError("model: output mix column count must equal the "
                        "muscle count");
    }
    if (output_count() + joint_count() != muscle_count()) {
      throw DomainError(
          "model: outputs plus joints must equal the muscle count");
    }
  }
};

// Six-muscle planar arm used by the worked scenarios: an antagonistic
// pair per joint plus a biarticular pair. The three output-averaging rows
// pair off the antagonists; the final row reads one biarticular tendon
// directly to complete a square mixing map.
inline MssModel reference_arm() {
  MssModel model;

  MuscleParams mono;  // defaults suit the single-joint pairs
  MuscleParams bi = mono;
  bi.l_s_slack = 0.18;
  bi.l_c_opt = 0.16;
  bi.l_p_slack = 0.186;
  bi.f_max = 1100.0;
  MuscleParams wrist = mono;
  wrist.l_s_slack = 0.12;
  wrist.l_c_opt = 0.10;
  wrist.l_p_slack = 0.126;
  wrist.f_max = 700.0;
  model.muscles = {mono, mono, bi, bi, wrist, wrist};

  model.output_mix.resize(4, 6);
  model.output_mix << 0.5, 0.5, 0.0, 0.0, 0.0, 0.0,
                      0.0, 0.0, 0.5, 0.5, 0.0, 0.0,
                      0.0, 0.0, 0.0, 0.0, 0.5, 0.5,
                      0.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  model.validate();
  return model;
}

}  // namespace mssopt

#endif  // MSSOPT_MODEL_HPP_
