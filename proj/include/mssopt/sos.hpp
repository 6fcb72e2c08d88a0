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

#ifndef MSSOPT_SOS_HPP_
#define MSSOPT_SOS_HPP_

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"
#include "mssopt/sdp.hpp"

namespace mssopt {

// Polynomial whose coefficient k is the affine expression
// constant[k] + linear.row(k) . s over the builder's scalar variables.
// `linear` may have zero rows to mean an entirely fixed polynomial.
struct AffinePoly {
  Eigen::VectorXd constant;
  Eigen::MatrixXd linear;
};

// Coefficients (ascending) of v(t)^T g v(t) with v = (1, t, ..., t^(d-1)).
inline Eigen::VectorXd gram_poly_coeffs(const Eigen::MatrixXd& g) {
  const Eigen::Index d = g.rows();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * d - 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) c[i + j] += g(i, j);
  }
  return c;
}

// Incrementally assembles a mixed scalar/PSD-block program. The sum-of-
// squares constraint couples a fresh Gram block to polynomial coefficients
// through the anti-diagonal sums of the block.
class SdpBuilder {
 public:
  explicit SdpBuilder(int num_scalars) {
    if (num_scalars < 0) {
      throw MssError("SdpBuilder: negative scalar count");
    }
    prog_.num_scalars = num_scalars;
  }

  int num_scalars() const { return prog_.num_scalars; }

  int add_block(int dim) {
    if (dim <= 0) throw MssError("SdpBuilder: non-positive block size");
    prog_.block_dims.push_back(dim);
    return static_cast<int>(prog_.block_dims.size()) - 1;
  }

  void add_equality(Eigen::VectorXd scalar_coeff,
                    std::vector<SdpTerm> terms, double rhs) {
    prog_.equalities.push_back(
        {std::move(scalar_coeff), std::move(terms), rhs});
  }

  void add_scalar_equality(Eigen::VectorXd scalar_coeff, double rhs) {
    add_equality(std::move(scalar_coeff), {}, rhs);
  }

  void set_scalar_objective(Eigen::VectorXd c) {
    prog_.scalar_objective = std::move(c);
  }

  void add_matrix_objective(int block, Eigen::MatrixXd coeff) {
    prog_.matrix_objective.push_back({block, std::move(coeff)});
  }

  // Constrains the polynomial to be a sum of squares on the whole real
  // line: adds a Gram block g and, for every power k, ties the sum of
  // g(i, j) over i + j == k to the polynomial's coefficient expression.
  // Returns the Gram block index. The coefficient count must be odd (an
  // even-degree polynomial); otherwise no Gram parameterization exists.
  int add_sos(const AffinePoly& p) {
    const Eigen::Index ncoeff = p.constant.size();
    if (ncoeff == 0) throw MssError("add_sos: empty polynomial");
    if (p.linear.size() != 0 &&
        (p.linear.rows() != ncoeff ||
         p.linear.cols() != prog_.num_scalars)) {
      throw MssError("add_sos: coefficient-expression shape mismatch");
    }
    if (ncoeff % 2 == 0) {
      throw OddDegree(
          "add_sos: odd-degree polynomial cannot be a sum of squares");
    }
    const int dim = static_cast<int>((ncoeff + 1) / 2);
    const int blk = add_block(dim);
    for (Eigen::Index k = 0; k < ncoeff; ++k) {
      Eigen::MatrixXd tie = Eigen::MatrixXd::Zero(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        const Eigen::Index j = k - i;
        if (j >= 0 && j < dim) tie(i, j) = 1.0;
      }
      Eigen::VectorXd scalar_part;
      if (p.linear.size() != 0) scalar_part = -p.linear.row(k);
      add_equality(std::move(scalar_part), {{blk, std::move(tie)}},
                   p.constant[k]);
    }
    return blk;
  }

  const SemidefiniteProgram& program() const { return prog_; }

 private:
  SemidefiniteProgram prog_;
};

}  // namespace mssopt

#endif  // MSSOPT_SOS_HPP_
