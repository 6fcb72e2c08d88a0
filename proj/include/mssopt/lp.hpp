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

#ifndef MSSOPT_LP_HPP_
#define MSSOPT_LP_HPP_

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"

namespace mssopt {

// minimize c^T x  subject to  g x >= h,  x >= lower.
// An empty `lower` means zero lower bounds.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
  Eigen::VectorXd lower;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  // Multiplier per inequality row, non-negative at an optimum.
  Eigen::VectorXd dual;
  int iterations = 0;
};

namespace lp_detail {

constexpr double kPivotTol = 1e-9;
constexpr int kMaxPivots = 200000;

// Full-tableau simplex pivot: row `pr`, column `pc`.
inline void pivot(Eigen::MatrixXd& t, std::vector<int>& basis, int pr,
                  int pc) {
  t.row(pr) /= t(pr, pc);
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    if (r == pr) continue;
    const double factor = t(r, pc);
    if (factor != 0.0) t.row(r) -= factor * t.row(pr);
  }
  basis[pr] = pc;
}

// Runs simplex pivots on a tableau whose last row is the reduced-cost row
// and last column the right-hand side. Bland's rule: the entering column is
// the lowest-index negative reduced cost; ties in the ratio test break
// toward the lowest basic variable index. Returns false on unboundedness.
inline bool iterate(Eigen::MatrixXd& t, std::vector<int>& basis,
                    Eigen::Index ncols, int* pivots) {
  const Eigen::Index m = t.rows() - 1;
  const Eigen::Index rhs = t.cols() - 1;
  while (true) {
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < ncols; ++j) {
      if (t(m, j) < -kPivotTol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return true;

    Eigen::Index leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, entering) > kPivotTol) {
        const double ratio = t(i, rhs) / t(i, entering);
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (leaving < 0 || basis[i] < basis[leaving]))) {
          best_ratio = ratio;
          leaving = i;
        }
      }
    }
    if (leaving < 0) return false;
    pivot(t, basis, static_cast<int>(leaving), static_cast<int>(entering));
    if (++*pivots > kMaxPivots) {
      throw MssError("solve_lp: pivot limit exceeded");
    }
  }
}

}  // namespace lp_detail

// Two-phase dense simplex. Infeasibility and unboundedness are reported in
// the status, never thrown.
inline LpResult solve_lp(const LinearProgram& lp) {
  using lp_detail::kPivotTol;

  const int n = static_cast<int>(lp.c.size());
  const int m = static_cast<int>(lp.g.rows());
  if (m > 0 && (lp.g.cols() != n || lp.h.size() != m)) {
    throw MssError("solve_lp: inconsistent dimensions");
  }
  Eigen::VectorXd lower =
      lp.lower.size() == 0 ? Eigen::VectorXd::Zero(n) : lp.lower;
  if (lower.size() != n) {
    throw MssError("solve_lp: lower bound size mismatch");
  }

  LpResult res;
  res.dual = Eigen::VectorXd::Zero(m);

  // No inequality rows: the optimum sits on the lower bounds unless some
  // cost coefficient is negative.
  if (m == 0) {
    if ((lp.c.array() < -kPivotTol).any()) {
      res.status = LpStatus::kUnbounded;
      return res;
    }
    res.status = LpStatus::kOptimal;
    res.x = lower;
    res.objective = lp.c.dot(lower);
    return res;
  }

  // Shift to x = lower + xh (xh >= 0), add surplus: g xh - s = h - g lower.
  const int total = n + m;        // structural + surplus columns
  const int with_art = total + m;  // + artificial columns
  Eigen::VectorXd b = lp.h - lp.g * lower;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, with_art + 1);
  t.block(0, 0, m, n) = lp.g;
  t.block(0, n, m, m) = -Eigen::MatrixXd::Identity(m, m);
  t.block(0, total, m, m) = Eigen::MatrixXd::Identity(m, m);
  t.col(with_art).head(m) = b;
  for (int i = 0; i < m; ++i) {
    if (t(i, with_art) < 0.0) {
      t.row(i).head(total) = -t.row(i).head(total);
      t(i, with_art) = -t(i, with_art);
    }
  }

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = total + i;

  // Phase-1 reduced costs for the all-artificial basis.
  for (Eigen::Index j = 0; j <= with_art; ++j) {
    if (j >= total && j < with_art) continue;
    t(m, j) = -t.col(j).head(m).sum();
  }

  int pivots = 0;
  lp_detail::iterate(t, basis, total, &pivots);

  const double feas_tol = 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff());
  if (-t(m, with_art) > feas_tol) {
    res.status = LpStatus::kInfeasible;
    res.iterations = pivots;
    return res;
  }

  // Remove artificials from the basis; rows that cannot pivot them out are
  // redundant and dropped.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (basis[i] < total) {
      keep.push_back(i);
      continue;
    }
    int col = -1;
    for (int j = 0; j < total; ++j) {
      if (std::abs(t(i, j)) > kPivotTol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      lp_detail::pivot(t, basis, i, col);
      keep.push_back(i);
    }
  }
  if (static_cast<int>(keep.size()) < m) {
    Eigen::MatrixXd t2(static_cast<int>(keep.size()) + 1, t.cols());
    std::vector<int> basis2;
    for (size_t k = 0; k < keep.size(); ++k) {
      t2.row(static_cast<int>(k)) = t.row(keep[k]);
      basis2.push_back(basis[keep[k]]);
    }
    t2.row(t2.rows() - 1) = t.row(m);
    t = std::move(t2);
    basis = std::move(basis2);
  }
  const int rows = static_cast<int>(t.rows()) - 1;

  // Phase-2 reduced costs: c_bar - c_basis^T B^{-1} A.
  Eigen::VectorXd cbar = Eigen::VectorXd::Zero(with_art);
  cbar.head(n) = lp.c;
  t.row(rows).setZero();
  t.row(rows).head(with_art) = cbar.transpose();
  for (int i = 0; i < rows; ++i) {
    const double cb = cbar[basis[i]];
    if (cb != 0.0) t.row(rows) -= cb * t.row(i);
  }

  if (!lp_detail::iterate(t, basis, total, &pivots)) {
    res.status = LpStatus::kUnbounded;
    res.iterations = pivots;
    return res;
  }

  Eigen::VectorXd xh = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < rows; ++i) xh[basis[i]] = t(i, t.cols() - 1);
  res.status = LpStatus::kOptimal;
  res.x = lower + xh.head(n);
  res.objective = lp.c.dot(res.x);
  // The reduced cost of surplus column i equals the dual of row i.
  for (int i = 0; i < m; ++i) res.dual[i] = t(rows, n + i);
  res.iterations = pivots;
  return res;
}

// Human-readable dump for cross-checking against external solvers.
inline std::string lp_to_text(const LinearProgram& lp) {
  std::ostringstream os;
  os.precision(17);
  os << "minimize c.x\n";
  os << "c:";
  for (Eigen::Index j = 0; j < lp.c.size(); ++j) os << ' ' << lp.c[j];
  os << "\nsubject to g.x >= h\n";
  for (Eigen::Index i = 0; i < lp.g.rows(); ++i) {
    os << "row " << i << ':';
    for (Eigen::Index j = 0; j < lp.g.cols(); ++j) os << ' ' << lp.g(i, j);
    os << " >= " << lp.h[i] << '\n';
  }
  os << "lower:";
  if (lp.lower.size() == 0) {
    os << " all-zero";
  } else {
    for (Eigen::Index j = 0; j < lp.lower.size(); ++j) {
      os << ' ' << lp.lower[j];
    }
  }
  os << '\n';
  return os.str();
}

}  // namespace mssopt

#endif  // MSSOPT_LP_HPP_
