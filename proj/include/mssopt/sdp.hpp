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

#ifndef MSSOPT_SDP_HPP_
#define MSSOPT_SDP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mssopt/errors.hpp"

namespace mssopt {

// One symmetric coefficient matrix paired with the block it acts on.
struct SdpTerm {
  int block = 0;
  Eigen::MatrixXd coeff;
};

// scalar_coeff . s + sum over terms of <coeff, X_block> = rhs.
// An empty scalar_coeff means all-zero scalar coefficients.
struct SdpConstraint {
  Eigen::VectorXd scalar_coeff;
  std::vector<SdpTerm> terms;
  double rhs = 0.0;
};

// Free scalar variables plus positive-semidefinite matrix blocks, coupled
// by linear equality constraints. The objective is linear in the scalars
// and in matrix entries; both parts are minimized.
struct SemidefiniteProgram {
  int num_scalars = 0;
  std::vector<int> block_dims;
  std::vector<SdpConstraint> equalities;
  Eigen::VectorXd scalar_objective;  // empty means zero
  std::vector<SdpTerm> matrix_objective;
};

enum class SdpStatus { kOptimal, kInfeasible, kMaxIterations,
                       kNumericalFailure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kMaxIterations: return "max-iterations";
    case SdpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

struct SdpOptions {
  int max_iterations = 120;
  double gap_tol = 1e-9;     // relative duality-gap target
  double feas_tol = 1e-9;    // relative residual target
  double phase1_eps = 1e-9;  // strict-interior margin threshold (scaled)
  double step_fraction = 0.98;
  bool allow_marginal = true;  // tolerate feasible sets without interior
};

struct SdpResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  Eigen::VectorXd scalars;
  std::vector<Eigen::MatrixXd> blocks;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;  // interior-point iterations across both phases
  double gap = std::numeric_limits<double>::quiet_NaN();
  double max_equality_violation = 0.0;
  double min_block_eigenvalue = std::numeric_limits<double>::infinity();
  bool marginal = false;  // solved through a tiny positive-margin relaxation
  std::string note;
  std::vector<double> mu_trace;  // complementarity per main-phase iteration
};

namespace sdp_detail {

using BlockMat = std::vector<Eigen::MatrixXd>;

constexpr double kEigFloor = 1e-14;

inline Eigen::Index svec_len(int d) {
  return static_cast<Eigen::Index>(d) * (d + 1) / 2;
}

// Symmetric vectorization with sqrt(2)-scaled off-diagonals, so that
// svec(A) . svec(X) equals the Frobenius inner product <A, X>.
inline void svec_add(const Eigen::MatrixXd& a,
                     Eigen::Ref<Eigen::VectorXd> out) {
  const double r2 = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j; i < a.cols(); ++i) {
      const double sym = 0.5 * (a(i, j) + a(j, i));
      out[k++] += (i == j) ? sym : r2 * sym;
    }
  }
}

inline Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v,
                            int d) {
  Eigen::MatrixXd a(d, d);
  const double inv_r2 = 1.0 / std::sqrt(2.0);
  Eigen::Index k = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) {
      const double val = (i == j) ? v[k] : v[k] * inv_r2;
      a(i, j) = val;
      a(j, i) = val;
      ++k;
    }
  }
  return a;
}

inline double bdot(const BlockMat& a, const BlockMat& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    s += a[i].cwiseProduct(b[i]).sum();
  }
  return s;
}

inline double bmaxabs(const BlockMat& a) {
  double s = 0.0;
  for (const auto& m : a) {
    if (m.size() > 0) s = std::max(s, m.cwiseAbs().maxCoeff());
  }
  return s;
}

inline double bmineig(const BlockMat& a) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& m : a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        m, Eigen::EigenvaluesOnly);
    s = std::min(s, es.eigenvalues().minCoeff());
  }
  return s;
}

inline BlockMat bidentity(const std::vector<int>& dims, double scale) {
  BlockMat out;
  out.reserve(dims.size());
  for (int d : dims) out.push_back(scale * Eigen::MatrixXd::Identity(d, d));
  return out;
}

// Affine matrix pencil: value(y) = f0 + sum_i y_i fi[i], blockwise. The
// reduced problem asks to minimize cost . y subject to value(y) >= 0.
struct LmiProblem {
  BlockMat f0;
  std::vector<BlockMat> fi;
  Eigen::VectorXd cost;
};

enum class LmiCode { kConverged, kEarlyExit, kMaxIterations,
                     kNumericalFailure };

struct LmiOutcome {
  LmiCode code = LmiCode::kNumericalFailure;
  Eigen::VectorXd y;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double primal_infeas = std::numeric_limits<double>::quiet_NaN();
  // Multiplier objective <f0, x> at the recorded iterate. When the
  // multiplier residual is tiny this upper-bounds the achievable objective
  // by weak duality, so callers can decide one-sided questions even when
  // the gap never closed.
  double multiplier_objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::vector<double> mu_trace;
  std::string note;
};

inline BlockMat lmi_value(const LmiProblem& p, const Eigen::VectorXd& y) {
  BlockMat s = p.f0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    for (size_t b = 0; b < s.size(); ++b) s[b] += y[i] * p.fi[i][b];
  }
  return s;
}

// Largest alpha keeping p + alpha dp positive definite, from the smallest
// eigenvalue of L^-1 dp L^-T with p = L L^T.
inline double max_step(const BlockMat& p, const BlockMat& dp) {
  double alpha = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < p.size(); ++b) {
    Eigen::LLT<Eigen::MatrixXd> llt(p[b]);
    if (llt.info() != Eigen::Success) return 0.0;
    Eigen::MatrixXd t1 = llt.matrixL().solve(dp[b]);
    Eigen::MatrixXd sc = llt.matrixL().solve(t1.transpose());
    sc = (0.5 * (sc + sc.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        sc, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -kEigFloor) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

// Scaling point w with w s w = x for positive definite x, s.
inline bool nt_scaling(const Eigen::MatrixXd& x, const Eigen::MatrixXd& s,
                       Eigen::MatrixXd* w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success ||
      es.eigenvalues().minCoeff() <= 0.0) {
    return false;
  }
  const Eigen::VectorXd sq = es.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd s_half =
      es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd s_ihalf = es.eigenvectors() *
                                  sq.cwiseInverse().asDiagonal() *
                                  es.eigenvectors().transpose();
  Eigen::MatrixXd t = s_half * x * s_half;
  t = (0.5 * (t + t.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> et(t);
  if (et.info() != Eigen::Success ||
      et.eigenvalues().minCoeff() <= 0.0) {
    return false;
  }
  const Eigen::MatrixXd t_half = et.eigenvectors() *
                                 et.eigenvalues().cwiseSqrt().asDiagonal() *
                                 et.eigenvectors().transpose();
  *w = s_ihalf * t_half * s_ihalf;
  *w = (0.5 * (*w + w->transpose())).eval();
  return true;
}

// Primal-dual path following on the pencil constraint, Nesterov-Todd
// scaled, with a Mehrotra-style adaptive centering exponent. The start
// point y0 must satisfy value(y0) > 0 strictly; that feasibility is then
// preserved exactly by rebuilding the slack from y every iteration.
// Stops early, reporting kEarlyExit, once -cost . y reaches
// early_exit_value.
inline LmiOutcome solve_lmi(
    const LmiProblem& p, const Eigen::VectorXd& y0, const SdpOptions& opt,
    double early_exit_value = std::numeric_limits<double>::infinity()) {
  const int nu = static_cast<int>(p.fi.size());
  const size_t nb = p.f0.size();
  std::vector<int> dims;
  double ntot = 0.0;
  for (const auto& m : p.f0) {
    dims.push_back(static_cast<int>(m.rows()));
    ntot += static_cast<double>(m.rows());
  }

  LmiOutcome out;
  out.y = y0;

  const double cost_scale = 1.0 + p.cost.cwiseAbs().maxCoeff();
  const double rho = 1.0 + bmaxabs(p.f0);
  BlockMat x = bidentity(dims, rho);
  Eigen::VectorXd y = y0;

  std::vector<Eigen::MatrixXd> w(nb), s_inv(nb);
  std::vector<BlockMat> h(nu);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    BlockMat s = lmi_value(p, y);
    std::vector<Eigen::LLT<Eigen::MatrixXd>> s_llt(nb);
    bool s_ok = true;
    for (size_t b = 0; b < nb; ++b) {
      s_llt[b].compute(s[b]);
      if (s_llt[b].info() != Eigen::Success) s_ok = false;
    }
    if (!s_ok) {
      out.code = LmiCode::kNumericalFailure;
      out.note = "slack lost positive definiteness";
      out.iterations = iter;
      return out;
    }

    const double pobj = bdot(p.f0, x);
    const double dobj = -p.cost.dot(y);
    const double mu = bdot(x, s) / ntot;
    Eigen::VectorXd rp(nu);
    for (int i = 0; i < nu; ++i) rp[i] = -p.cost[i] + bdot(p.fi[i], x);
    const double pinf = nu > 0 ? rp.cwiseAbs().maxCoeff() / cost_scale : 0.0;
    const double gap_rel =
        mu * ntot / (1.0 + std::abs(pobj) + std::abs(dobj));

    out.y = y;
    out.gap = gap_rel;
    out.primal_infeas = pinf;
    out.multiplier_objective = pobj;
    out.iterations = iter;
    out.mu_trace.push_back(mu);

    if (dobj >= early_exit_value) {
      out.code = LmiCode::kEarlyExit;
      return out;
    }
    if (gap_rel <= opt.gap_tol && pinf <= opt.feas_tol) {
      out.code = LmiCode::kConverged;
      return out;
    }
    const size_t k = out.mu_trace.size();
    if (k >= 12 && out.mu_trace[k - 1] > 0.9 * out.mu_trace[k - 7] &&
        pinf <= opt.feas_tol * 10.0) {
      out.code = LmiCode::kMaxIterations;
      out.note = "progress stalled";
      return out;
    }

    bool w_ok = true;
    for (size_t b = 0; b < nb; ++b) {
      if (!nt_scaling(x[b], s[b], &w[b])) w_ok = false;
      s_inv[b] = s_llt[b].solve(
          Eigen::MatrixXd::Identity(dims[b], dims[b]));
    }
    if (!w_ok) {
      out.code = LmiCode::kNumericalFailure;
      out.note = "scaling-point computation failed";
      return out;
    }

    // Schur matrix m(i,j) = sum_b tr(fi W fj W).
    for (int i = 0; i < nu; ++i) {
      h[i].resize(nb);
      for (size_t b = 0; b < nb; ++b) {
        h[i][b] = w[b] * p.fi[i][b] * w[b];
        h[i][b] = (0.5 * (h[i][b] + h[i][b].transpose())).eval();
      }
    }
    Eigen::MatrixXd schur(nu, nu);
    for (int i = 0; i < nu; ++i) {
      for (int j = i; j < nu; ++j) {
        schur(i, j) = bdot(p.fi[i], h[j]);
        schur(j, i) = schur(i, j);
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> schur_fac(schur);
    if (schur_fac.info() != Eigen::Success ||
        !schur_fac.isPositive()) {
      const double reg =
          1e-12 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      schur_fac.compute(schur +
                        reg * Eigen::MatrixXd::Identity(nu, nu));
      if (schur_fac.info() != Eigen::Success) {
        out.code = LmiCode::kNumericalFailure;
        out.note = "Schur factorization failed";
        return out;
      }
    }

    const auto newton = [&](const BlockMat& rmu, Eigen::VectorXd* dy,
                            BlockMat* ds, BlockMat* dx) {
      Eigen::VectorXd rhs(nu);
      for (int i = 0; i < nu; ++i) rhs[i] = rp[i] + bdot(p.fi[i], rmu);
      *dy = schur_fac.solve(rhs);
      ds->assign(nb, Eigen::MatrixXd());
      dx->assign(nb, Eigen::MatrixXd());
      for (size_t b = 0; b < nb; ++b) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dims[b], dims[b]);
        for (int i = 0; i < nu; ++i) acc += (*dy)[i] * p.fi[i][b];
        (*ds)[b] = acc;
        Eigen::MatrixXd d = rmu[b] - w[b] * acc * w[b];
        (*dx)[b] = (0.5 * (d + d.transpose())).eval();
      }
    };

    // Predictor aims straight at complementarity zero.
    BlockMat rmu_aff(nb);
    for (size_t b = 0; b < nb; ++b) rmu_aff[b] = -x[b];
    Eigen::VectorXd dy_aff;
    BlockMat ds_aff, dx_aff;
    newton(rmu_aff, &dy_aff, &ds_aff, &dx_aff);
    const double ap_aff = std::min(1.0, max_step(x, dx_aff));
    const double ad_aff = std::min(1.0, max_step(s, ds_aff));
    double mu_aff = 0.0;
    for (size_t b = 0; b < nb; ++b) {
      mu_aff += (x[b] + ap_aff * dx_aff[b])
                    .cwiseProduct(s[b] + ad_aff * ds_aff[b])
                    .sum();
    }
    mu_aff = std::max(mu_aff / ntot, 0.0);
    const double ratio = mu > 0.0 ? mu_aff / mu : 0.0;
    const double sigma = std::clamp(ratio * ratio * ratio, 0.0, 1.0);

    // Corrector re-centers toward sigma * mu.
    BlockMat rmu(nb);
    for (size_t b = 0; b < nb; ++b) rmu[b] = sigma * mu * s_inv[b] - x[b];
    Eigen::VectorXd dy;
    BlockMat ds, dx;
    newton(rmu, &dy, &ds, &dx);
    double ap =
        std::min(1.0, opt.step_fraction * max_step(x, dx));
    double ad =
        std::min(1.0, opt.step_fraction * max_step(s, ds));
    if (ap < 1e-12 && ad < 1e-12) {
      out.code = LmiCode::kMaxIterations;
      out.note = "step lengths vanished";
      return out;
    }

    // The boundary distances above come from eigenvalues of ill-conditioned
    // matrices near convergence, so the trial point can still land outside
    // the cone; back the steps off until both factorizations go through.
    const auto cone_ok = [&](double a_x, double a_y) {
      Eigen::LLT<Eigen::MatrixXd> llt;
      for (size_t b = 0; b < nb; ++b) {
        Eigen::MatrixXd xt = x[b] + a_x * dx[b];
        xt = (0.5 * (xt + xt.transpose())).eval();
        llt.compute(xt);
        if (llt.info() != Eigen::Success) return false;
      }
      const BlockMat st = lmi_value(p, y + a_y * dy);
      for (size_t b = 0; b < nb; ++b) {
        llt.compute(st[b]);
        if (llt.info() != Eigen::Success) return false;
      }
      return true;
    };
    bool stepped = false;
    for (int back = 0; back < 40; ++back) {
      if (cone_ok(ap, ad)) {
        stepped = true;
        break;
      }
      ap *= 0.5;
      ad *= 0.5;
    }
    if (!stepped || (ap < 1e-12 && ad < 1e-12)) {
      out.code = LmiCode::kMaxIterations;
      out.note = "step lengths vanished";
      return out;
    }
    for (size_t b = 0; b < nb; ++b) {
      x[b] += ap * dx[b];
      x[b] = (0.5 * (x[b] + x[b].transpose())).eval();
    }
    y += ad * dy;
  }
  out.code = LmiCode::kMaxIterations;
  out.iterations = opt.max_iterations;
  return out;
}

}  // namespace sdp_detail

// Equality-constrained semidefinite solve: eliminate the equalities onto
// an orthonormal nullspace basis, certify strict feasibility by maximizing
// the smallest slack eigenvalue, then path-follow on the reduced pencil.
inline SdpResult solve_sdp(const SemidefiniteProgram& prog,
                           const SdpOptions& opt = {}) {
  using sdp_detail::BlockMat;
  using sdp_detail::LmiCode;

  SdpResult res;
  const int ns = prog.num_scalars;
  const int nblocks = static_cast<int>(prog.block_dims.size());
  if (ns < 0) throw MssError("solve_sdp: negative scalar count");
  for (int d : prog.block_dims) {
    if (d <= 0) throw MssError("solve_sdp: non-positive block dimension");
  }

  // Stack variables as [scalars; svec(block 0); svec(block 1); ...].
  std::vector<Eigen::Index> offset(nblocks);
  Eigen::Index nx = ns;
  for (int b = 0; b < nblocks; ++b) {
    offset[b] = nx;
    nx += sdp_detail::svec_len(prog.block_dims[b]);
  }

  const auto fill_row = [&](const Eigen::VectorXd& scalar_part,
                            const std::vector<SdpTerm>& terms,
                            Eigen::VectorXd& row) {
    if (scalar_part.size() != 0) {
      if (scalar_part.size() != ns) {
        throw MssError("solve_sdp: scalar coefficient size mismatch");
      }
      row.head(ns) = scalar_part;
    }
    for (const SdpTerm& term : terms) {
      if (term.block < 0 || term.block >= nblocks) {
        throw MssError("solve_sdp: term references unknown block");
      }
      const int d = prog.block_dims[term.block];
      if (term.coeff.rows() != d || term.coeff.cols() != d) {
        throw MssError("solve_sdp: term coefficient dimension mismatch");
      }
      sdp_detail::svec_add(
          term.coeff,
          row.segment(offset[term.block], sdp_detail::svec_len(d)));
    }
  };

  const Eigen::Index m = static_cast<Eigen::Index>(prog.equalities.size());
  Eigen::MatrixXd eq(m, nx);
  eq.setZero();
  Eigen::VectorXd f(m);
  Eigen::VectorXd row_buf(nx);
  for (Eigen::Index r = 0; r < m; ++r) {
    row_buf.setZero();
    fill_row(prog.equalities[r].scalar_coeff, prog.equalities[r].terms,
             row_buf);
    eq.row(r) = row_buf.transpose();
    f[r] = prog.equalities[r].rhs;
  }
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nx);
  fill_row(prog.scalar_objective, prog.matrix_objective, cost);

  // Particular solution and orthonormal nullspace of the equalities.
  Eigen::VectorXd xp = Eigen::VectorXd::Zero(nx);
  Eigen::MatrixXd nullb;
  if (m == 0) {
    nullb = Eigen::MatrixXd::Identity(nx, nx);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        eq, Eigen::ComputeThinU | Eigen::ComputeFullV);
    svd.setThreshold(1e-11);
    xp = svd.solve(f);
    const double viol = (eq * xp - f).cwiseAbs().maxCoeff();
    res.max_equality_violation = viol;
    if (viol > 1e-8 * (1.0 + f.cwiseAbs().maxCoeff())) {
      res.status = SdpStatus::kInfeasible;
      res.note = "equality constraints are inconsistent";
      return res;
    }
    nullb = svd.matrixV().rightCols(nx - svd.rank());
  }
  const int nu0 = static_cast<int>(nullb.cols());

  const auto unpack_blocks = [&](const Eigen::VectorXd& v) {
    BlockMat out;
    out.reserve(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      out.push_back(sdp_detail::smat(
          v.segment(offset[b],
                    sdp_detail::svec_len(prog.block_dims[b])),
          prog.block_dims[b]));
    }
    return out;
  };

  const auto finish = [&](const Eigen::VectorXd& x_full, SdpStatus status) {
    res.status = status;
    res.scalars = x_full.head(ns);
    res.blocks = unpack_blocks(x_full);
    res.objective = cost.dot(x_full);
    if (m > 0) {
      res.max_equality_violation = (eq * x_full - f).cwiseAbs().maxCoeff();
    }
    if (nblocks > 0) {
      res.min_block_eigenvalue = sdp_detail::bmineig(res.blocks);
    }
  };

  BlockMat f0 = unpack_blocks(xp);
  Eigen::VectorXd chat = nullb.transpose() * cost;

  // Pure scalar-affine problem: any nonzero reduced cost rides a free
  // direction to minus infinity.
  if (nblocks == 0) {
    if (nu0 == 0 || chat.cwiseAbs().maxCoeff() <=
                        1e-10 * (1.0 + cost.cwiseAbs().maxCoeff())) {
      finish(xp, SdpStatus::kOptimal);
    } else {
      res.status = SdpStatus::kNumericalFailure;
      res.note = "objective is unbounded along an unconstrained direction";
    }
    return res;
  }

  const double scale0 = 1.0 + sdp_detail::bmaxabs(f0);

  std::vector<BlockMat> fi_all(nu0);
  for (int j = 0; j < nu0; ++j) fi_all[j] = unpack_blocks(nullb.col(j));

  // Directions that never touch a block are unconstrained: they must be
  // cost-free, and then they can simply be pinned to zero.
  std::vector<int> kept;
  for (int j = 0; j < nu0; ++j) {
    if (sdp_detail::bmaxabs(fi_all[j]) > 1e-12 * scale0) {
      kept.push_back(j);
    } else if (std::abs(chat[j]) >
               1e-9 * (1.0 + chat.cwiseAbs().maxCoeff())) {
      res.status = SdpStatus::kNumericalFailure;
      res.note = "objective is unbounded along an unconstrained direction";
      return res;
    }
  }
  const int nu = static_cast<int>(kept.size());

  if (nu == 0) {
    // Fully determined up to irrelevant directions: a feasibility check.
    if (sdp_detail::bmineig(f0) >= -1e-8 * scale0) {
      finish(xp, SdpStatus::kOptimal);
    } else {
      finish(xp, SdpStatus::kInfeasible);
      res.note = "pinned blocks are not positive semidefinite";
    }
    return res;
  }

  sdp_detail::LmiProblem main_prob;
  main_prob.f0 = f0;
  main_prob.fi.resize(nu);
  main_prob.cost.resize(nu);
  for (int j = 0; j < nu; ++j) {
    main_prob.fi[j] = fi_all[kept[j]];
    main_prob.cost[j] = chat[kept[j]];
  }

  // Feasibility phase: maximize t with value(y) - t I >= 0, t capped.
  Eigen::VectorXd y_feas = Eigen::VectorXd::Zero(nu);
  const double lam0 = sdp_detail::bmineig(f0);
  double delta = 0.0;
  if (lam0 < 1e-6 * scale0) {
    const double cap = scale0;
    sdp_detail::LmiProblem p1;
    p1.f0 = f0;
    p1.f0.push_back(Eigen::MatrixXd::Constant(1, 1, cap));
    p1.fi.resize(nu + 1);
    for (int j = 0; j < nu; ++j) {
      p1.fi[j] = main_prob.fi[j];
      p1.fi[j].push_back(Eigen::MatrixXd::Zero(1, 1));
    }
    BlockMat ft;
    for (int d : prog.block_dims) {
      ft.push_back(-Eigen::MatrixXd::Identity(d, d));
    }
    ft.push_back(-Eigen::MatrixXd::Identity(1, 1));
    p1.fi[nu] = ft;
    p1.cost = Eigen::VectorXd::Zero(nu + 1);
    p1.cost[nu] = -1.0;  // minimize -t
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(nu + 1);
    y0[nu] = std::min(lam0, cap) - 1.0;

    sdp_detail::LmiOutcome o1 =
        sdp_detail::solve_lmi(p1, y0, opt, 0.01 * cap);
    res.iterations += o1.iterations;
    const double t_star = o1.y[nu];
    if (o1.code == LmiCode::kNumericalFailure) {
      res.status = SdpStatus::kNumericalFailure;
      res.note = "feasibility phase failed: " + o1.note;
      return res;
    }
    if (o1.code == LmiCode::kMaxIterations) {
      // The gap never closed, but the multiplier iterate still bounds the
      // best achievable margin from above once its residual is negligible;
      // a decisively negative bound settles infeasibility on its own.
      if (o1.primal_infeas <= 1e-7 &&
          o1.multiplier_objective <= -1e-6 * scale0) {
        finish(xp + nullb(Eigen::all, kept) * o1.y.head(nu),
               SdpStatus::kInfeasible);
        res.status = SdpStatus::kInfeasible;
        res.note = "no strictly feasible point (margin bound " +
                   std::to_string(o1.multiplier_objective) + ")";
        return res;
      }
      if (t_star <= opt.phase1_eps * scale0) {
        res.status = SdpStatus::kMaxIterations;
        res.note = "feasibility phase did not converge";
        return res;
      }
    }
    if (t_star <= opt.phase1_eps * scale0) {
      delta = 1e-8 * scale0;
      if (!opt.allow_marginal || t_star <= -0.5 * delta) {
        finish(xp + nullb(Eigen::all, kept) * o1.y.head(nu),
               SdpStatus::kInfeasible);
        res.note = "no strictly feasible point (best margin " +
                   std::to_string(t_star) + ")";
        res.status = SdpStatus::kInfeasible;
        return res;
      }
      // Feasible set has no interior: open it up by a tiny margin and
      // accept the nearby solution.
      res.marginal = true;
      for (size_t b = 0; b < main_prob.f0.size(); ++b) {
        main_prob.f0[b] += delta *
                           Eigen::MatrixXd::Identity(
                               prog.block_dims[b], prog.block_dims[b]);
      }
    }
    y_feas = o1.y.head(nu);
  }

  sdp_detail::LmiOutcome o2 = sdp_detail::solve_lmi(main_prob, y_feas, opt);
  res.iterations += o2.iterations;
  res.gap = o2.gap;
  res.mu_trace = o2.mu_trace;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(nu0);
  for (int j = 0; j < nu; ++j) u[kept[j]] = o2.y[j];
  const Eigen::VectorXd x_full = xp + nullb * u;

  SdpStatus status;
  const double loose_gap = std::max(1e-7, 100.0 * opt.gap_tol);
  switch (o2.code) {
    case LmiCode::kConverged:
    case LmiCode::kEarlyExit:
      status = SdpStatus::kOptimal;
      break;
    case LmiCode::kMaxIterations:
      if (std::isfinite(o2.gap) && o2.gap <= loose_gap) {
        status = SdpStatus::kOptimal;
        res.note = "converged to reduced precision (" + o2.note + ")";
      } else {
        status = SdpStatus::kMaxIterations;
        res.note = o2.note;
      }
      break;
    default:
      if (std::isfinite(o2.gap) && o2.gap <= loose_gap) {
        status = SdpStatus::kOptimal;
        res.note = "converged to reduced precision (" + o2.note + ")";
      } else {
        status = SdpStatus::kNumericalFailure;
        res.note = o2.note;
      }
      break;
  }
  finish(x_full, status);
  return res;
}

}  // namespace mssopt

#endif  // MSSOPT_SDP_HPP_
