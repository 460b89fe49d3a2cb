#pragma once

// Floating-point feasibility engine. The exact system A y = c with PSD
// Gram blocks is reduced on the null space of A to a block LMI
//   S(w) = B0 + sum_j w_j B_j  >= 0
// and solved by an infeasible-start primal-dual interior-point method
// (HKM direction, Mehrotra predictor-corrector) in long double. With a
// zero objective the central path heads for the analytic center of the
// feasible region, which is the most useful point for rationalization
// and pruning. Verdicts are hints; exact validation is the arbiter.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "identity.hpp"

namespace periodbound {

using Ld = long double;
using MatLd = Eigen::Matrix<Ld, Eigen::Dynamic, Eigen::Dynamic>;
using VecLd = Eigen::Matrix<Ld, Eigen::Dynamic, 1>;

enum class SolverStatus { feasible, infeasible, inconclusive };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::feasible: return "feasible";
    case SolverStatus::infeasible: return "infeasible";
    default: return "inconclusive";
  }
}

struct FloatSolution {
  std::vector<double> y_float;  // full layout order, Gram blocks packed
  SolverStatus solver_status = SolverStatus::inconclusive;
  double max_residual = std::numeric_limits<double>::infinity();
  double min_block_eigenvalue_estimate = std::numeric_limits<double>::quiet_NaN();
  double min_block_eigenvalue_rel = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

struct SdpOptions {
  int max_iters = 200;
  Ld step_frac = 0.9L;          // fraction of the distance to the cone boundary
  Ld feas_abs_eps = 1e-8L;      // absolute lambda_min floor for the feasible verdict
  Ld feas_noise_eps = 1e-13L;   // float-noise allowance per unit of iterate magnitude
  Ld farkas_obj_eps = 1e-4L;    // normalized tr(B0 X) below -eps flags infeasibility
  Ld farkas_lin_eps = 1e-10L;   // normalized ||tr(B_j X)||_2 must stay below this
  Ld rank_rel_tol = 1e-11L;     // rank cutoffs for LU and QR
};

namespace sdpdetail {

using BlockMat = std::vector<MatLd>;

inline Ld bm_dot(const BlockMat& a, const BlockMat& b) {
  Ld s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i].array() * b[i].array()).sum();
  return s;
}

inline Ld bm_frob(const BlockMat& a) { return std::sqrt(bm_dot(a, a)); }

inline BlockMat bm_identity(const std::vector<std::size_t>& sizes, Ld scale) {
  BlockMat m;
  for (auto n : sizes) m.push_back(MatLd::Identity(n, n) * scale);
  return m;
}

inline BlockMat bm_zero(const std::vector<std::size_t>& sizes) {
  BlockMat m;
  for (auto n : sizes) m.push_back(MatLd::Zero(n, n));
  return m;
}

inline void bm_axpy(BlockMat& y, Ld alpha, const BlockMat& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

/// Largest step alpha in [0, 1] with P + alpha*D staying in the cone,
/// shrunk by step_frac. P must be positive definite.
inline Ld bm_max_step(const BlockMat& P, const BlockMat& D, Ld step_frac) {
  Ld alpha = 1;
  for (std::size_t i = 0; i < P.size(); ++i) {
    Eigen::LLT<MatLd> llt(P[i]);
    if (llt.info() != Eigen::Success) return 0;
    MatLd L = llt.matrixL();
    MatLd W = L.template triangularView<Eigen::Lower>().solve(D[i]);
    MatLd Wt = L.template triangularView<Eigen::Lower>().solve(MatLd(W.transpose()));
    Eigen::SelfAdjointEigenSolver<MatLd> es(MatLd((Wt + Wt.transpose()) / 2),
                                            Eigen::EigenvaluesOnly);
    Ld lmin = es.eigenvalues().minCoeff();
    if (lmin < 0) alpha = std::min(alpha, -step_frac / lmin);
  }
  return alpha;
}

/// Minimum and maximum eigenvalue across all blocks.
inline std::pair<Ld, Ld> bm_eig_range(const BlockMat& a) {
  Ld lo = std::numeric_limits<Ld>::infinity(), hi = -lo;
  for (const auto& m : a) {
    if (m.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<MatLd> es(m, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  if (!std::isfinite(lo)) return {0, 0};
  return {lo, hi};
}

struct IpmResult {
  VecLd w;
  SolverStatus status = SolverStatus::inconclusive;
  int iterations = 0;
  Ld best_lambda_min = -std::numeric_limits<Ld>::infinity();
  Ld best_lambda_max = 0;
};

/// Feasibility of S(w) = B0 + sum w_j B_j >= 0 for linearly independent B_j.
/// Returns the iterate with the best relative smallest eigenvalue.
inline IpmResult ipm_feasibility(const BlockMat& B0, const std::vector<BlockMat>& Bs,
                                 const SdpOptions& opt) {
  const std::size_t r = Bs.size();
  std::vector<std::size_t> sizes;
  std::size_t n_total = 0;
  for (const auto& m : B0) {
    sizes.push_back(static_cast<std::size_t>(m.rows()));
    n_total += static_cast<std::size_t>(m.rows());
  }
  IpmResult res;
  res.w = VecLd::Zero(static_cast<Eigen::Index>(r));

  const Ld scale = std::max<Ld>(1, bm_frob(B0));
  auto evaluate = [&](const VecLd& w) {
    BlockMat S = B0;
    for (std::size_t j = 0; j < r; ++j) bm_axpy(S, w[static_cast<Eigen::Index>(j)], Bs[j]);
    return S;
  };
  // acceptance is on the absolute smallest eigenvalue, with an allowance for
  // float noise proportional to the iterate's own magnitude (forced-zero
  // faces show up as tiny negative eigenvalues scaled by the iterate)
  auto acceptable = [&](Ld lmin, Ld lmax) {
    return lmin >= -std::max(opt.feas_abs_eps, opt.feas_noise_eps * std::max<Ld>(1, lmax));
  };
  auto record = [&](const VecLd& w, const BlockMat& S_exact) {
    auto [lo, hi] = bm_eig_range(S_exact);
    if (lo > res.best_lambda_min) {
      res.best_lambda_min = lo;
      res.best_lambda_max = hi;
      res.w = w;
    }
    return std::pair<Ld, Ld>{lo, hi};
  };
  auto best_ok = [&] { return acceptable(res.best_lambda_min, res.best_lambda_max); };

  if (r == 0 || n_total == 0) {
    record(res.w, B0);
    res.status = best_ok() ? SolverStatus::feasible : SolverStatus::infeasible;
    return res;
  }

  VecLd w = VecLd::Zero(static_cast<Eigen::Index>(r));
  BlockMat X = bm_identity(sizes, 1);
  BlockMat S = bm_identity(sizes, scale);
  record(w, evaluate(w));

  bool farkas_seen = false;
  int stall_count = 0, no_improve = 0;
  Ld prev_best = res.best_lambda_min;
  const Ld mu0 = bm_dot(X, S) / static_cast<Ld>(n_total);

  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    res.iterations = iter;
    BlockMat S_affine = evaluate(w);
    auto [cur_lo, cur_hi] = record(w, S_affine);

    // dual residual: the slack must match the affine image
    BlockMat Rd = S_affine;
    bm_axpy(Rd, -1, S);
    Ld rd_rel = bm_frob(Rd) / scale;
    Ld mu = bm_dot(X, S) / static_cast<Ld>(n_total);

    if (mu / mu0 < 1e-15L && rd_rel < 1e-12L) break;
    if (acceptable(cur_lo, cur_hi)) {
      if (res.best_lambda_min - prev_best <= 1e-3L * std::abs(prev_best)) ++no_improve;
      else no_improve = 0;
      prev_best = res.best_lambda_min;
      if (no_improve >= 8) break;
    }
    if (mu / mu0 > 1e10L) break;  // divergence: no conclusion from iterates

    // factor blocks of S and X
    std::vector<Eigen::LLT<MatLd>> Sllt;
    bool ok = true;
    for (const auto& m : S) {
      Sllt.emplace_back(m);
      if (Sllt.back().info() != Eigen::Success) ok = false;
    }
    if (!ok) break;
    BlockMat Sinv;
    for (std::size_t b = 0; b < S.size(); ++b)
      Sinv.push_back(Sllt[b].solve(MatLd::Identity(S[b].rows(), S[b].cols())));

    // Schur complement M_jl = tr(B_j X B_l S^-1) and rhs pieces
    std::vector<BlockMat> H(r);
    for (std::size_t l = 0; l < r; ++l) {
      H[l] = bm_zero(sizes);
      for (std::size_t b = 0; b < sizes.size(); ++b)
        H[l][b] = X[b] * Bs[l][b] * Sinv[b];
    }
    MatLd M(r, r);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t l = 0; l < r; ++l) M(j, l) = bm_dot(Bs[j], H[l]);
    M = (M + M.transpose()) / 2;
    VecLd v1(r), v2(r);
    BlockMat XRdSinv = bm_zero(sizes);
    for (std::size_t b = 0; b < sizes.size(); ++b) XRdSinv[b] = X[b] * Rd[b] * Sinv[b];
    for (std::size_t j = 0; j < r; ++j) {
      v1[static_cast<Eigen::Index>(j)] = bm_dot(Bs[j], Sinv);
      v2[static_cast<Eigen::Index>(j)] = bm_dot(Bs[j], XRdSinv);
    }

    Eigen::LDLT<MatLd> Mf(M);
    if (Mf.info() != Eigen::Success) break;

    auto dual_dir = [&](const VecLd& dw) {
      BlockMat dS = Rd;
      for (std::size_t j = 0; j < r; ++j) bm_axpy(dS, dw[static_cast<Eigen::Index>(j)], Bs[j]);
      return dS;
    };

    // predictor: sigma = 0
    VecLd dw_aff = Mf.solve(-v2);
    BlockMat dS_aff = dual_dir(dw_aff);
    BlockMat dX_aff = bm_zero(sizes);
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      MatLd t = -X[b] - X[b] * dS_aff[b] * Sinv[b];
      dX_aff[b] = (t + t.transpose()) / 2;
    }
    Ld ap = bm_max_step(X, dX_aff, opt.step_frac);
    Ld ad = bm_max_step(S, dS_aff, opt.step_frac);
    BlockMat Xa = X, Sa = S;
    bm_axpy(Xa, ap, dX_aff);
    bm_axpy(Sa, ad, dS_aff);
    Ld mu_aff = std::max<Ld>(0, bm_dot(Xa, Sa) / static_cast<Ld>(n_total));
    Ld sigma = std::clamp<Ld>(std::pow(mu_aff / mu, 3.0L), 1e-8L, 1.0L);

    // corrector with Mehrotra second-order term
    VecLd v3(r);
    BlockMat corr = bm_zero(sizes);
    for (std::size_t b = 0; b < sizes.size(); ++b) corr[b] = dX_aff[b] * dS_aff[b] * Sinv[b];
    for (std::size_t j = 0; j < r; ++j) v3[static_cast<Eigen::Index>(j)] = bm_dot(Bs[j], corr);
    VecLd dw = Mf.solve(sigma * mu * v1 - v2 - v3);
    BlockMat dS = dual_dir(dw);
    BlockMat dX = bm_zero(sizes);
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      MatLd t = sigma * mu * Sinv[b] - X[b] - X[b] * dS[b] * Sinv[b] - corr[b];
      dX[b] = (t + t.transpose()) / 2;
    }
    ap = bm_max_step(X, dX, opt.step_frac);
    ad = bm_max_step(S, dS, opt.step_frac);
    bm_axpy(X, ap, dX);
    bm_axpy(S, ad, dS);
    w += ad * dw;

    // Farkas direction: X >= 0 with tr(B_j X) = 0 and tr(B0 X) < 0 proves
    // that no PSD point exists on the affine slice. The linear part must be
    // negligible against the objective, not merely small, because the
    // multipliers w are unbounded.
    Ld xn = bm_frob(X);
    if (xn > 0) {
      Ld obj = bm_dot(B0, X) / (xn * scale);
      Ld lin2 = 0;
      for (std::size_t j = 0; j < r; ++j) {
        Ld t = bm_dot(Bs[j], X) / xn;
        lin2 += t * t;
      }
      lin2 = std::sqrt(lin2);
      if (obj < -opt.farkas_obj_eps && lin2 < std::min(opt.farkas_lin_eps, 1e-6L * -obj)) {
        // hint only, and never worth aborting the run: forced-zero entries of
        // B0 carry float noise of either sign, which can fake a certificate;
        // an acceptable iterate found at any point outranks this signal
        farkas_seen = true;
      }
    }

    if (ap < 1e-10L && ad < 1e-10L) {
      if (++stall_count >= 2) break;
    } else {
      stall_count = 0;
    }
  }

  record(w, evaluate(w));
  if (best_ok()) res.status = SolverStatus::feasible;
  else if (farkas_seen) res.status = SolverStatus::infeasible;
  else res.status = SolverStatus::inconclusive;
  return res;
}

/// Packed coordinate bookkeeping for the Gram part of the layout.
struct GramPacking {
  std::vector<std::size_t> sizes;          // block dimensions
  std::vector<std::size_t> y_index;        // flat y index per packed coordinate
  std::vector<std::size_t> block_of;       // block index per packed coordinate
  std::vector<std::size_t> row_of, col_of; // matrix position per packed coordinate
  std::vector<Ld> weight;                  // sqrt(2) off diagonal, 1 on it
};

inline GramPacking gram_packing(const UnknownLayout& layout) {
  GramPacking p;
  const Ld s2 = std::sqrt(2.0L);
  for (const auto& b : layout.blocks) {
    if (b.kind != BlockKind::sym_matrix) continue;
    std::size_t bidx = p.sizes.size();
    p.sizes.push_back(b.size);
    for (std::size_t i = 0; i < b.size; ++i)
      for (std::size_t j = i; j < b.size; ++j) {
        p.y_index.push_back(UnknownLayout::sym_index(b, i, j));
        p.block_of.push_back(bidx);
        p.row_of.push_back(i);
        p.col_of.push_back(j);
        p.weight.push_back(i == j ? 1 : s2);
      }
  }
  return p;
}

/// Unweighted packed vector -> symmetric block list.
inline BlockMat unpack_blocks(const GramPacking& p, const VecLd& packed) {
  BlockMat m = bm_zero(p.sizes);
  for (std::size_t k = 0; k < p.y_index.size(); ++k) {
    m[p.block_of[k]](p.row_of[k], p.col_of[k]) = packed[static_cast<Eigen::Index>(k)];
    m[p.block_of[k]](p.col_of[k], p.row_of[k]) = packed[static_cast<Eigen::Index>(k)];
  }
  return m;
}

}  // namespace sdpdetail

/// Floating feasibility verdict for: A y = c, Gram blocks PSD. Any internal
/// failure degrades to status inconclusive rather than throwing.
inline FloatSolution solve_feasibility(const LinearCertificateSystem& lcs,
                                       const UnknownLayout& layout,
                                       const SdpOptions& opt = {}) {
  FloatSolution out;
  try {
    using namespace sdpdetail;
    const std::size_t n_rows = lcs.A.rows(), n_cols = lcs.A.cols();
    MatLd A(n_rows, n_cols);
    VecLd c(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
      for (std::size_t j = 0; j < n_cols; ++j)
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            static_cast<Ld>(to_double(lcs.A(i, j)));
      c[static_cast<Eigen::Index>(i)] = static_cast<Ld>(to_double(lcs.c_vec[i]));
    }

    // row equilibration: pure scaling, does not move the solution set
    MatLd Aeq = A;
    VecLd ceq = c;
    for (Eigen::Index i = 0; i < Aeq.rows(); ++i) {
      Ld m = Aeq.row(i).cwiseAbs().maxCoeff();
      m = std::max(m, std::abs(ceq[i]));
      if (m > 0) {
        Aeq.row(i) /= m;
        ceq[i] /= m;
      }
    }

    Eigen::FullPivLU<MatLd> lu(Aeq);
    lu.setThreshold(static_cast<Ld>(n_cols) * opt.rank_rel_tol);
    VecLd y0 = lu.solve(ceq);
    if ((Aeq * y0 - ceq).cwiseAbs().maxCoeff() > 1e-7L) {
      // the linear system itself has no solution: no certificate can exist
      out.solver_status = SolverStatus::infeasible;
      out.y_float.assign(layout.total(), 0.0);
      return out;
    }
    MatLd N = lu.kernel();
    if (N.cols() == 1 && N.isZero()) N = MatLd(n_cols, 0);

    GramPacking pack = gram_packing(layout);
    const std::size_t gdim = pack.y_index.size();

    // weighted Gram restriction of the null space
    MatLd G(gdim, N.cols());
    VecLd q0(gdim);
    for (std::size_t k = 0; k < gdim; ++k) {
      G.row(static_cast<Eigen::Index>(k)) =
          N.row(static_cast<Eigen::Index>(pack.y_index[k])) * pack.weight[k];
      q0[static_cast<Eigen::Index>(k)] = y0[static_cast<Eigen::Index>(pack.y_index[k])];
    }
    BlockMat B0 = unpack_blocks(pack, q0);

    Eigen::ColPivHouseholderQR<MatLd> qr(G);
    qr.setThreshold(opt.rank_rel_tol);
    const Eigen::Index r = qr.rank();
    MatLd U = qr.householderQ() * MatLd::Identity(static_cast<Eigen::Index>(gdim), r);

    std::vector<BlockMat> Bs;
    for (Eigen::Index j = 0; j < r; ++j) {
      VecLd col = U.col(j);
      for (std::size_t k = 0; k < gdim; ++k) col[static_cast<Eigen::Index>(k)] /= pack.weight[k];
      Bs.push_back(unpack_blocks(pack, col));
    }

    IpmResult ipm = ipm_feasibility(B0, Bs, opt);

    // recover z with (weighted G) z = U w, then y = y0 + N z
    VecLd z = VecLd::Zero(N.cols());
    if (r > 0) {
      MatLd R11 = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
      VecLd t = R11.template triangularView<Eigen::Upper>().solve(ipm.w);
      VecLd zp = VecLd::Zero(N.cols());
      zp.head(r) = t;
      z = qr.colsPermutation() * zp;
    }
    VecLd y = y0 + N * z;

    out.y_float.resize(layout.total());
    for (std::size_t i = 0; i < layout.total(); ++i)
      out.y_float[i] = static_cast<double>(y[static_cast<Eigen::Index>(i)]);
    out.solver_status = ipm.status;
    out.iterations = ipm.iterations;
    out.max_residual = static_cast<double>((A * y - c).cwiseAbs().maxCoeff());
    out.min_block_eigenvalue_estimate = static_cast<double>(ipm.best_lambda_min);
    out.min_block_eigenvalue_rel =
        static_cast<double>(ipm.best_lambda_min / std::max<Ld>(1, ipm.best_lambda_max));
    return out;
  } catch (...) {
    out.solver_status = SolverStatus::inconclusive;
    out.y_float.assign(layout.total(), 0.0);
    return out;
  }
}

}  // namespace periodbound
