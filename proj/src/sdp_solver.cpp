#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

#include "sdrloc/sdp.hpp"

namespace sdrloc {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

template <typename R>
using MatR = Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>;
template <typename R>
using VecR = Eigen::Matrix<R, Eigen::Dynamic, 1>;

struct Trip {
  int i, j;  // i <= j; coefficient applies to the entry value X(i, j)
  Scalar c;
};

struct RowPart {
  int block;
  std::vector<Trip> trips;
};

struct Row {
  std::vector<RowPart> parts;
};

// Row under construction: keyed maps so repeated substitution stays canonical.
struct RawRow {
  std::map<std::tuple<int, int, int>, Scalar> bt;
  std::map<int, Scalar> ft;
  Scalar rhs = 0.0;
};

struct FreeFormula {
  int var;
  std::vector<std::tuple<int, int, int, Scalar>> bt;  // (block,i,j,c)
  std::vector<std::pair<int, Scalar>> ft;             // later-eliminated vars
  Scalar rhs = 0.0;
  Scalar divisor = 1.0;
};

struct Compiled {
  std::vector<int> bsize;
  std::vector<Mat> C;  // internal minimize sense, divided by obj_scale
  std::vector<Row> rows;
  Vec b;
  Scalar obj_scale = 1.0;
  Scalar obj_const_internal = 0.0;
  Scalar sense_sign = 1.0;
  Scalar user_constant = 0.0;
  int n_declared = 0;
  int n_free = 0;
  std::vector<FreeFormula> free_formulas;  // in elimination order
  bool trivially_infeasible = false;
  bool free_unbounded = false;
};

void accumulate_expr(RawRow& row, const LinExpr& expr, Scalar sign) {
  for (const auto& t : expr.block_terms) {
    int i = t.row, j = t.col;
    if (i > j) std::swap(i, j);
    row.bt[{t.block, i, j}] += sign * t.coeff;
  }
  for (const auto& [var, coeff] : expr.free_terms) row.ft[var] += sign * coeff;
}

Compiled compile(const SdpProblem& p) {
  p.validate();
  Compiled out;
  out.sense_sign = p.sense() == Sense::Maximize ? -1.0 : 1.0;
  out.n_declared = p.block_count();
  out.n_free = p.free_count();
  for (int b = 0; b < p.block_count(); ++b) out.bsize.push_back(p.block_size(b));

  std::vector<RawRow> raw;

  for (const auto& c : p.constraints()) {
    RawRow row;
    accumulate_expr(row, c.expr, 1.0);
    row.rhs = c.rhs - c.expr.constant;
    if (c.op != ConstraintOp::Equal) {
      const int slack = static_cast<int>(out.bsize.size());
      out.bsize.push_back(1);
      row.bt[{slack, 0, 0}] += c.op == ConstraintOp::LessEqual ? 1.0 : -1.0;
    }
    raw.push_back(std::move(row));
  }

  for (const auto& lmi : p.lmis()) {
    const int slack = static_cast<int>(out.bsize.size());
    out.bsize.push_back(lmi.side());
    for (int i = 0; i < lmi.side(); ++i)
      for (int j = i; j < lmi.side(); ++j) {
        const LinExpr& e = lmi.at(i, j);
        RawRow row;
        accumulate_expr(row, e, 1.0);
        row.bt[{slack, i, j}] += -1.0;
        row.rhs = -e.constant;
        raw.push_back(std::move(row));
      }
  }

  // internal objective (minimize sense)
  RawRow obj;
  accumulate_expr(obj, p.objective(), out.sense_sign);
  out.user_constant = p.objective().constant;

  // eliminate free variables by Gaussian pivoting on the equality rows
  for (int v = 0; v < out.n_free; ++v) {
    int pivot = -1;
    Scalar best = 0.0;
    for (int r = 0; r < static_cast<int>(raw.size()); ++r) {
      auto it = raw[r].ft.find(v);
      if (it != raw[r].ft.end() && std::abs(it->second) > best) {
        best = std::abs(it->second);
        pivot = r;
      }
    }
    FreeFormula formula;
    formula.var = v;
    if (pivot < 0 || best < 1e-13) {
      auto it = obj.ft.find(v);
      if (it != obj.ft.end() && std::abs(it->second) > 1e-12) out.free_unbounded = true;
      formula.divisor = 1.0;  // unconstrained variable pinned to zero
      out.free_formulas.push_back(std::move(formula));
      continue;
    }
    RawRow prow = raw[pivot];
    const Scalar d = prow.ft.at(v);
    prow.ft.erase(v);
    formula.divisor = d;
    formula.rhs = prow.rhs;
    for (const auto& [key, c] : prow.bt)
      formula.bt.emplace_back(std::get<0>(key), std::get<1>(key), std::get<2>(key), c);
    for (const auto& [w, c] : prow.ft) formula.ft.emplace_back(w, c);
    out.free_formulas.push_back(std::move(formula));

    raw.erase(raw.begin() + pivot);
    auto substitute = [&](RawRow& target) {
      auto it = target.ft.find(v);
      if (it == target.ft.end()) return;
      const Scalar factor = it->second / d;
      target.ft.erase(it);
      for (const auto& [key, c] : prow.bt) target.bt[key] -= factor * c;
      for (const auto& [w, c] : prow.ft) target.ft[w] -= factor * c;
      target.rhs -= factor * prow.rhs;
    };
    for (auto& r : raw) substitute(r);
    // objective: c_v * u_v picks up (c_v/d) * (rhs - row)
    auto it = obj.ft.find(v);
    if (it != obj.ft.end()) {
      const Scalar factor = it->second / d;
      obj.ft.erase(it);
      out.obj_const_internal += factor * prow.rhs;
      for (const auto& [key, c] : prow.bt) obj.bt[key] -= factor * c;
      for (const auto& [w, c] : prow.ft) obj.ft[w] -= factor * c;
    }
  }

  // assemble rows, dropping vacuous ones and scaling to unit Frobenius norm
  std::vector<Row> rows;
  std::vector<Scalar> rhs;
  for (auto& r : raw) {
    Scalar maxc = 0.0;
    for (const auto& [key, c] : r.bt) maxc = std::max(maxc, std::abs(c));
    if (maxc < 1e-13) {
      if (std::abs(r.rhs) > 1e-9 * (1.0 + std::abs(r.rhs))) out.trivially_infeasible = true;
      continue;
    }
    Scalar fro2 = 0.0;
    for (const auto& [key, c] : r.bt) {
      if (std::abs(c) < 1e-14 * maxc) continue;
      fro2 += (std::get<1>(key) == std::get<2>(key)) ? c * c : 0.5 * c * c;
    }
    const Scalar scale = std::max(std::sqrt(fro2), 1e-12);
    Row row;
    std::map<int, std::vector<Trip>> grouped;
    for (const auto& [key, c] : r.bt) {
      if (std::abs(c) < 1e-14 * maxc) continue;
      grouped[std::get<0>(key)].push_back({std::get<1>(key), std::get<2>(key), c / scale});
    }
    for (auto& [blk, trips] : grouped) row.parts.push_back({blk, std::move(trips)});
    rows.push_back(std::move(row));
    rhs.push_back(r.rhs / scale);
  }
  out.rows = std::move(rows);
  out.b = Eigen::Map<Vec>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  out.C.resize(out.bsize.size());
  for (std::size_t b = 0; b < out.bsize.size(); ++b) out.C[b] = Mat::Zero(out.bsize[b], out.bsize[b]);
  Scalar cmax = 0.0;
  for (const auto& [key, c] : obj.bt) {
    const auto [blk, i, j] = key;
    if (i == j) {
      out.C[blk](i, i) += c;
    } else {
      out.C[blk](i, j) += 0.5 * c;
      out.C[blk](j, i) += 0.5 * c;
    }
  }
  for (const auto& Ck : out.C) cmax = std::max(cmax, Ck.size() ? Ck.cwiseAbs().maxCoeff() : 0.0);
  out.obj_scale = std::max(cmax, 1.0);
  for (auto& Ck : out.C) Ck /= out.obj_scale;
  return out;
}

// ---- interior-point machinery ----------------------------------------------

template <typename R>
VecR<R> apply_rows(const std::vector<Row>& rows, const std::vector<MatR<R>>& X) {
  VecR<R> out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    R s = 0.0;
    for (const auto& part : rows[r].parts) {
      const MatR<R>& Xb = X[part.block];
      for (const auto& t : part.trips) s += static_cast<R>(t.c) * Xb(t.i, t.j);
    }
    out(static_cast<Eigen::Index>(r)) = s;
  }
  return out;
}

// out_k += sum_r y_r A_r restricted to block k
template <typename R>
void add_rows_weighted(const std::vector<Row>& rows, const VecR<R>& y, std::vector<MatR<R>>& out) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const R w = y(static_cast<Eigen::Index>(r));
    if (w == 0.0) continue;
    for (const auto& part : rows[r].parts) {
      MatR<R>& O = out[part.block];
      for (const auto& t : part.trips) {
        if (t.i == t.j) {
          O(t.i, t.i) += w * static_cast<R>(t.c);
        } else {
          O(t.i, t.j) += R(0.5) * w * static_cast<R>(t.c);
          O(t.j, t.i) += R(0.5) * w * static_cast<R>(t.c);
        }
      }
    }
  }
}

// <A_r, G> for a possibly nonsymmetric G
template <typename R>
R row_dot_general(const Row& row, const std::vector<MatR<R>>& G) {
  R s = 0.0;
  for (const auto& part : row.parts) {
    const MatR<R>& Gb = G[part.block];
    for (const auto& t : part.trips)
      s += t.i == t.j ? static_cast<R>(t.c) * Gb(t.i, t.i)
                      : R(0.5) * static_cast<R>(t.c) * (Gb(t.i, t.j) + Gb(t.j, t.i));
  }
  return s;
}

template <typename R>
R block_inner(const std::vector<MatR<R>>& A, const std::vector<MatR<R>>& B) {
  R s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) s += A[k].cwiseProduct(B[k]).sum();
  return s;
}

// largest step alpha with B + alpha*D staying PSD, given chol(B)
template <typename R>
R max_step(const Eigen::LLT<MatR<R>>& chol, const MatR<R>& D) {
  MatR<R> Y = chol.matrixL().solve(D);
  MatR<R> W = chol.matrixL().solve(Y.transpose());
  Eigen::SelfAdjointEigenSolver<MatR<R>> eig(R(0.5) * (W + W.transpose()), Eigen::EigenvaluesOnly);
  const R lmin = eig.eigenvalues().minCoeff();
  if (lmin >= R(-1e-14)) return std::numeric_limits<R>::infinity();
  return R(-1.0) / lmin;
}

struct IpmOutcome {
  std::vector<Mat> X;
  Vec y;
  SolverStatus status = SolverStatus::Failed;
  FailureKind failure = FailureKind::Numerical;
  SdpResiduals residuals;
  int iterations = 0;
  Scalar pobj_scaled = 0.0;
  std::vector<Mat> snapshot;  // iterate at the diagnostic barrier level
  std::vector<Mat> S;
};

template <typename R>
IpmOutcome run_ipm(const Compiled& cp, const SolverSettings& st) {
  using MatT = MatR<R>;
  using VecT = VecR<R>;
  const R inf = std::numeric_limits<R>::infinity();

  IpmOutcome out;
  const int nblocks = static_cast<int>(cp.bsize.size());
  const int p = static_cast<int>(cp.rows.size());
  R total_dim = 0.0;
  for (int s : cp.bsize) total_dim += s;

  const VecT b = cp.b.cast<R>();
  std::vector<MatT> C;
  for (const auto& Ck : cp.C) C.push_back(Ck.cast<R>());

  const R norm_b = b.size() ? b.norm() : R(0);
  R norm_c2 = 0.0;
  for (const auto& Ck : C) norm_c2 += Ck.squaredNorm();
  const R norm_c = std::sqrt(norm_c2);

  // identity start, scaled so early iterates dominate the data
  R xi = std::max({R(10), std::sqrt(total_dim), total_dim * (b.size() ? b.cwiseAbs().maxCoeff() : R(0))});
  R eta = std::max({R(10), std::sqrt(total_dim), norm_c});
  std::vector<MatT> X, S;
  for (int s : cp.bsize) {
    X.push_back(MatT::Identity(s, s) * xi);
    S.push_back(MatT::Identity(s, s) * eta);
  }
  VecT y = VecT::Zero(p);

  // per-block row index lists for the Schur product
  std::vector<std::vector<std::pair<int, const std::vector<Trip>*>>> block_rows(nblocks);
  for (int r = 0; r < p; ++r)
    for (const auto& part : cp.rows[r].parts)
      block_rows[part.block].emplace_back(r, &part.trips);

  std::vector<MatT> Sinv(nblocks), Rd(nblocks), G(nblocks), dX(nblocks), dS(nblocks), dXa(nblocks),
      dSa(nblocks), Corr(nblocks);
  std::vector<Eigen::LLT<MatT>> cholX(nblocks), cholS(nblocks);
  MatT M(p, p);
  int stall_count = 0;

  // best iterate seen so far; late iterations can drift once the Schur
  // system runs out of precision
  R best_worst = inf;
  std::vector<MatT> bestX = X;
  std::vector<MatT> bestS = S;
  VecT best_y = y;
  SdpResiduals best_res;
  R best_pobj = 0.0;
  // stagnation is judged on feasibility + complementarity, which shrink
  // monotonically, unlike the duality gap which wobbles while infeasible
  R best_progress = inf;
  int no_improve = 0;
  // pending pure-centering steps before the diagnostic snapshot is taken:
  // the snapshot should sit on the central path, not on a predictor excursion;
  // the pre-centering state is restored afterwards so the main trajectory is
  // unaffected by the detour
  int centering_left = -1;
  std::vector<MatT> snapshot;
  std::vector<MatT> saved_X, saved_S;
  VecT saved_y;

  for (int iter = 0; iter <= st.max_iterations; ++iter) {
    out.iterations = iter;

    // residuals and convergence measures
    VecT rp = b - apply_rows<R>(cp.rows, X);
    for (int k = 0; k < nblocks; ++k) Rd[k] = C[k] - S[k];
    add_rows_weighted<R>(cp.rows, -y, Rd);
    R rd2 = 0.0;
    for (const auto& Rk : Rd) rd2 += Rk.squaredNorm();
    const R pobj = block_inner<R>(C, X);
    const R dobj = b.size() ? b.dot(y) : R(0);
    const R rel_p = (p ? rp.norm() : R(0)) / (R(1) + norm_b);
    const R rel_d = std::sqrt(rd2) / (R(1) + norm_c);
    const R rel_g = std::abs(pobj - dobj) / (R(1) + std::abs(pobj) + std::abs(dobj));
    out.residuals = {static_cast<Scalar>(rel_p), static_cast<Scalar>(rel_d),
                     static_cast<Scalar>(rel_g)};
    out.pobj_scaled = static_cast<Scalar>(pobj);
    if (st.verbose)
      std::printf("ipm %3d  p %.2e d %.2e g %.2e  pobj %.10e\n", iter, double(rel_p),
                  double(rel_d), double(rel_g), double(pobj));

    R mu_now = block_inner<R>(X, S) / total_dim;
    const R mu_rel = mu_now / (R(1) + std::abs(pobj) + std::abs(dobj));
    if (st.diagnostic_mu > 0.0 && snapshot.empty() && centering_left < 0 &&
        mu_rel <= R(st.diagnostic_mu)) {
      centering_left = 3;
      saved_X = X;
      saved_S = S;
      saved_y = y;
      if (st.verbose) std::printf("  [snapshot detour begins]\n");
    }
    const bool centering = centering_left > 0;
    // detour iterations stay out of every progress statistic so the main
    // trajectory behaves as if the snapshot were never taken
    if (!centering) {
      const R worst_now = std::max({rel_p, rel_d, rel_g});
      if (worst_now < best_worst) {
        best_worst = worst_now;
        bestX = X;
        bestS = S;
        best_y = y;
        best_res = out.residuals;
        best_pobj = static_cast<Scalar>(pobj);
      }
      const R progress = std::max({rel_p, rel_d, mu_rel});
      if (progress < best_progress * R(1.0 - 1e-4)) {
        best_progress = progress;
        no_improve = 0;
      } else if (++no_improve >= 8) {
        break;  // numerical floor reached
      }
    }

    if (rel_p <= R(st.tolerance) && rel_d <= R(st.tolerance) && rel_g <= R(st.tolerance)) {
      out.status = SolverStatus::Optimal;
      out.failure = FailureKind::None;
      break;
    }

    // divergence heuristics with certificate checks
    if (dobj > R(1e8) * (R(1) + norm_c)) {
      std::vector<MatT> ray(nblocks);
      for (int k = 0; k < nblocks; ++k) ray[k] = MatT::Zero(cp.bsize[k], cp.bsize[k]);
      VecT dir = -y / dobj;
      add_rows_weighted<R>(cp.rows, dir, ray);  // -A*(y)/dobj, should be ~PSD
      R lmin = 0.0, ray_norm = 0.0;
      for (const auto& Z : ray) {
        Eigen::SelfAdjointEigenSolver<MatT> eig(Z, Eigen::EigenvaluesOnly);
        lmin = std::min(lmin, eig.eigenvalues().minCoeff());
        ray_norm = std::max(ray_norm, Z.cwiseAbs().maxCoeff());
      }
      // a genuine certificate has A*(y) nearly PSD relative to its own size
      if (lmin >= R(-1e-8) * std::max(R(1), ray_norm) - R(1e-12)) {
        out.status = SolverStatus::Failed;
        out.failure = FailureKind::Infeasible;
        break;
      }
    }
    if (pobj < R(-1e8) * (R(1) + norm_b) && rel_p <= R(1e-6)) {
      R trace = 0.0;
      for (const auto& Xk : X) trace += Xk.trace();
      std::vector<MatT> Xhat = X;
      for (auto& Xk : Xhat) Xk /= trace;
      const R feas = p ? apply_rows<R>(cp.rows, Xhat).cwiseAbs().maxCoeff() : R(0);
      if (feas <= R(1e-6) && block_inner<R>(C, Xhat) < R(-1e-10)) {
        out.status = SolverStatus::Failed;
        out.failure = FailureKind::Unbounded;
        break;
      }
    }

    if (iter == st.max_iterations) break;

    bool pd_ok = true;
    for (int k = 0; k < nblocks; ++k) {
      cholX[k].compute(X[k]);
      cholS[k].compute(S[k]);
      if (cholX[k].info() != Eigen::Success || cholS[k].info() != Eigen::Success) pd_ok = false;
    }
    if (!pd_ok) break;
    for (int k = 0; k < nblocks; ++k)
      Sinv[k] = cholS[k].solve(MatT::Identity(cp.bsize[k], cp.bsize[k]));

    const R mu = block_inner<R>(X, S) / total_dim;

    VecT a_s(p);
    for (int r = 0; r < p; ++r) a_s(r) = row_dot_general<R>(cp.rows[r], Sinv);
    for (int k = 0; k < nblocks; ++k) G[k] = X[k] * Rd[k] * Sinv[k];
    VecT a_xrs(p);
    for (int r = 0; r < p; ++r) a_xrs(r) = row_dot_general<R>(cp.rows[r], G);

    // Schur complement M_ij = <A_i, X A_j Sinv>
    M.setZero();
    for (int k = 0; k < nblocks; ++k) {
      if (block_rows[k].empty()) continue;
      const MatT& Xb = X[k];
      const MatT& Sb = Sinv[k];
      MatT T(cp.bsize[k], cp.bsize[k]);
      for (const auto& [j, trips_j] : block_rows[k]) {
        T.setZero();
        for (const auto& t : *trips_j) {
          if (t.i == t.j) {
            T.noalias() += R(t.c) * (Xb.col(t.i) * Sb.row(t.i));
          } else {
            T.noalias() += R(0.5 * t.c) * (Xb.col(t.i) * Sb.row(t.j));
            T.noalias() += R(0.5 * t.c) * (Xb.col(t.j) * Sb.row(t.i));
          }
        }
        for (const auto& [i, trips_i] : block_rows[k]) {
          R s = 0.0;
          for (const auto& t : *trips_i)
            s += t.i == t.j ? R(t.c) * T(t.i, t.i) : R(0.5 * t.c) * (T(t.i, t.j) + T(t.j, t.i));
          M(i, j) += s;
        }
      }
    }
    M = R(0.5) * (M + M.transpose()).eval();

    // the Schur system turns very ill-conditioned as mu shrinks; factor a
    // ridged copy if needed and refine once
    Eigen::LLT<MatT> cholM;
    if (p) {
      R ridge = 0.0;
      const R diag_mean = M.diagonal().mean();
      for (int attempt = 0; attempt < 6; ++attempt) {
        MatT Mreg = M;
        if (ridge > R(0)) Mreg.diagonal().array() += ridge * std::max(diag_mean, R(1e-30));
        cholM.compute(Mreg);
        if (cholM.info() == Eigen::Success) break;
        ridge = ridge == R(0) ? R(1e-16) : ridge * R(100);
      }
      if (cholM.info() != Eigen::Success) break;
    }
    auto schur_solve = [&](const VecT& rhs) {
      VecT dy = cholM.solve(rhs);
      dy += cholM.solve(rhs - M * dy);  // one refinement pass
      return dy;
    };

    R sigma = 1.0;
    VecT a_corr = VecT::Zero(p);
    if (centering) {
      // plain Newton centering step toward the current mu
      for (int k = 0; k < nblocks; ++k) Corr[k].setZero(cp.bsize[k], cp.bsize[k]);
    } else {
      // predictor
      VecT dy_a = VecT::Zero(p);
      if (p) dy_a = schur_solve(b + a_xrs);
      for (int k = 0; k < nblocks; ++k) dSa[k] = Rd[k];
      VecT neg_dy_a = -dy_a;
      add_rows_weighted<R>(cp.rows, neg_dy_a, dSa);
      for (int k = 0; k < nblocks; ++k) {
        dXa[k] = -X[k] - X[k] * dSa[k] * Sinv[k];
        dXa[k] = R(0.5) * (dXa[k] + dXa[k].transpose()).eval();
      }
      R ap_aff = 1.0, ad_aff = 1.0;
      for (int k = 0; k < nblocks; ++k) {
        ap_aff = std::min(ap_aff, max_step<R>(cholX[k], dXa[k]));
        ad_aff = std::min(ad_aff, max_step<R>(cholS[k], dSa[k]));
      }
      ap_aff = std::min(ap_aff, R(1));
      ad_aff = std::min(ad_aff, R(1));
      R mu_aff = 0.0;
      for (int k = 0; k < nblocks; ++k)
        mu_aff += (X[k] + ap_aff * dXa[k]).cwiseProduct(S[k] + ad_aff * dSa[k]).sum();
      mu_aff /= total_dim;
      sigma = std::clamp(R(std::pow(double(std::max(mu_aff, R(0)) / mu), 3.0)), R(1e-8), R(1));

      // corrector
      for (int k = 0; k < nblocks; ++k) Corr[k] = dXa[k] * dSa[k] * Sinv[k];
      for (int r = 0; r < p; ++r) a_corr(r) = row_dot_general<R>(cp.rows[r], Corr);
    }
    VecT dy = VecT::Zero(p);
    if (p) dy = schur_solve(b - sigma * mu * a_s + a_xrs + a_corr);
    for (int k = 0; k < nblocks; ++k) dS[k] = Rd[k];
    VecT neg_dy = -dy;
    add_rows_weighted<R>(cp.rows, neg_dy, dS);
    for (int k = 0; k < nblocks; ++k) {
      dX[k] = sigma * mu * Sinv[k] - X[k] - Corr[k] - X[k] * dS[k] * Sinv[k];
      dX[k] = R(0.5) * (dX[k] + dX[k].transpose()).eval();
    }

    const R worst = std::max({rel_p, rel_d, rel_g});
    const R tau =
        worst > R(1e-3) ? R(0.92) : (worst > R(1e-6) ? R(0.97) : (worst > R(1e-9) ? R(0.995) : R(0.999)));
    R ap = 1.0, ad = 1.0;
    for (int k = 0; k < nblocks; ++k) {
      ap = std::min(ap, tau * max_step<R>(cholX[k], dX[k]));
      ad = std::min(ad, tau * max_step<R>(cholS[k], dS[k]));
    }
    ap = std::min(ap, R(1));
    ad = std::min(ad, R(1));

    // take the step, backing off if roundoff lost definiteness
    bool stepped = false;
    for (int attempt = 0; attempt < 20 && !stepped; ++attempt) {
      std::vector<MatT> Xn(nblocks), Sn(nblocks);
      bool ok = true;
      for (int k = 0; k < nblocks && ok; ++k) {
        Xn[k] = X[k] + ap * dX[k];
        Sn[k] = S[k] + ad * dS[k];
        ok = Eigen::LLT<MatT>(Xn[k]).info() == Eigen::Success &&
             Eigen::LLT<MatT>(Sn[k]).info() == Eigen::Success;
      }
      if (ok) {
        X = std::move(Xn);
        S = std::move(Sn);
        y += ad * dy;
        stepped = true;
      } else {
        ap *= R(0.6);
        ad *= R(0.6);
      }
    }
    if (!stepped || (ap < R(1e-10) && ad < R(1e-10))) {
      if (++stall_count >= 2) break;
    } else {
      stall_count = 0;
    }
    if (centering && --centering_left == 0) {
      // keep the centered iterate for diagnostics, then put the main
      // trajectory back where the detour started
      snapshot = X;
      X = std::move(saved_X);
      S = std::move(saved_S);
      y = std::move(saved_y);
    }
  }

  auto to_double = [](const std::vector<MatT>& blocks) {
    std::vector<Mat> out_blocks;
    out_blocks.reserve(blocks.size());
    for (const auto& B : blocks) out_blocks.push_back(B.template cast<Scalar>());
    return out_blocks;
  };
  out.snapshot = to_double(snapshot);

  if (out.status == SolverStatus::Optimal) {
    out.X = to_double(X);
    out.S = to_double(S);
    out.y = y.template cast<Scalar>();
    return out;
  }
  // hand back the best iterate seen, re-classifying from its residuals
  out.residuals = best_res;
  out.pobj_scaled = static_cast<Scalar>(best_pobj);
  out.X = to_double(bestX);
  out.S = to_double(bestS);
  out.y = best_y.template cast<Scalar>();
  if (out.failure == FailureKind::Numerical) {
    if (best_worst <= R(st.tolerance)) {
      out.status = SolverStatus::Optimal;
      out.failure = FailureKind::None;
    } else if (best_worst <= R(st.inaccurate_tolerance)) {
      out.status = SolverStatus::Inaccurate;
      out.failure = FailureKind::None;
    }
  }
  return out;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SolverSettings& settings) {
  if (!(settings.tolerance > 0.0)) throw std::invalid_argument("solve_sdp: tolerance must be > 0");
  Compiled cp = compile(problem);

  SdpSolution sol;
  if (cp.trivially_infeasible) {
    sol.status = SolverStatus::Failed;
    sol.failure = FailureKind::Infeasible;
    return sol;
  }
  if (cp.free_unbounded) {
    sol.status = SolverStatus::Failed;
    sol.failure = FailureKind::Unbounded;
    return sol;
  }

  IpmOutcome ipm = run_ipm<double>(cp, settings);
  // escalate to extended precision when double hits its floor short of the
  // requested tolerance but is otherwise healthy
  if (ipm.status != SolverStatus::Optimal && ipm.failure == FailureKind::Numerical) {
    ipm = run_ipm<long double>(cp, settings);
  } else if (ipm.status == SolverStatus::Inaccurate && settings.tolerance < 1e-8) {
    IpmOutcome retry = run_ipm<long double>(cp, settings);
    if (retry.status == SolverStatus::Optimal ||
        std::max({retry.residuals.primal_feas, retry.residuals.dual_feas, retry.residuals.gap}) <
            std::max({ipm.residuals.primal_feas, ipm.residuals.dual_feas, ipm.residuals.gap}))
      ipm = std::move(retry);
  }
  sol.status = ipm.status;
  sol.failure = ipm.failure;
  sol.residuals = ipm.residuals;
  sol.iterations = ipm.iterations;

  sol.block_values.assign(ipm.X.begin(), ipm.X.begin() + cp.n_declared);
  for (auto& B : sol.block_values) B = 0.5 * (B + B.transpose()).eval();
  if (!ipm.snapshot.empty()) {
    sol.diagnostic_blocks.assign(ipm.snapshot.begin(), ipm.snapshot.begin() + cp.n_declared);
    for (auto& B : sol.diagnostic_blocks) B = 0.5 * (B + B.transpose()).eval();
  }
  if (!ipm.S.empty()) {
    sol.dual_blocks.assign(ipm.S.begin(), ipm.S.begin() + cp.n_declared);
    for (auto& B : sol.dual_blocks) B = 0.5 * (B + B.transpose()).eval();
  }

  // free variables back-substituted in reverse elimination order
  sol.free_values.assign(cp.n_free, 0.0);
  for (auto it = cp.free_formulas.rbegin(); it != cp.free_formulas.rend(); ++it) {
    Scalar v = it->rhs;
    for (const auto& [blk, i, j, c] : it->bt) v -= c * ipm.X[blk](i, j);
    for (const auto& [w, c] : it->ft) v -= c * sol.free_values[w];
    sol.free_values[it->var] = v / it->divisor;
  }

  const Scalar internal = cp.obj_scale * ipm.pobj_scaled + cp.obj_const_internal;
  sol.objective_value = cp.sense_sign * internal + cp.user_constant;
  return sol;
}

}  // namespace sdrloc
