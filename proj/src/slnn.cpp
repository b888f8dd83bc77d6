#include "sdrloc/slnn.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "sdrloc/spectral.hpp"

namespace sdrloc {

SlnnData build_slnn(const AnchorSet& anchors, const RangeVector& ranges) {
  if (ranges.count() != anchors.count())
    throw DimensionMismatch("build_slnn: anchor/range counts differ");
  const int m = anchors.count();
  SlnnData data;
  data.A = anchors.positions();
  data.ranges = ranges.values();
  data.Pi = Mat::Identity(m, m) - Mat::Constant(m, m, 1.0 / m);
  data.C = data.ranges.asDiagonal() * data.Pi * data.A;
  data.r = data.ranges;  // R 1
  return data;
}

Mat inner_rotation(const Mat& U, const Mat& C) {
  if (U.rows() != C.rows() || U.cols() != C.cols())
    throw DimensionMismatch("inner_rotation: U and C shapes differ");
  const int n = static_cast<int>(U.cols());
  Mat B = U.transpose() * C;
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat P = svd.matrixU();
  Mat Q = svd.matrixV();
  // deterministic tie-break for the singular bases
  for (int k = 0; k < n; ++k) {
    int arg = 0;
    P.col(k).cwiseAbs().maxCoeff(&arg);
    if (P(arg, k) < 0.0) {
      P.col(k) *= -1.0;
      Q.col(k) *= -1.0;
    }
  }
  return -P * Q.transpose();
}

Scalar nuclear_norm(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().sum();
}

Mat rows_to_unit(const Mat& U) {
  Mat out = U;
  for (int i = 0; i < out.rows(); ++i) {
    const Scalar norm = out.row(i).norm();
    if (norm < 1e-12) throw DegenerateRow("rows_to_unit: row " + std::to_string(i) + " is zero");
    out.row(i) /= norm;
  }
  return out;
}

Scalar nn_concave_objective(const Mat& W, const Mat& C, const Vec& r, Scalar kappa) {
  const Mat inner = C.transpose() * W * C;
  return 2.0 * psd_sqrt(0.5 * (inner + inner.transpose())).trace() +
         r.dot(W * r) / kappa;
}

LocalizationResult solve_nn_core(const NnCoreProblem& data, const SolverSettings& solver,
                                 Scalar tight_threshold, Scalar ratio_eval_mu) {
  const int m = static_cast<int>(data.A.rows());
  const int n = static_cast<int>(data.A.cols());

  SdpProblem problem;
  const int w = problem.add_psd_block("w", m);
  const int z = problem.add_psd_block("z", n);
  for (int p = 0; p < m; ++p) {
    LinExpr d;
    d.add(w, p, p, 1.0);
    problem.add_constraint(d, ConstraintOp::Equal, 1.0);
  }

  LinExpr obj;
  for (int p = 0; p < n; ++p) obj.add(z, p, p, 2.0);
  obj.add_inner(w, data.r * data.r.transpose(), 1.0 / data.kappa);
  problem.set_objective(Sense::Maximize, obj);

  // [[C^T W C, Z], [Z, I]] >= 0
  LmiConstraint& lmi = problem.add_lmi(2 * n, "schur");
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) {
      LinExpr& e = lmi.at(p, q);
      for (int k = 0; k < m; ++k) {
        e.add(w, k, k, data.C(k, p) * data.C(k, q));
        for (int l = k + 1; l < m; ++l)
          e.add(w, k, l, data.C(k, p) * data.C(l, q) + data.C(l, p) * data.C(k, q));
      }
    }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) lmi.at(p, n + q).add(z, std::min(p, q), std::max(p, q), 1.0);
  for (int p = 0; p < n; ++p) lmi.at(n + p, n + p).constant = 1.0;

  SolverSettings settings = solver;
  if (settings.diagnostic_mu <= 0.0) settings.diagnostic_mu = ratio_eval_mu;
  SdpSolution sol = solve_sdp(problem, settings);

  LocalizationResult result;
  result.solver_status = sol.status;
  result.failure = sol.failure;
  result.objective = sol.objective_value;
  result.iterations = sol.iterations;
  if (sol.status == SolverStatus::Failed) {
    result.position = Vec::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
    result.warnings.push_back("relaxation solve failed");
    return result;
  }

  result.relaxation_matrix = sol.block(w);

  // ratio diagnostic at fixed solve precision
  if (m > n) {
    result.eig_ratio = top_k_factor(sol.diagnostic_block(w), n).eig_ratio;
  } else {
    result.eig_ratio = 1e16;
    result.solver_status = SolverStatus::Inaccurate;
    result.warnings.push_back("underdetermined: fewer anchors than dimensions plus one");
  }

  Mat U_raw(m, n);
  if (m > n) {
    U_raw = top_k_factor(result.relaxation_matrix, n).factors;
  } else {
    // degenerate: take every available eigenpair and pad
    U_raw.setZero();
    TopFactor f = top_k_factor(result.relaxation_matrix, m - 1 > 0 ? m - 1 : 1);
    U_raw.leftCols(f.factors.cols()) = f.factors;
  }

  Mat U;
  try {
    U = rows_to_unit(U_raw);
  } catch (const DegenerateRow&) {
    result.solver_status = SolverStatus::Failed;
    result.failure = FailureKind::Numerical;
    result.position = Vec::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
    result.warnings.push_back("factorization produced a zero row");
    return result;
  }

  const Mat V = inner_rotation(U, data.C);
  const Mat Y = data.A + data.ranges.asDiagonal() * (U * V);
  result.position = Y.transpose() * data.centroid_weights;

  if (result.eig_ratio < tight_threshold)
    result.warnings.push_back("relaxation not tight: eigenvalue ratio below threshold");
  return result;
}

LocalizationResult solve_slnn(const AnchorSet& anchors, const RangeVector& ranges,
                              const SlnnOptions& options) {
  const int m = anchors.count();
  const int n = anchors.dim();

  const Scalar length_scale =
      std::max({anchors.positions().cwiseAbs().maxCoeff(), ranges.values().maxCoeff(), 1e-30});
  const AnchorSet scaled_anchors(anchors.positions() / length_scale);
  const RangeVector scaled_ranges(ranges.values() / length_scale);
  const SlnnData data = build_slnn(scaled_anchors, scaled_ranges);

  NnCoreProblem core;
  core.A = data.A;
  core.ranges = data.ranges;
  core.C = data.C;
  core.r = data.r;
  core.kappa = static_cast<Scalar>(m);
  core.centroid_weights = Vec::Constant(m, 1.0 / m);

  LocalizationResult result =
      solve_nn_core(core, options.solver, options.tight_threshold, options.ratio_eval_mu);
  result.position *= length_scale;
  result.objective *= length_scale * length_scale;
  if (m < n + 1)
    result.warnings.push_back("fewer than n+1 anchors: position is not fully determined");
  return result;
}

}  // namespace sdrloc
