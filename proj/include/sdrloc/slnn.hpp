#pragma once

#include "sdrloc/sdp.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// Real n-dimensional packing: centering projector Pi, weighted anchor
/// combination C = R Pi A and range vector r = R 1.
struct SlnnData {
  Mat A;
  Vec ranges;
  Mat Pi;
  Mat C;
  Vec r;
};

SlnnData build_slnn(const AnchorSet& anchors, const RangeVector& ranges);

struct SlnnOptions {
  SlnnOptions() { solver.tolerance = 1e-10; }
  SolverSettings solver;
  Scalar tight_threshold = 100.0;
  Scalar ratio_eval_mu = 0.0;  // 0: read the ratio off the polished solution
};

/// Gaussian-ML localization in any dimension via the trace-norm relaxation:
/// maximize 2 tr(Z) + (1/m) tr(r r^T W) over unit-diagonal PSD W with the
/// block constraint [[C^T W C, Z], [Z, I]] PSD, factor W to rank n, resolve
/// the inner rotation and average the sphere projections.
LocalizationResult solve_slnn(const AnchorSet& anchors, const RangeVector& ranges,
                              const SlnnOptions& options = {});

/// Orthogonal V minimizing tr(C^T U V); built from the singular value
/// decomposition U^T C = P S Q^T as V = -P Q^T, value -||C^T U||_N.
/// Deterministic: each left singular vector is sign-fixed so its
/// largest-magnitude entry is positive.
Mat inner_rotation(const Mat& U, const Mat& C);

/// Sum of singular values.
Scalar nuclear_norm(const Mat& M);

/// Scales each row to unit norm; a (near-)zero row raises DegenerateRow.
Mat rows_to_unit(const Mat& U);

/// Concave objective 2 tr((C^T W C)^{1/2}) + (1/kappa) r^T W r; used to
/// cross-check the semidefinite reformulation.
Scalar nn_concave_objective(const Mat& W, const Mat& C, const Vec& r, Scalar kappa);

/// Shared relaxation core for plain and reweighted solves. All inputs are
/// expected pre-scaled to O(1); centroid_weights must sum to 1.
struct NnCoreProblem {
  Mat A;
  Vec ranges;
  Mat C;
  Vec r;
  Scalar kappa = 0.0;
  Vec centroid_weights;
};

LocalizationResult solve_nn_core(const NnCoreProblem& data, const SolverSettings& solver,
                                 Scalar tight_threshold, Scalar ratio_eval_mu);

}  // namespace sdrloc
