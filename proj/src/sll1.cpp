#include "sdrloc/sll1.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "sdrloc/slnn.hpp"
#include "sdrloc/spectral.hpp"

namespace sdrloc {

WeightVector::WeightVector(Vec lambda) : lambda_(std::move(lambda)) {
  if (lambda_.size() < 1) throw DimensionMismatch("WeightVector: empty");
  if ((lambda_.array() <= 0.0).any())
    throw std::invalid_argument("WeightVector: weights must be positive");
  if (std::abs(lambda_.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("WeightVector: weights must sum to 1");
}

WeightVector WeightVector::normalized(Vec positive) {
  if ((positive.array() <= 0.0).any())
    throw std::invalid_argument("WeightVector: weights must be positive");
  Vec w = positive / positive.sum();
  w /= w.sum();  // second pass pins the sum to 1 despite rounding
  return WeightVector(std::move(w));
}

Mat weights_to_projector(const WeightVector& weights) {
  const Vec inverse = weights.values().cwiseInverse();
  const Scalar kappa = inverse.sum();
  return Mat(inverse.asDiagonal()) - inverse * inverse.transpose() / kappa;
}

WeightVector lambda_update(const Vec& position, const AnchorSet& anchors,
                           const RangeVector& ranges, Scalar residual_floor) {
  const int m = anchors.count();
  if (position.size() != anchors.dim())
    throw DimensionMismatch("lambda_update: position dimension mismatch");
  Vec residuals(m);
  for (int i = 0; i < m; ++i) {
    const Scalar dist = (position - anchors.anchor(i)).norm();
    residuals(i) = std::max(std::abs(dist - ranges[i]), residual_floor);
  }
  return WeightVector::normalized(residuals);
}

namespace {

struct ScaledInstance {
  AnchorSet anchors;
  RangeVector ranges;
  Scalar length;
};

ScaledInstance normalize_instance(const AnchorSet& anchors, const RangeVector& ranges) {
  const Scalar L =
      std::max({anchors.positions().cwiseAbs().maxCoeff(), ranges.values().maxCoeff(), 1e-30});
  return {AnchorSet(anchors.positions() / L), RangeVector(ranges.values() / L), L};
}

LocalizationResult failed_result(int n, const char* note, FailureKind kind) {
  LocalizationResult r;
  r.position = Vec::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
  r.solver_status = SolverStatus::Failed;
  r.failure = kind;
  r.warnings.push_back(note);
  return r;
}

// lambda-weighted centroid x = (sum y_i / lambda_i) / (sum 1 / lambda_i)
Vec weighted_centroid(const Mat& Y, const Vec& lambda) {
  const Vec inv = lambda.cwiseInverse();
  return Y.transpose() * inv / inv.sum();
}

}  // namespace

LocalizationResult solve_weighted_slnn_detailed(const AnchorSet& anchors,
                                                const RangeVector& ranges,
                                                const WeightVector& weights,
                                                const Sll1Settings& settings) {
  if (weights.count() != anchors.count())
    throw DimensionMismatch("solve_weighted_slnn: weight/anchor counts differ");
  const ScaledInstance inst = normalize_instance(anchors, ranges);
  const int m = anchors.count();

  const Mat Xi = weights_to_projector(weights);
  const Vec inv = weights.values().cwiseInverse();
  const Scalar kappa = inv.sum();

  NnCoreProblem core;
  core.A = inst.anchors.positions();
  core.ranges = inst.ranges.values();
  core.C = core.ranges.asDiagonal() * Xi * core.A;
  core.r = core.ranges.cwiseProduct(inv);
  core.kappa = kappa;
  core.centroid_weights = inv / kappa;

  LocalizationResult result = solve_nn_core(core, settings.solver, settings.tight_threshold,
                                            /*ratio_eval_mu=*/0.0);
  result.position *= inst.length;
  result.objective *= inst.length * inst.length;
  return result;
}

Vec solve_weighted_slnn(const AnchorSet& anchors, const RangeVector& ranges,
                        const WeightVector& weights, const Sll1Settings& settings) {
  return solve_weighted_slnn_detailed(anchors, ranges, weights, settings).position;
}

LocalizationResult sll1_ad(const AnchorSet& anchors, const RangeVector& ranges,
                           const Sll1Settings& settings) {
  const int m = anchors.count();
  WeightVector lambda = WeightVector::normalized(Vec::Ones(m));
  LocalizationResult last;
  Vec previous;
  bool converged = false;
  int iterations = 0;

  for (int iter = 1; iter <= settings.max_iters; ++iter) {
    iterations = iter;
    LocalizationResult inner = solve_weighted_slnn_detailed(anchors, ranges, lambda, settings);
    if (inner.solver_status == SolverStatus::Failed) {
      // keep the last healthy iterate rather than aborting the whole run
      if (previous.size()) {
        last.warnings.push_back("inner solve failed; returning the previous iterate");
        break;
      }
      inner.iterations = iterations;
      return inner;
    }
    last = std::move(inner);
    if (previous.size() && (last.position - previous).norm() < settings.epsilon) {
      converged = true;
      break;
    }
    previous = last.position;

    // exact fit: the weighted cost is already zero, stop at the optimum
    Scalar max_residual = 0.0;
    for (int i = 0; i < m; ++i) {
      const Scalar dist = (last.position - anchors.anchor(i)).norm();
      max_residual = std::max(max_residual, std::abs(dist - ranges[i]));
    }
    if (max_residual < 1e-12) {
      converged = true;
      break;
    }
    lambda = lambda_update(last.position, anchors, ranges, settings.residual_floor);
  }

  last.iterations = iterations;
  if (!converged) last.warnings.push_back("no convergence within the outer iteration budget");
  return last;
}

LocalizationResult sll1_md(const AnchorSet& anchors, const RangeVector& ranges,
                           const Sll1Settings& settings) {
  const ScaledInstance inst = normalize_instance(anchors, ranges);
  const int m = anchors.count();
  const int n = anchors.dim();
  const Mat& A = inst.anchors.positions();
  const Vec& r = inst.ranges.values();
  const Scalar sigma = settings.sigma_big > 0.0 ? settings.sigma_big : 3e5;

  // W mirrors [1; stacked rows of U] [1; stacked rows of U]^T
  const auto idx = [n](int anchor, int coord) { return 1 + anchor * n + coord; };

  SdpProblem problem;
  const int w = problem.add_psd_block("w", m * n + 1);
  const int g = problem.add_psd_block("beta_hull", m + n);  // [[P, beta],[beta^T, Q]]

  LinExpr w00;
  w00.add(w, 0, 0, 1.0);
  problem.add_constraint(w00, ConstraintOp::Equal, 1.0);
  for (int k = 0; k < m; ++k) {
    LinExpr tr_row;
    for (int d = 0; d < n; ++d) tr_row.add(w, idx(k, d), idx(k, d), 1.0);
    problem.add_constraint(tr_row, ConstraintOp::Equal, 1.0, "unit_row");
  }
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) {
      LinExpr floor_expr;
      floor_expr.add(g, k, m + i, 1.0);
      problem.add_constraint(floor_expr, ConstraintOp::GreaterEqual, settings.beta_floor);
    }

  // per-coordinate lifted inequality
  for (int i = 0; i < n; ++i) {
    LmiConstraint& lmi = problem.add_lmi(m, "epigraph");
    const Vec alpha = A.col(i);
    for (int p = 0; p < m; ++p)
      for (int q = p; q < m; ++q) {
        LinExpr& e = lmi.at(p, q);
        if (p == q) e.add(g, p, m + i, 1.0);                     // diag(beta_i)
        for (int k = 0; k < m; ++k) e.add(g, k, m + i, sigma);   // t_i sigma 1 1^T
        e.add(w, 0, 0, -alpha(p) * alpha(q));
        e.add(w, 0, idx(q, i), -alpha(p) * r(q));
        e.add(w, 0, idx(p, i), -alpha(q) * r(p));
        e.add(w, idx(p, i), idx(q, i), -r(p) * r(q));
      }
  }

  LinExpr objective;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) objective.add(g, k, m + i, 1.0);  // 1^T t
  for (int j = 0; j < m + n; ++j) objective.add(g, j, j, 0.5 * settings.mu);
  problem.set_objective(Sense::Minimize, objective);

  SdpSolution sol = solve_sdp(problem, settings.solver);

  LocalizationResult result;
  result.solver_status = sol.status;
  result.failure = sol.failure;
  result.objective = sol.objective_value * inst.length * inst.length;
  result.iterations = sol.iterations;
  if (sol.status == SolverStatus::Failed) {
    result.position = Vec::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
    result.warnings.push_back("relaxation solve failed");
    return result;
  }

  result.relaxation_matrix = sol.block(w);
  result.eig_ratio = top_k_factor(result.relaxation_matrix, 1).eig_ratio;

  // rotation rows come straight from the first column of the lifting
  Mat U_raw(m, n);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) U_raw(k, i) = result.relaxation_matrix(0, idx(k, i));
  Mat U;
  try {
    U = rows_to_unit(U_raw);
  } catch (const DegenerateRow&) {
    return failed_result(n, "lifting column collapsed", FailureKind::Numerical);
  }

  Mat beta(m, n);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) beta(k, i) = sol.block(g)(k, m + i);
  Eigen::JacobiSVD<Mat> beta_svd(beta);
  if (beta_svd.singularValues()(0) > 0 &&
      beta_svd.singularValues()(std::min<int>(m, n) - 1) / beta_svd.singularValues()(0) > 0.05)
    result.warnings.push_back("lifted weight matrix is far from rank one");

  Vec lambda_raw = beta.rowwise().sum().cwiseMax(settings.beta_floor);
  const Vec lambda = lambda_raw / lambda_raw.sum();

  const Mat Y = A + r.asDiagonal() * U;
  result.position = weighted_centroid(Y, lambda) * inst.length;
  if (result.eig_ratio < settings.tight_threshold)
    result.warnings.push_back("relaxation not tight: eigenvalue ratio below threshold");
  return result;
}

LocalizationResult sll1_sd(const AnchorSet& anchors, const RangeVector& ranges,
                           const Sll1Settings& settings) {
  const ScaledInstance inst = normalize_instance(anchors, ranges);
  const int m = anchors.count();
  const int n = anchors.dim();
  const Mat& A = inst.anchors.positions();
  const Vec& r = inst.ranges.values();
  const Scalar sigma = settings.sigma_big > 0.0 ? settings.sigma_big : 1e6;

  SdpProblem problem;
  const int w = problem.add_psd_block("w", n + m);  // [[I_n, U^T],[U, U U^T]]
  std::vector<int> beta(m);
  for (int k = 0; k < m; ++k) beta[k] = problem.add_psd_block("beta" + std::to_string(k), 1);

  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) {
      LinExpr e;
      e.add(w, p, q, 1.0);
      problem.add_constraint(e, ConstraintOp::Equal, p == q ? 1.0 : 0.0, "identity_corner");
    }
  for (int k = 0; k < m; ++k) {
    LinExpr e;
    e.add(w, n + k, n + k, 1.0);
    problem.add_constraint(e, ConstraintOp::Equal, 1.0, "unit_row");
    LinExpr fl;
    fl.add(beta[k], 0, 0, 1.0);
    problem.add_constraint(fl, ConstraintOp::GreaterEqual, settings.beta_floor);
  }

  LmiConstraint& lmi = problem.add_lmi(m, "epigraph");
  for (int p = 0; p < m; ++p)
    for (int q = p; q < m; ++q) {
      LinExpr& e = lmi.at(p, q);
      if (p == q) e.add(beta[p], 0, 0, 1.0);
      for (int k = 0; k < m; ++k) e.add(beta[k], 0, 0, sigma);  // t sigma 1 1^T
      // rows of [A R]: coordinates then the per-anchor range slot
      for (int d = 0; d < n; ++d)
        for (int c = 0; c < n; ++c) e.add(w, std::min(d, c), std::max(d, c), -A(p, d) * A(q, c));
      for (int d = 0; d < n; ++d) {
        e.add(w, d, n + q, -A(p, d) * r(q));
        e.add(w, d, n + p, -A(q, d) * r(p));
      }
      e.add(w, n + p, n + q, -r(p) * r(q));
    }

  LinExpr objective;
  for (int k = 0; k < m; ++k) objective.add(beta[k], 0, 0, 1.0);  // t
  problem.set_objective(Sense::Minimize, objective);

  SdpSolution sol = solve_sdp(problem, settings.solver);

  LocalizationResult result;
  result.solver_status = sol.status;
  result.failure = sol.failure;
  result.objective = sol.objective_value * inst.length * inst.length;
  result.iterations = sol.iterations;
  if (sol.status == SolverStatus::Failed) {
    result.position = Vec::Constant(n, std::numeric_limits<Scalar>::quiet_NaN());
    result.warnings.push_back("relaxation solve failed");
    return result;
  }

  result.relaxation_matrix = sol.block(w);
  result.eig_ratio = top_k_factor(result.relaxation_matrix, n).eig_ratio;

  Mat U;
  try {
    U = rows_to_unit(result.relaxation_matrix.block(n, 0, m, n));
  } catch (const DegenerateRow&) {
    return failed_result(n, "off-diagonal block collapsed", FailureKind::Numerical);
  }

  Vec beta_values(m);
  for (int k = 0; k < m; ++k) beta_values(k) = std::max(sol.block(beta[k])(0, 0), settings.beta_floor);
  const Vec lambda = beta_values / beta_values.sum();

  const Mat Y = A + r.asDiagonal() * U;
  result.position = weighted_centroid(Y, lambda) * inst.length;
  if (result.eig_ratio < settings.tight_threshold)
    result.warnings.push_back("relaxation not tight: eigenvalue ratio below threshold");
  return result;
}

}  // namespace sdrloc
