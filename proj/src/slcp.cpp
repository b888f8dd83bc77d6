#include "sdrloc/slcp.hpp"

#include <cmath>
#include <limits>

#include "sdrloc/scenario.hpp"
#include "sdrloc/spectral.hpp"

namespace sdrloc {

int add_embedded_phase_block(SdpProblem& problem, int m) {
  const int phi = problem.add_psd_block("phi", 2 * m);
  // unit diagonal applies to both real copies
  for (int p = 0; p < 2 * m; ++p) {
    LinExpr d;
    d.add(phi, p, p, 1.0);
    problem.add_constraint(d, ConstraintOp::Equal, 1.0);
  }
  // imaginary part of a Hermitian matrix: zero diagonal, skew symmetry
  for (int i = 0; i < m; ++i) {
    LinExpr zd;
    zd.add(phi, i, m + i, 1.0);
    problem.add_constraint(zd, ConstraintOp::Equal, 0.0);
    for (int j = i + 1; j < m; ++j) {
      LinExpr skew;
      skew.add(phi, i, m + j, 1.0).add(phi, j, m + i, 1.0);
      problem.add_constraint(skew, ConstraintOp::Equal, 0.0);
    }
  }
  return phi;
}

SlcpData build_slcp(const AnchorSet& anchors, const RangeVector& ranges) {
  if (anchors.dim() != 2)
    throw DimensionMismatch("build_slcp: complex-plane formulation needs 2-D anchors");
  if (ranges.count() != anchors.count())
    throw DimensionMismatch("build_slcp: anchor/range counts differ");
  const int m = anchors.count();
  if (m < 2) throw DimensionMismatch("build_slcp: need at least 2 anchors");

  SlcpData data;
  data.a.resize(m);
  for (int i = 0; i < m; ++i)
    data.a(i) = Complex(anchors.positions()(i, 0), anchors.positions()(i, 1));
  const Complex mean = data.a.mean();
  data.r = ranges.values();
  data.c.resize(m);
  for (int i = 0; i < m; ++i) data.c(i) = data.r(i) * (data.a(i) - mean);
  return data;
}

CVec rotate_phase(const CVec& theta, const CVec& c) {
  CVec out = theta;
  for (int i = 0; i < out.size(); ++i) {
    const Scalar mag = std::abs(out(i));
    out(i) = mag < 1e-14 ? Complex(1.0, 0.0) : out(i) / mag;
  }
  const Complex inner = c.dot(out);  // c^H theta
  if (std::abs(inner) < 1e-15) return out;
  const Scalar gamma = M_PI - std::arg(inner);
  return out * std::polar(1.0, gamma);
}

CVec factor_rank1_search_m3(const CMat& Phi, int grid_points) {
  if (Phi.rows() != 3 || Phi.cols() != 3)
    throw DimensionMismatch("factor_rank1_search_m3: expected a 3x3 matrix");
  if (grid_points < 2) throw std::invalid_argument("factor_rank1_search_m3: grid too small");

  const Complex p12 = Phi(0, 1), p23 = Phi(1, 2), p13 = Phi(0, 2);
  Scalar best_val = -std::numeric_limits<Scalar>::infinity();
  Scalar best_alpha = 0.0;
  const Scalar step = 2.0 * M_PI / grid_points;
  for (int k = 0; k < grid_points; ++k) {
    const Scalar alpha = k * step;
    const Complex e = std::polar(1.0, alpha);
    const Scalar val = (p12 * e).real() + std::abs(p23 + p13 * e);
    if (val > best_val) {
      best_val = val;
      best_alpha = alpha;
    }
  }
  const Complex tail = p23 + p13 * std::polar(1.0, best_alpha);
  const Scalar delta = std::abs(tail) < 1e-15 ? 0.0 : -std::arg(tail);
  CVec theta(3);
  theta << Complex(1.0, 0.0), std::polar(1.0, best_alpha), std::polar(1.0, best_alpha + delta);
  return theta;
}

LocalizationResult solve_slcp(const AnchorSet& anchors, const RangeVector& ranges,
                              const SlcpOptions& options) {
  const int m = anchors.count();
  // work in normalized length units so the program data is O(1)
  const Scalar length_scale =
      std::max({anchors.positions().cwiseAbs().maxCoeff(), ranges.values().maxCoeff(), 1e-30});
  const AnchorSet scaled_anchors(anchors.positions() / length_scale);
  const RangeVector scaled_ranges(ranges.values() / length_scale);
  const SlcpData data = build_slcp(scaled_anchors, scaled_ranges);

  SdpProblem problem;
  const int phi = add_embedded_phase_block(problem, m);
  const int t = problem.add_psd_block("t", 1);

  const Mat Ecc = hermitian_embed(data.c * data.c.adjoint());
  const Mat Err = hermitian_embed((data.r * data.r.transpose()).cast<Complex>());

  LinExpr obj;
  obj.add(t, 0, 0, 1.0);
  obj.add_inner(phi, Err, 0.5 / m);  // tr(r r^T Phi) in the embedding
  problem.set_objective(Sense::Maximize, obj);

  LmiConstraint& hypo = problem.add_lmi(2, "hypograph");
  hypo.at(0, 0).add_inner(phi, Ecc, 2.0);  // 4 c^H Phi c
  hypo.at(0, 1).add(t, 0, 0, 1.0);
  hypo.at(1, 1).constant = 1.0;

  SolverSettings solver_settings = options.solver;
  if (solver_settings.diagnostic_mu <= 0.0) solver_settings.diagnostic_mu = options.ratio_eval_mu;
  SdpSolution sol = solve_sdp(problem, solver_settings);

  LocalizationResult result;
  result.solver_status = sol.status;
  result.failure = sol.failure;
  result.objective = sol.objective_value * length_scale * length_scale;
  result.iterations = sol.iterations;
  if (m < 3) result.warnings.push_back("fewer than 3 anchors: 2-D position is ambiguous");
  if (sol.status == SolverStatus::Failed) {
    result.position = Vec::Constant(2, std::numeric_limits<Scalar>::quiet_NaN());
    result.warnings.push_back("relaxation solve failed");
    return result;
  }

  result.relaxation_matrix = sol.block(phi);
  const CMat Phi = complex_from_embedding(result.relaxation_matrix);

  // the tightness ratio is read off the fixed-precision centered iterate so
  // it is comparable across runs; the position uses the polished solution
  result.eig_ratio = top_k_factor(complex_from_embedding(sol.diagnostic_block(phi)), 1).eig_ratio;
  TopFactorC factor = top_k_factor(Phi, 1);
  CVec theta = factor.factors.col(0);
  for (int i = 0; i < m; ++i) {
    const Scalar mag = std::abs(theta(i));
    theta(i) = mag < 1e-14 ? Complex(1.0, 0.0) : theta(i) / mag;
  }
  theta *= std::conj(theta(0));  // pin the first phase

  if (options.grid_search_m3 && m == 3) theta = factor_rank1_search_m3(Phi, options.grid_points);

  theta = rotate_phase(theta, data.c);

  CVec projections(m);
  for (int i = 0; i < m; ++i) projections(i) = data.a(i) + data.r(i) * theta(i);
  const Complex center = projections.mean();
  result.position = Vec(2);
  result.position << center.real() * length_scale, center.imag() * length_scale;

  if (result.eig_ratio < options.tight_threshold)
    result.warnings.push_back("relaxation not tight: eigenvalue ratio below threshold");
  return result;
}

}  // namespace sdrloc
