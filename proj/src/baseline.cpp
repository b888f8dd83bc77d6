#include "sdrloc/baseline.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace sdrloc {

GtrsProblem build_srls(const AnchorSet& anchors, const RangeVector& ranges) {
  if (ranges.count() != anchors.count())
    throw DimensionMismatch("build_srls: anchor/range counts differ");
  const int m = anchors.count();
  const int n = anchors.dim();
  GtrsProblem p;
  p.M.resize(m, n + 1);
  p.b.resize(m);
  for (int i = 0; i < m; ++i) {
    p.M.block(i, 0, 1, n) = 2.0 * anchors.positions().row(i);
    p.M(i, n) = -1.0;
    p.b(i) = anchors.positions().row(i).squaredNorm() - ranges[i] * ranges[i];
  }
  p.d_diag = Vec::Zero(n + 1);
  p.d_diag.head(n).setOnes();
  p.f = Vec::Zero(n + 1);
  p.f(n) = -0.5;
  return p;
}

namespace {

constexpr Scalar kNuTolerance = 1e-10;
constexpr int kMaxBisection = 200;

}  // namespace

SrlsResult srls_detailed(const AnchorSet& anchors, const RangeVector& ranges) {
  const int n = anchors.dim();
  if (anchors.count() < n + 1)
    throw RankDeficient("srls: need at least n+1 anchors");
  GtrsProblem p = build_srls(anchors, ranges);

  Eigen::JacobiSVD<Mat> svd(p.M);
  const Vec& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw RankDeficient("srls: design matrix is rank deficient");

  const Mat MtM = p.M.transpose() * p.M;
  const Vec Mtb = p.M.transpose() * p.b;

  auto solve_y = [&](Scalar nu) -> Vec {
    Mat K = MtM;
    K.diagonal() += nu * p.d_diag;
    return Eigen::LDLT<Mat>(K).solve(Mtb - nu * p.f);
  };
  auto constraint = [&](const Vec& y) {
    return y.head(n).squaredNorm() - y(n);  // y^T D y + 2 f^T y
  };

  // interval of positive definiteness: nu > -1 / lambda_max(L^-1 D L^-T)
  Eigen::LLT<Mat> chol(MtM);
  Mat G = chol.matrixL().solve(Mat(p.d_diag.asDiagonal()));
  G = chol.matrixL().solve(G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
  const Scalar lambda_max = eig.eigenvalues().maxCoeff();
  Scalar nu_lo = -1.0 / lambda_max;
  nu_lo += 1e-9 * (1.0 + std::abs(nu_lo));

  SrlsResult result;
  Scalar h_lo = constraint(solve_y(nu_lo));
  Scalar nu_hi = std::max(1.0, 2.0 * std::abs(nu_lo));
  Scalar h_hi = constraint(solve_y(nu_hi));
  int expand = 0;
  while (h_hi > 0.0 && expand++ < 15) {
    nu_hi *= 10.0;
    h_hi = constraint(solve_y(nu_hi));
  }

  if (!(h_lo > 0.0) || h_hi > 0.0) {
    // endpoints do not bracket; fall back to the unconstrained least squares
    Vec y = solve_y(0.0);
    result.position = y.head(n);
    result.nu = 0.0;
    result.constraint_residual = std::abs(constraint(y));
    result.fallback = true;
    return result;
  }

  Scalar lo = nu_lo, hi = nu_hi;
  for (int it = 0; it < kMaxBisection; ++it) {
    const Scalar mid = 0.5 * (lo + hi);
    const Scalar h = constraint(solve_y(mid));
    if (h > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= kNuTolerance * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
  }
  const Scalar nu_star = 0.5 * (lo + hi);
  Vec y = solve_y(nu_star);
  result.position = y.head(n);
  result.nu = nu_star;
  result.constraint_residual = std::abs(constraint(y));
  return result;
}

Vec srls(const AnchorSet& anchors, const RangeVector& ranges) {
  return srls_detailed(anchors, ranges).position;
}

}  // namespace sdrloc
