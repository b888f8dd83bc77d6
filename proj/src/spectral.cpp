#include "sdrloc/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace sdrloc {

namespace {
constexpr Scalar kRatioCap = 1e16;
}

Mat hermitian_embed(const CMat& H) {
  const auto m = H.rows();
  if (H.cols() != m) throw DimensionMismatch("hermitian_embed: matrix not square");
  const Scalar scale = std::max<Scalar>(1.0, H.cwiseAbs().maxCoeff());
  if (((H - H.adjoint()).cwiseAbs().maxCoeff()) > 1e-12 * scale)
    throw NotHermitian("hermitian_embed: input is not Hermitian");

  Mat out(2 * m, 2 * m);
  const Mat re = H.real();
  const Mat im = H.imag();
  out.topLeftCorner(m, m) = re;
  out.topRightCorner(m, m) = -im;
  out.bottomLeftCorner(m, m) = im;
  out.bottomRightCorner(m, m) = re;
  return out;
}

CMat complex_from_embedding(const Mat& S) {
  const auto two_m = S.rows();
  if (S.cols() != two_m || two_m % 2 != 0)
    throw DimensionMismatch("complex_from_embedding: expected an even-sided square matrix");
  const auto m = two_m / 2;
  const Mat re = 0.5 * (S.topLeftCorner(m, m) + S.bottomRightCorner(m, m));
  const Mat im = 0.5 * (S.bottomLeftCorner(m, m) - S.topRightCorner(m, m));
  CMat H(m, m);
  H.real() = re;
  H.imag() = im;
  // kill residual asymmetry so downstream eigensolves see an exact Hermitian
  H = 0.5 * (H + H.adjoint()).eval();
  return H;
}

namespace {

template <typename MatT, typename Solver>
std::pair<MatT, Scalar> factor_impl(const MatT& sym, int k, const char* who) {
  const int m = static_cast<int>(sym.rows());
  if (sym.cols() != m) throw DimensionMismatch(std::string(who) + ": matrix not square");
  if (k < 1 || k >= m) throw DimensionMismatch(std::string(who) + ": need 1 <= k < m");

  Solver eig(sym);
  Vec lambda = eig.eigenvalues();  // ascending
  const Scalar top = lambda(m - 1);
  if (lambda(0) < -1e-8 * std::max<Scalar>(top, 1.0))
    throw NotPsd(std::string(who) + ": matrix has a significantly negative eigenvalue");

  MatT factors(m, k);
  for (int c = 0; c < k; ++c) {
    const Scalar ev = std::max<Scalar>(lambda(m - 1 - c), 0.0);
    factors.col(c) = eig.eigenvectors().col(m - 1 - c) * std::sqrt(ev);
  }
  const Scalar num = std::max<Scalar>(lambda(m - k), 0.0);
  const Scalar den = std::max<Scalar>(lambda(m - k - 1), 0.0);
  Scalar ratio = kRatioCap;
  if (den > num / kRatioCap) ratio = std::min(kRatioCap, num / den);
  if (!(ratio >= 1.0)) ratio = 1.0;
  return {factors, ratio};
}

}  // namespace

TopFactor top_k_factor(const Mat& sym, int k) {
  auto [factors, ratio] = factor_impl<Mat, Eigen::SelfAdjointEigenSolver<Mat>>(sym, k, "top_k_factor");
  return {factors, ratio};
}

TopFactorC top_k_factor(const CMat& herm, int k) {
  auto [factors, ratio] =
      factor_impl<CMat, Eigen::SelfAdjointEigenSolver<CMat>>(herm, k, "top_k_factor");
  return {factors, ratio};
}

Mat psd_sqrt(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  Vec lambda = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace sdrloc
