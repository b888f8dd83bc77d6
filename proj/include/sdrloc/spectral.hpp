#pragma once

#include "sdrloc/types.hpp"

namespace sdrloc {

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian H.
/// PSD iff H is PSD; every eigenvalue of H appears twice in the embedding,
/// and tr(A H) = (1/2) tr(embed(A) embed(H)) for Hermitian A.
Mat hermitian_embed(const CMat& H);

/// Inverse of hermitian_embed, averaging the two redundant copies:
/// Re H = (S11 + S22)/2, Im H = (S21 - S12)/2.
CMat complex_from_embedding(const Mat& S);

struct TopFactor {
  Mat factors;       // columns sqrt(lambda_k) u_k, eigenvalues descending
  Scalar eig_ratio;  // lambda_k / lambda_{k+1}, capped at 1e16
};

struct TopFactorC {
  CMat factors;
  Scalar eig_ratio;
};

/// Rank-k spectral factor of a PSD matrix (throws NotPsd when an eigenvalue
/// falls below -1e-8 times the largest).
TopFactor top_k_factor(const Mat& sym, int k);
TopFactorC top_k_factor(const CMat& herm, int k);

/// Symmetric PSD square root, clamping slightly negative eigenvalues to zero.
Mat psd_sqrt(const Mat& sym);

}  // namespace sdrloc
