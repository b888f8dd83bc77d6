#pragma once

#include "sdrloc/types.hpp"

namespace sdrloc {

/// Squared-range least-squares design: rows [2 a_i^T, -1], targets
/// ||a_i||^2 - r_i^2, and the quadratic coupling y^T D y + 2 f^T y = 0
/// tying the norm variable to the coordinates.
struct GtrsProblem {
  Mat M;
  Vec b;
  Vec d_diag;  // diagonal of D: ones over the coordinates, 0 for the norm slot
  Vec f;       // (0, ..., 0, -1/2)
};

GtrsProblem build_srls(const AnchorSet& anchors, const RangeVector& ranges);

struct SrlsResult {
  Vec position;
  Scalar nu = 0.0;                 // multiplier at the root
  Scalar constraint_residual = 0;  // |y^T D y + 2 f^T y|
  bool fallback = false;           // no bracketing root: unconstrained LS used
};

/// Exact squared-range least squares via bisection on the trust-region
/// multiplier. Throws RankDeficient when M loses column rank.
SrlsResult srls_detailed(const AnchorSet& anchors, const RangeVector& ranges);

Vec srls(const AnchorSet& anchors, const RangeVector& ranges);

}  // namespace sdrloc
