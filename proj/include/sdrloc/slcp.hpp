#pragma once

#include "sdrloc/sdp.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// Complex-plane packing of a 2-D localization instance: anchors as complex
/// numbers a, centered-and-scaled combination c = R (I - (1/m) 11^T) a, and
/// the measured-range vector r = R 1.
struct SlcpData {
  CVec a;
  CVec c;
  Vec r;
};

SlcpData build_slcp(const AnchorSet& anchors, const RangeVector& ranges);

struct SlcpOptions {
  SlcpOptions() { solver.tolerance = 1e-10; }  // tighter than the generic default
  SolverSettings solver;
  bool grid_search_m3 = false;  // opt-in exhaustive rotation search for m = 3
  int grid_points = 200000;
  Scalar tight_threshold = 100.0;
  // The dominant-eigenvalue ratio is read off the solver iterate at this
  // normalized barrier level, not the fully polished solution: the second
  // eigenvalue keeps shrinking with the barrier long after the position
  // estimate has converged, so the tightness diagnostic must be pinned to a
  // fixed solve precision to be comparable across runs.
  Scalar ratio_eval_mu = 1.5e-6;
};

/// Gaussian-ML 2-D localization via the unit-modulus semidefinite relaxation:
/// solve the relaxed program, factor the near-rank-1 solution, rotate the
/// phase vector onto the measurement circles and return the centroid of the
/// circle projections.
LocalizationResult solve_slcp(const AnchorSet& anchors, const RangeVector& ranges,
                              const SlcpOptions& options = {});

/// Multiplies theta by the global phase that makes c^H theta real negative,
/// so the circle projections a + R theta minimize the spread around their
/// centroid. Unit-modulus entries are repaired first.
CVec rotate_phase(const CVec& theta, const CVec& c);

/// Exhaustive rank-1 factor search for 3x3 Hermitian PSD matrices: maximizes
/// theta^H Phi theta over unit-modulus theta = (1, e^{ja}, e^{j(a+d)}) with a
/// on a uniform grid and d eliminated in closed form.
CVec factor_rank1_search_m3(const CMat& Phi, int grid_points);

/// Builds the relaxed program on the real embedding of the phase Gram matrix
/// (shared with the hull-tracing tooling). Adds the embedded PSD block named
/// "phi" with unit real diagonal and skew-tied imaginary part.
int add_embedded_phase_block(SdpProblem& problem, int m);

}  // namespace sdrloc
