#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sdrloc/rng.hpp"
#include "sdrloc/sdp.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// One traced boundary point of the relaxed image set: the maximizer of
/// <(cos beta, sin beta), (u, v)> over the unit-diagonal PSD set.
struct HullPoint {
  Scalar beta = 0.0;
  Scalar u = 0.0;
  Scalar v = 0.0;
  bool ok = false;
};

struct HullGap {
  Scalar beta = 0.0;      // angle at which the jump was detected
  Scalar distance = 0.0;  // aspect-normalized jump length
};

struct HullTrace {
  std::vector<HullPoint> points;  // one per grid angle, failures marked !ok
  std::vector<HullGap> gaps;      // jumps exceeding the options' threshold
  Scalar diameter = 0.0;          // aspect-normalized extent of the trace
  int failures = 0;
};

struct HullOptions {
  int n_betas = 200;
  Scalar gap_rel_threshold = 0.02;  // fraction of the trace diameter
  SolverSettings solver;
  bool full_sweep = false;  // trace all four quadrants (conjectural hull)
};

/// Samples the raw image set: draws unit-modulus phase vectors with the
/// first entry pinned to 1 and returns (|c^H theta|^2, |r^T theta|^2).
std::vector<std::pair<Scalar, Scalar>> sample_set_points(const CVec& c, const Vec& r,
                                                         int n_samples, RngStream& rng);

/// Traces the upper-right boundary of the relaxed set with supporting
/// hyperplanes over a uniform angle grid on [0, pi/2] (or [0, 2pi) for the
/// conjectural full sweep). Per-angle solver failures are recorded and the
/// points skipped.
HullTrace trace_hull(const CVec& c, const Vec& r, int n_betas, const HullOptions& options = {});

struct ConvexityOutcome {
  bool passed = false;
  std::vector<HullGap> gaps;
};

/// Flags boundary line segments: consecutive traced points further apart
/// than rel_threshold times the trace diameter (aspect-normalized).
ConvexityOutcome convexity_test(const HullTrace& trace, Scalar rel_threshold);

/// Local variant: only gaps within `window` radians of the direction
/// beta_star count. The estimator is only affected by flat boundary
/// segments near its own supporting direction, which is what the pass rate
/// is meant to capture.
ConvexityOutcome convexity_test_near(const HullTrace& trace, Scalar rel_threshold,
                                     Scalar beta_star, Scalar window);

struct TightnessStats {
  int n_tight = 0;
  Scalar rmse_all = 0.0;
  std::optional<Scalar> rmse_tight;  // empty when no run is tight
};

TightnessStats tightness_stats(const std::vector<LocalizationResult>& results,
                               const std::vector<Vec>& truths, Scalar ratio_threshold = 100.0);

/// Constructive two-dyad decomposition of a boundary (singular) 3x3
/// Hermitian PSD matrix with unit diagonal:
///   Phi = lambda theta1 theta1^H + (1 - lambda) theta2 theta2^H
/// with unit-modulus entries in both vectors.
struct DyadDecomposition {
  CVec theta1;
  CVec theta2;
  Scalar lambda = 0.5;
};

DyadDecomposition dyad_decompose(const CMat& Phi);

/// Splits an interior matrix (det > 0) into two boundary matrices along the
/// horizontal chord of its feasibility circle; weight applies to the first.
struct InteriorSplit {
  CMat boundary_a;
  CMat boundary_b;
  Scalar weight_a = 0.5;
};

InteriorSplit dyad_split_interior(const CMat& Phi);

/// Full decomposition into at most four unit-modulus dyads with convex
/// weights, splitting interior matrices first.
std::vector<std::pair<CVec, Scalar>> dyad_decompose_full(const CMat& Phi);

}  // namespace sdrloc
