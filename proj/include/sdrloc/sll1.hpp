#pragma once

#include "sdrloc/sdp.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// Strictly positive weights on the unit simplex.
class WeightVector {
 public:
  explicit WeightVector(Vec lambda);
  static WeightVector normalized(Vec positive);
  const Vec& values() const { return lambda_; }
  int count() const { return static_cast<int>(lambda_.size()); }

 private:
  Vec lambda_;
};

struct Sll1Settings {
  Sll1Settings() { solver.tolerance = 1e-10; }
  Scalar epsilon = 1e-2;        // outer stop: ||x_{k+1} - x_k|| below this
  int max_iters = 30;           // outer iteration budget
  Scalar sigma_big = 0.0;       // rank-lift constant in normalized length units;
                                // 0 = per-formulation default (3e5 multi-epigraph,
                                // 1e6 single-epigraph); the projector bias scales
                                // like 1/sigma while conditioning degrades with it
  Scalar mu = 1e-2;             // trace-norm penalty weight (multi-epigraph form)
  Scalar beta_floor = 1e-9;     // strict positivity floor for the lifted weights
  Scalar residual_floor = 1e-4; // weight-update floor on residuals; keeps the
                                // inverse-weight spread the inner solve sees
                                // within ~1e5
  SolverSettings solver;
  Scalar tight_threshold = 100.0;
};

/// Weighted centering projector
/// Xi = Lambda^{-1} - Lambda^{-1} 1 (1^T Lambda^{-1} 1)^{-1} 1^T Lambda^{-1};
/// satisfies Xi 1 = 0 and Xi PSD.
Mat weights_to_projector(const WeightVector& weights);

/// Residual-proportional weights lambda_i = K_i / sum K_j with
/// K_i = | ||x - a_i|| - r_i |, floored before normalization.
WeightVector lambda_update(const Vec& position, const AnchorSet& anchors,
                           const RangeVector& ranges, Scalar residual_floor = 1e-8);

/// One reweighted relaxation solve: the plain formulation with Pi replaced by
/// Xi(lambda) and the recovered point given by the lambda-weighted centroid.
Vec solve_weighted_slnn(const AnchorSet& anchors, const RangeVector& ranges,
                        const WeightVector& weights, const Sll1Settings& settings = {});

/// Same solve with full diagnostics (used by the alternating iteration).
LocalizationResult solve_weighted_slnn_detailed(const AnchorSet& anchors,
                                                const RangeVector& ranges,
                                                const WeightVector& weights,
                                                const Sll1Settings& settings = {});

/// Robust localization by block coordinate descent: alternate reweighted
/// solves with residual-proportional weight updates until the position
/// settles. iterations reports the outer count.
LocalizationResult sll1_ad(const AnchorSet& anchors, const RangeVector& ranges,
                           const Sll1Settings& settings = {});

/// Non-iterative multi-epigraph formulation: one epigraph variable per
/// coordinate, lifted weights beta = lambda t^T kept near rank one by a
/// trace-norm penalty.
LocalizationResult sll1_md(const AnchorSet& anchors, const RangeVector& ranges,
                           const Sll1Settings& settings = {});

/// Non-iterative single-epigraph formulation on the compact (n+m)-sided
/// lifting; considerably fewer variables than the multi-epigraph form.
LocalizationResult sll1_sd(const AnchorSet& anchors, const RangeVector& ranges,
                           const Sll1Settings& settings = {});

}  // namespace sdrloc
