#include "sdrloc/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "sdrloc/slcp.hpp"
#include "sdrloc/spectral.hpp"

namespace sdrloc {

std::vector<std::pair<Scalar, Scalar>> sample_set_points(const CVec& c, const Vec& r,
                                                         int n_samples, RngStream& rng) {
  if (c.size() != r.size()) throw DimensionMismatch("sample_set_points: c and r lengths differ");
  const int m = static_cast<int>(c.size());
  std::vector<std::pair<Scalar, Scalar>> out;
  out.reserve(n_samples);
  CVec theta(m);
  theta(0) = Complex(1.0, 0.0);  // global rotation is immaterial
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 1; i < m; ++i) theta(i) = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
    const Scalar u = std::norm(c.dot(theta));
    const Scalar v = std::norm(r.cast<Complex>().dot(theta));
    out.emplace_back(u, v);
  }
  return out;
}

namespace {

// The two image coordinates live on very different scales, so gap distances
// are measured after scaling each axis by its traced range.
struct TraceFrame {
  Scalar u_scale = 1.0;
  Scalar v_scale = 1.0;
  Scalar diameter = 0.0;
};

TraceFrame trace_frame(const std::vector<HullPoint>& points) {
  TraceFrame frame;
  Scalar umin = 0, umax = 0, vmin = 0, vmax = 0;
  bool first = true;
  for (const auto& p : points) {
    if (!p.ok) continue;
    if (first) {
      umin = umax = p.u;
      vmin = vmax = p.v;
      first = false;
    } else {
      umin = std::min(umin, p.u);
      umax = std::max(umax, p.u);
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
    }
  }
  frame.u_scale = std::max(umax - umin, 1e-12 * std::max(std::abs(umax), 1.0));
  frame.v_scale = std::max(vmax - vmin, 1e-12 * std::max(std::abs(vmax), 1.0));
  for (const auto& p : points) {
    if (!p.ok) continue;
    for (const auto& q : points) {
      if (!q.ok) continue;
      const Scalar du = (p.u - q.u) / frame.u_scale;
      const Scalar dv = (p.v - q.v) / frame.v_scale;
      frame.diameter = std::max(frame.diameter, std::hypot(du, dv));
    }
  }
  return frame;
}

std::vector<HullGap> find_gaps(const std::vector<HullPoint>& points, const TraceFrame& frame,
                               Scalar rel_threshold) {
  std::vector<HullGap> gaps;
  const HullPoint* prev = nullptr;
  for (const auto& p : points) {
    if (!p.ok) continue;
    if (prev) {
      const Scalar du = (p.u - prev->u) / frame.u_scale;
      const Scalar dv = (p.v - prev->v) / frame.v_scale;
      const Scalar dist = std::hypot(du, dv);
      if (dist > rel_threshold * frame.diameter) gaps.push_back({p.beta, dist});
    }
    prev = &p;
  }
  return gaps;
}

}  // namespace

HullTrace trace_hull(const CVec& c, const Vec& r, int n_betas, const HullOptions& options) {
  if (c.size() != r.size()) throw DimensionMismatch("trace_hull: c and r lengths differ");
  if (n_betas < 2) throw std::invalid_argument("trace_hull: need at least two angles");
  const int m = static_cast<int>(c.size());

  // a joint scale preserves the direction grid in the original (u, v) plane
  const Scalar scale = std::max({c.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff(), 1e-30});
  const CVec ch = c / scale;
  const Vec rh = r / scale;
  const Mat Ecc = hermitian_embed(ch * ch.adjoint());
  const Mat Err = hermitian_embed((rh * rh.transpose()).cast<Complex>());

  HullTrace trace;
  trace.points.resize(n_betas);
  for (int k = 0; k < n_betas; ++k) {
    const Scalar beta = options.full_sweep ? 2.0 * M_PI * k / n_betas
                                           : 0.5 * M_PI * k / (n_betas - 1);
    HullPoint& point = trace.points[k];
    point.beta = beta;

    SdpProblem problem;
    const int phi = add_embedded_phase_block(problem, m);
    LinExpr obj;
    obj.add_inner(phi, Ecc, 0.5 * std::cos(beta));
    obj.add_inner(phi, Err, 0.5 * std::sin(beta));
    problem.set_objective(Sense::Maximize, obj);
    SdpSolution sol = solve_sdp(problem, options.solver);
    if (sol.status == SolverStatus::Failed) {
      ++trace.failures;
      continue;
    }
    const CMat Phi = complex_from_embedding(sol.block(phi));
    point.u = (c.adjoint() * Phi * c)(0).real();
    point.v = (r.transpose() * Phi.real() * r)(0);
    point.ok = true;
  }

  const TraceFrame frame = trace_frame(trace.points);
  trace.diameter = frame.diameter;
  trace.gaps = find_gaps(trace.points, frame, options.gap_rel_threshold);
  return trace;
}

ConvexityOutcome convexity_test(const HullTrace& trace, Scalar rel_threshold) {
  int ok_count = 0;
  for (const auto& p : trace.points)
    if (p.ok) ++ok_count;
  if (ok_count == 0) throw std::invalid_argument("convexity_test: empty trace");
  const TraceFrame frame = trace_frame(trace.points);
  ConvexityOutcome outcome;
  outcome.gaps = find_gaps(trace.points, frame, rel_threshold);
  outcome.passed = outcome.gaps.empty();
  return outcome;
}

ConvexityOutcome convexity_test_near(const HullTrace& trace, Scalar rel_threshold,
                                     Scalar beta_star, Scalar window) {
  ConvexityOutcome full = convexity_test(trace, rel_threshold);
  ConvexityOutcome outcome;
  for (const auto& gap : full.gaps)
    if (std::abs(gap.beta - beta_star) <= window) outcome.gaps.push_back(gap);
  outcome.passed = outcome.gaps.empty();
  return outcome;
}

TightnessStats tightness_stats(const std::vector<LocalizationResult>& results,
                               const std::vector<Vec>& truths, Scalar ratio_threshold) {
  if (results.empty()) throw LengthMismatch("tightness_stats: empty input");
  if (results.size() != truths.size())
    throw LengthMismatch("tightness_stats: results/truths lengths differ");
  TightnessStats stats;
  Scalar sum_all = 0.0, sum_tight = 0.0;
  int n_all = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].solver_status == SolverStatus::Failed) continue;
    const Scalar e2 = (results[i].position - truths[i]).squaredNorm();
    sum_all += e2;
    ++n_all;
    if (results[i].eig_ratio >= ratio_threshold) {
      sum_tight += e2;
      ++stats.n_tight;
    }
  }
  stats.rmse_all = n_all ? std::sqrt(sum_all / n_all) : 0.0;
  if (stats.n_tight > 0) stats.rmse_tight = std::sqrt(sum_tight / stats.n_tight);
  return stats;
}

// ---- constructive dyad decomposition ----------------------------------------

namespace {

constexpr Scalar kTwoPi = 2.0 * M_PI;

Scalar wrap_signed(Scalar x) {  // into (-pi, pi]
  x = std::fmod(x, kTwoPi);
  if (x < 0) x += kTwoPi;
  return x > M_PI ? x - kTwoPi : x;
}

struct Canonical {
  bool swapped = false;    // indices 1 and 2 exchanged
  Complex phase1, phase2;  // diagonal unitary applied to rows 1, 2
  Scalar a = 0, b = 0;     // 0 <= a <= b
  Complex z;               // entry (2, 1) of the canonical form
};

Canonical canonicalize(const CMat& Phi) {
  Canonical canon;
  CMat P = Phi;
  if (std::abs(P(0, 1)) > std::abs(P(0, 2))) {
    canon.swapped = true;
    CMat Q = P;
    const int perm[3] = {0, 2, 1};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Q(i, j) = P(perm[i], perm[j]);
    P = Q;
  }
  const Scalar m1 = std::abs(P(0, 1));
  const Scalar m2 = std::abs(P(0, 2));
  canon.phase1 = m1 < 1e-300 ? Complex(1, 0) : std::polar(1.0, std::arg(P(0, 1)));
  canon.phase2 = m2 < 1e-300 ? Complex(1, 0) : std::polar(1.0, std::arg(P(0, 2)));
  canon.a = std::min(m1, 1.0);
  canon.b = std::min(m2, 1.0);
  // canonical form is D P D^H with D = diag(1, phase1, phase2)
  canon.z = canon.phase2 * P(2, 1) * std::conj(canon.phase1);
  return canon;
}

CVec uncanonicalize(const Canonical& canon, Complex second, Complex third) {
  // theta' = (1, second, third) in canonical coordinates; theta = D^H theta'
  // undone by the permutation
  CVec theta(3);
  theta(0) = Complex(1, 0);
  theta(1) = std::conj(canon.phase1) * second;
  theta(2) = std::conj(canon.phase2) * third;
  if (canon.swapped) std::swap(theta(1), theta(2));
  return theta;
}

void check_input(const CMat& Phi) {
  if (Phi.rows() != 3 || Phi.cols() != 3)
    throw DimensionMismatch("dyad_decompose: expected a 3x3 matrix");
  if ((Phi - Phi.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw NotHermitian("dyad_decompose: input is not Hermitian");
  for (int i = 0; i < 3; ++i)
    if (std::abs(Phi(i, i) - Complex(1, 0)) > 1e-8)
      throw NotUnitDiagonal("dyad_decompose: diagonal entries must be 1");
  Eigen::SelfAdjointEigenSolver<CMat> eig(Phi, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8)
    throw NotPsd("dyad_decompose: matrix is not positive semidefinite");
}

struct ChordState {
  Scalar lambda = 0.5;
  Scalar tau_plus = 1.0, tau_minus = -1.0;
  Scalar reach_b = 1.0;  // distance from b to its circle intersection
  Scalar phi2 = 0.0;
};

// Fixes the chord through `a` with direction phi1 and derives the matched
// construction at `b`. The chord through the second diagonal point must use
// the same convex weight, which pins its reach and hence the angle phi2.
ChordState chord_at(Scalar a, Scalar b, Scalar phi1) {
  ChordState st;
  const Scalar ca = a * std::cos(phi1);
  const Scalar disc = std::sqrt(std::max(ca * ca + 1.0 - a * a, 0.0));
  st.tau_plus = -ca + disc;
  st.tau_minus = -ca - disc;
  st.lambda = -st.tau_minus / (st.tau_plus - st.tau_minus);
  const Scalar ratio = (1.0 - st.lambda) / st.lambda;
  st.reach_b = std::sqrt(std::max(ratio * (1.0 - b * b), 0.0));
  Scalar cos_phi2 = 1.0;
  if (b > 1e-300 && st.reach_b > 1e-300)
    cos_phi2 =
        std::clamp((1.0 - b * b - st.reach_b * st.reach_b) / (2.0 * b * st.reach_b), -1.0, 1.0);
  st.phi2 = std::acos(cos_phi2);  // upper-half convention, Im(e^{j beta}) >= 0
  return st;
}

}  // namespace

DyadDecomposition dyad_decompose(const CMat& Phi) {
  check_input(Phi);
  Canonical canon = canonicalize(Phi);
  const Scalar a = canon.a, b = canon.b;
  const Scalar rho2 = (1.0 - a * a) * (1.0 - b * b);
  const Scalar det =
      1.0 - a * a - b * b - std::norm(canon.z) + 2.0 * a * b * canon.z.real();
  if (std::abs(det) > 1e-6) throw NotBoundary("dyad_decompose: determinant is not zero");

  DyadDecomposition out;
  if (rho2 < 1e-18) {
    // b ~ 1 pins the third coordinate; split the second along a vertical chord
    const Scalar s = std::sqrt(std::max(1.0 - a * a, 0.0));
    out.lambda = 0.5;
    out.theta1 = uncanonicalize(canon, Complex(a, s), Complex(1, 0));
    out.theta2 = uncanonicalize(canon, Complex(a, -s), Complex(1, 0));
  } else if (b < 1e-12) {
    // a = b = 0: z lies on the unit circle, antipodal chords work
    const Scalar phi = std::arg(canon.z);
    out.lambda = 0.5;
    out.theta1 = uncanonicalize(canon, Complex(1, 0), std::polar(1.0, phi));
    out.theta2 = uncanonicalize(canon, Complex(-1, 0), -std::polar(1.0, phi));
  } else {
    // search the chord angle whose induced construction reproduces arg(z - ab)
    const Complex offset = canon.z - Complex(a * b, 0.0);
    const Scalar phi_target = std::abs(offset) < 1e-300 ? 0.0 : std::arg(offset);

    auto g = [&](Scalar phi1) {
      const ChordState st = chord_at(a, b, phi1);
      return wrap_signed(st.phi2 - phi1 - phi_target);
    };

    const int n_grid = 1440;
    Scalar best_lo = 0.0, best_hi = 0.0;
    bool bracketed = false;
    Scalar prev_phi1 = 0.0, prev_h = g(0.0);
    Scalar closest = std::abs(prev_h), closest_phi1 = 0.0;
    for (int k = 1; k <= n_grid && !bracketed; ++k) {
      const Scalar phi1 = kTwoPi * k / n_grid;
      const Scalar h = g(phi1);
      if (std::abs(h) < closest) {
        closest = std::abs(h);
        closest_phi1 = phi1;
      }
      // genuine crossing, not a +-pi branch jump
      if ((prev_h == 0.0 || (prev_h < 0) != (h < 0)) && std::abs(prev_h) + std::abs(h) < M_PI) {
        best_lo = prev_phi1;
        best_hi = phi1;
        bracketed = true;
      }
      prev_phi1 = phi1;
      prev_h = h;
    }

    Scalar phi1_star = closest_phi1;
    if (bracketed) {
      Scalar lo = best_lo, hi = best_hi;
      Scalar h_lo = g(lo);
      for (int it = 0; it < 80; ++it) {
        const Scalar mid = 0.5 * (lo + hi);
        const Scalar h_mid = g(mid);
        if (h_mid == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((h_mid < 0) == (h_lo < 0)) {
          lo = mid;
          h_lo = h_mid;
        } else {
          hi = mid;
        }
      }
      phi1_star = 0.5 * (lo + hi);
    }

    const ChordState st = chord_at(a, b, phi1_star);
    auto on_circle = [](Complex w) { return w / std::abs(w); };
    const Complex dir = std::polar(1.0, phi1_star);
    const Complex e_alpha = on_circle(Complex(a, 0) + st.tau_plus * dir);
    const Complex e_gamma = on_circle(Complex(a, 0) + st.tau_minus * dir);
    const Complex e_beta = on_circle(Complex(b, 0) + st.reach_b * std::polar(1.0, st.phi2));
    const Complex e_delta = on_circle((Complex(b, 0) - st.lambda * e_beta) / (1.0 - st.lambda));
    out.lambda = st.lambda;
    out.theta1 = uncanonicalize(canon, e_alpha, e_beta);
    out.theta2 = uncanonicalize(canon, e_gamma, e_delta);
  }
  return out;
}

InteriorSplit dyad_split_interior(const CMat& Phi) {
  check_input(Phi);
  Canonical canon = canonicalize(Phi);
  const Scalar a = canon.a, b = canon.b;
  const Scalar rho2 = (1.0 - a * a) * (1.0 - b * b);
  const Scalar x = canon.z.real() - a * b;
  const Scalar y = canon.z.imag();
  if (x * x + y * y >= rho2) throw NotBoundary("dyad_split_interior: matrix is not interior");

  const Scalar half = std::sqrt(rho2 - y * y);
  const Complex z_plus = Complex(a * b + half, y);
  const Complex z_minus = Complex(a * b - half, y);

  auto rebuild = [&](Complex z_new) {
    CMat canon_phi(3, 3);
    canon_phi << Complex(1, 0), Complex(a, 0), Complex(b, 0),  //
        Complex(a, 0), Complex(1, 0), std::conj(z_new),        //
        Complex(b, 0), z_new, Complex(1, 0);
    CMat D = CMat::Identity(3, 3);
    D(1, 1) = canon.phase1;
    D(2, 2) = canon.phase2;
    CMat back = D.adjoint() * canon_phi * D;  // invert Phi' = D Phi D^H
    if (canon.swapped) {
      CMat Q = back;
      const int perm[3] = {0, 2, 1};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) back(perm[i], perm[j]) = Q(i, j);
    }
    return back;
  };

  InteriorSplit split;
  split.boundary_a = rebuild(z_plus);
  split.boundary_b = rebuild(z_minus);
  split.weight_a = (x + half) / (2.0 * half);
  return split;
}

std::vector<std::pair<CVec, Scalar>> dyad_decompose_full(const CMat& Phi) {
  check_input(Phi);
  const Scalar det = Phi.determinant().real();
  std::vector<std::pair<CVec, Scalar>> out;
  if (std::abs(det) <= 1e-7) {
    DyadDecomposition d = dyad_decompose(Phi);
    out.emplace_back(d.theta1, d.lambda);
    out.emplace_back(d.theta2, 1.0 - d.lambda);
    return out;
  }
  InteriorSplit split = dyad_split_interior(Phi);
  DyadDecomposition da = dyad_decompose(split.boundary_a);
  DyadDecomposition db = dyad_decompose(split.boundary_b);
  out.emplace_back(da.theta1, split.weight_a * da.lambda);
  out.emplace_back(da.theta2, split.weight_a * (1.0 - da.lambda));
  out.emplace_back(db.theta1, (1.0 - split.weight_a) * db.lambda);
  out.emplace_back(db.theta2, (1.0 - split.weight_a) * (1.0 - db.lambda));
  return out;
}

}  // namespace sdrloc
