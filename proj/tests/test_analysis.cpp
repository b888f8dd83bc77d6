#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "sdrloc/analysis.hpp"
#include "sdrloc/rng.hpp"
#include "sdrloc/scenario.hpp"
#include "sdrloc/slcp.hpp"

using namespace sdrloc;

namespace {

CVec unit_theta(RngStream& rng, int m, bool pin_first = false) {
  CVec theta(m);
  for (int i = 0; i < m; ++i) theta(i) = std::polar(1.0, rng.uniform(0.0, 2 * M_PI));
  if (pin_first) theta(0) = Complex(1, 0);
  return theta;
}

CMat random_boundary_matrix(RngStream& rng) {
  const Scalar a = rng.uniform(0.0, 0.97);
  const Scalar b = rng.uniform(a, 0.97);
  const Scalar phi = rng.uniform(0.0, 2 * M_PI);
  const Scalar rho = std::sqrt((1 - a * a) * (1 - b * b));
  const Complex z = Complex(a * b, 0) + rho * std::polar(1.0, phi);
  CMat canon(3, 3);
  canon << Complex(1, 0), Complex(a, 0), Complex(b, 0),  //
      Complex(a, 0), Complex(1, 0), std::conj(z),        //
      Complex(b, 0), z, Complex(1, 0);
  // hide the canonical structure behind a random diagonal rotation
  CMat D = CMat::Identity(3, 3);
  D(1, 1) = std::polar(1.0, rng.uniform(0.0, 2 * M_PI));
  D(2, 2) = std::polar(1.0, rng.uniform(0.0, 2 * M_PI));
  return D * canon * D.adjoint();
}

Scalar reconstruction_error(const CMat& Phi, const DyadDecomposition& d) {
  const CMat rebuilt = d.lambda * (d.theta1 * d.theta1.adjoint()) +
                       (1 - d.lambda) * (d.theta2 * d.theta2.adjoint());
  return (Phi - rebuilt).norm();
}

}  // namespace

TEST_CASE("sample_set_points: degenerate diagonal segment") {
  CVec c(2);
  c << Complex(1, 0), Complex(1, 0);
  Vec r(2);
  r << 1, 1;
  RngStream rng(2);
  auto pts = sample_set_points(c, r, 2000, rng);
  for (const auto& [u, v] : pts) {
    CHECK(u == doctest::Approx(v).epsilon(1e-12));
    CHECK(u >= -1e-12);
    CHECK(u <= 4.0 + 1e-12);
  }
}

TEST_CASE("sample_set_points: generic m=2 ellipse center") {
  CVec c(2);
  c << Complex(0.8, 0.4), Complex(-0.3, 1.1);
  Vec r(2);
  r << 1.4, 0.7;
  RngStream rng(5);
  auto pts = sample_set_points(c, r, 400000, rng);
  Scalar mu = 0, mv = 0;
  for (const auto& [u, v] : pts) {
    mu += u;
    mv += v;
  }
  mu /= pts.size();
  mv /= pts.size();
  CHECK(mu == doctest::Approx(std::norm(c(0)) + std::norm(c(1))).epsilon(0.01));
  CHECK(mv == doctest::Approx(r(0) * r(0) + r(1) * r(1)).epsilon(0.01));
}

TEST_CASE("sample_set_points: zero ranges pin v to zero") {
  CVec c(3);
  c << Complex(1, 0), Complex(0, 1), Complex(1, 1);
  Vec r = Vec::Zero(3);
  RngStream rng(7);
  for (const auto& [u, v] : sample_set_points(c, r, 500, rng)) {
    (void)u;
    CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("trace_hull endpoints match the alignment bounds") {
  RngStream rng(11);
  CVec c(3);
  Vec r(3);
  for (int i = 0; i < 3; ++i) {
    c(i) = Complex(rng.uniform(-2, 2), rng.uniform(-2, 2));
    r(i) = rng.uniform(0.5, 2.0);
  }
  HullTrace trace = trace_hull(c, r, 40);
  REQUIRE(trace.failures == 0);
  const Scalar u_best = std::pow(c.cwiseAbs().sum(), 2);
  const Scalar v_best = std::pow(r.sum(), 2);
  CHECK(trace.points.front().u == doctest::Approx(u_best).epsilon(1e-6));
  CHECK(trace.points.back().v == doctest::Approx(v_best).epsilon(1e-6));
}

TEST_CASE("traced support values dominate sampled image points") {
  RngStream rng(13);
  CVec c(3);
  Vec r(3);
  for (int i = 0; i < 3; ++i) {
    c(i) = Complex(rng.uniform(-2, 2), rng.uniform(-2, 2));
    r(i) = rng.uniform(0.5, 2.0);
  }
  HullTrace trace = trace_hull(c, r, 30);
  auto samples = sample_set_points(c, r, 100000, rng);
  for (const auto& p : trace.points) {
    REQUIRE(p.ok);
    const Scalar support = std::cos(p.beta) * p.u + std::sin(p.beta) * p.v;
    Scalar best = 0;
    for (const auto& [u, v] : samples)
      best = std::max(best, std::cos(p.beta) * u + std::sin(p.beta) * v);
    CHECK(support >= best - 1e-6 * std::max(1.0, best));
  }
}

TEST_CASE("convexity test flags the anti-aligned segment and passes an ellipse") {
  // anti-aligned c: the upper-right boundary is a line segment -> gap
  CVec c_flat(2);
  c_flat << Complex(1, 0), Complex(-1, 0);
  Vec r(2);
  r << 1.0, 2.0;
  HullTrace flat = trace_hull(c_flat, r, 100);
  ConvexityOutcome flat_out = convexity_test(flat, 0.02);
  CHECK_FALSE(flat_out.passed);
  CHECK(flat_out.gaps.size() >= 1);

  // generic phase offset: smooth strictly-convex arc -> no gap
  CVec c_round(2);
  c_round << Complex(1, 0), Complex(0, 1);
  HullTrace round = trace_hull(c_round, r, 100);
  ConvexityOutcome round_out = convexity_test(round, 0.05);
  CHECK(round_out.passed);
}

TEST_CASE("m=2 trace lies on the closed-form ellipse") {
  CVec c(2);
  c << Complex(1.2, 0.4), Complex(0.5, -0.9);
  Vec r(2);
  r << 1.1, 1.7;
  const Scalar cu = std::norm(c(0)) + std::norm(c(1));
  const Scalar ru = 2 * std::abs(c(0)) * std::abs(c(1));
  const Scalar alpha = std::arg(c(0)) - std::arg(c(1));
  const Scalar cv = r(0) * r(0) + r(1) * r(1);
  const Scalar rv = 2 * r(0) * r(1);

  HullOptions opt;
  opt.solver.tolerance = 1e-11;
  HullTrace trace = trace_hull(c, r, 60, opt);
  const Scalar scale = cu + ru + cv + rv;
  for (const auto& p : trace.points) {
    REQUIRE(p.ok);
    // geometric distance to the curve u = cu + ru cos(phi + alpha),
    // v = cv + rv cos(phi)
    Scalar best = 1e30;
    for (int k = 0; k < 200000; ++k) {
      const Scalar phi = 2 * M_PI * k / 200000;
      const Scalar du = p.u - (cu + ru * std::cos(phi + alpha));
      const Scalar dv = p.v - (cv + rv * std::cos(phi));
      best = std::min(best, std::hypot(du, dv));
    }
    CHECK(best <= 1e-5 * scale);
  }
}

TEST_CASE("tightness_stats counting") {
  auto mk = [](Scalar x, Scalar y, Scalar ratio) {
    LocalizationResult res;
    res.position = Vec(2);
    res.position << x, y;
    res.eig_ratio = ratio;
    res.solver_status = SolverStatus::Optimal;
    return res;
  };
  std::vector<Vec> truths(3, Vec::Zero(2));

  std::vector<LocalizationResult> all_tight{mk(3, 4, 1e4), mk(0, 0, 1e4), mk(0, 1, 200)};
  TightnessStats s1 = tightness_stats(all_tight, truths);
  CHECK(s1.n_tight == 3);
  REQUIRE(s1.rmse_tight.has_value());
  CHECK(*s1.rmse_tight == doctest::Approx(s1.rmse_all));

  std::vector<LocalizationResult> none_tight{mk(3, 4, 5), mk(0, 0, 2), mk(0, 1, 1)};
  TightnessStats s2 = tightness_stats(none_tight, truths);
  CHECK(s2.n_tight == 0);
  CHECK_FALSE(s2.rmse_tight.has_value());
  CHECK(s2.rmse_all == doctest::Approx(std::sqrt((25.0 + 0.0 + 1.0) / 3.0)));

  std::vector<LocalizationResult> mixed{mk(3, 4, 1e3), mk(1, 0, 5), mk(0, 1, 1e3)};
  TightnessStats s3 = tightness_stats(mixed, truths);
  CHECK(s3.n_tight == 2);
  CHECK(*s3.rmse_tight == doctest::Approx(std::sqrt((25.0 + 1.0) / 2.0)));
}

TEST_CASE("dyad_decompose: matrix that is already a dyad") {
  RngStream rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    CVec theta = unit_theta(rng, 3);
    CMat Phi = theta * theta.adjoint();
    DyadDecomposition d = dyad_decompose(Phi);
    CHECK(reconstruction_error(Phi, d) <= 1e-8);
    CHECK(d.lambda >= 0.0);
    CHECK(d.lambda <= 1.0);
  }
}

TEST_CASE("dyad_decompose: zero off-diagonal case uses antipodal chords") {
  const Scalar phi = 1.234;
  CMat Phi(3, 3);
  Phi << Complex(1, 0), Complex(0, 0), Complex(0, 0),       //
      Complex(0, 0), Complex(1, 0), std::polar(1.0, -phi),  //
      Complex(0, 0), std::polar(1.0, phi), Complex(1, 0);
  DyadDecomposition d = dyad_decompose(Phi);
  CHECK(d.lambda == doctest::Approx(0.5));
  CHECK(reconstruction_error(Phi, d) <= 1e-10);
}

TEST_CASE("dyad_decompose: random boundary matrices round trip") {
  RngStream rng(17);
  Scalar worst = 0;
  for (int trial = 0; trial < 300; ++trial) {
    CMat Phi = random_boundary_matrix(rng);
    DyadDecomposition d = dyad_decompose(Phi);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(std::abs(d.theta1(i)) - 1.0) < 1e-9);
      CHECK(std::abs(std::abs(d.theta2(i)) - 1.0) < 1e-9);
    }
    worst = std::max(worst, reconstruction_error(Phi, d));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("dyad_decompose input validation") {
  CMat interior = CMat::Identity(3, 3);
  CHECK_THROWS_AS(dyad_decompose(interior), NotBoundary);

  CMat bad_diag = CMat::Identity(3, 3) * Complex(2, 0);
  CHECK_THROWS_AS(dyad_decompose(bad_diag), NotUnitDiagonal);

  CHECK_THROWS_AS(dyad_decompose(CMat::Identity(4, 4)), DimensionMismatch);
}

TEST_CASE("chord identity: AR * AS = 1 - a^2") {
  RngStream rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const Scalar a = rng.uniform(0.0, 0.999);
    const Scalar phi = rng.uniform(0.0, 2 * M_PI);
    // intersect the chord through (a, 0) with direction phi with the circle
    const Scalar ca = a * std::cos(phi);
    const Scalar disc = std::sqrt(ca * ca + 1 - a * a);
    const Scalar ar = -ca + disc;  // distance to one intersection
    const Scalar as = ca + disc;   // distance to the other
    CHECK(std::abs(ar * as - (1 - a * a)) <= 1e-12);
    // both endpoints really are on the unit circle
    const Complex R = Complex(a, 0) + ar * std::polar(1.0, phi);
    const Complex S = Complex(a, 0) - as * std::polar(1.0, phi);
    CHECK(std::abs(std::abs(R) - 1.0) <= 1e-12);
    CHECK(std::abs(std::abs(S) - 1.0) <= 1e-12);
  }
}

TEST_CASE("interior matrices split into four dyads") {
  RngStream rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    // random interior matrix: shrink the circle offset of a boundary one
    const Scalar a = rng.uniform(0.0, 0.9);
    const Scalar b = rng.uniform(a, 0.9);
    const Scalar rho = std::sqrt((1 - a * a) * (1 - b * b));
    const Complex z = Complex(a * b, 0) +
                      rng.uniform(0.1, 0.8) * rho * std::polar(1.0, rng.uniform(0.0, 2 * M_PI));
    CMat Phi(3, 3);
    Phi << Complex(1, 0), Complex(a, 0), Complex(b, 0),  //
        Complex(a, 0), Complex(1, 0), std::conj(z),      //
        Complex(b, 0), z, Complex(1, 0);

    auto dyads = dyad_decompose_full(Phi);
    CHECK(dyads.size() == 4);
    CMat rebuilt = CMat::Zero(3, 3);
    Scalar total = 0;
    for (const auto& [theta, w] : dyads) {
      CHECK(w >= -1e-12);
      total += w;
      rebuilt += w * (theta * theta.adjoint());
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((Phi - rebuilt).norm() <= 1e-8);
  }
}

TEST_CASE("windowed convexity test only sees gaps near the given direction") {
  CVec c_flat(2);
  c_flat << Complex(1, 0), Complex(-1, 0);
  Vec r(2);
  r << 1.0, 2.0;
  HullTrace flat = trace_hull(c_flat, r, 100);
  ConvexityOutcome full = convexity_test(flat, 0.02);
  REQUIRE_FALSE(full.passed);
  const Scalar gap_beta = full.gaps.front().beta;

  ConvexityOutcome near = convexity_test_near(flat, 0.02, gap_beta, 0.05);
  CHECK_FALSE(near.passed);
  const Scalar far_beta = gap_beta > 0.7 ? gap_beta - 0.6 : gap_beta + 0.6;
  ConvexityOutcome away = convexity_test_near(flat, 0.02, far_beta, 0.05);
  CHECK(away.passed);
}
