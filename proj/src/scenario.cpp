#include "sdrloc/scenario.hpp"

#include <cmath>
#include <string>

namespace sdrloc {

AnchorSet::AnchorSet(Mat positions) : positions_(std::move(positions)) {
  if (positions_.rows() < 1) throw DimensionMismatch("AnchorSet: need at least one anchor");
  if (positions_.cols() < 2) throw DimensionMismatch("AnchorSet: ambient dimension must be >= 2");
  if (!positions_.allFinite()) throw std::invalid_argument("AnchorSet: non-finite entry");
}

RangeVector::RangeVector(Vec values) : values_(std::move(values)) {
  if (values_.size() < 1) throw DimensionMismatch("RangeVector: empty");
  if (!values_.allFinite()) throw std::invalid_argument("RangeVector: non-finite entry");
  if ((values_.array() <= 0.0).any()) throw NonPositiveRange("RangeVector: ranges must be positive");
}

void validate_noise(const NoiseModel& noise) {
  std::visit(
      [](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, GaussianNoise> || std::is_same_v<T, LaplacianNoise>) {
          if (!(model.sigma >= 0.0)) throw std::invalid_argument("noise: sigma must be >= 0");
        } else {
          if (!(model.sigma_base >= 0.0) || !(model.sigma_outlier >= 0.0))
            throw std::invalid_argument("noise: sigmas must be >= 0");
        }
      },
      noise);
}

std::string noise_model_name(const NoiseModel& noise) {
  if (std::holds_alternative<GaussianNoise>(noise)) return "gaussian";
  if (std::holds_alternative<LaplacianNoise>(noise)) return "laplacian";
  return "selective_gaussian";
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Optimal: return "Optimal";
    case SolverStatus::Inaccurate: return "Inaccurate";
    default: return "Failed";
  }
}

std::string to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::None: return "None";
    case FailureKind::Infeasible: return "Infeasible";
    case FailureKind::Unbounded: return "Unbounded";
    default: return "Numerical";
  }
}

namespace {

constexpr int kMaxNoiseRetries = 100;

// Draws one additive sample until range + sample stays positive.
template <typename DrawFn>
Scalar draw_positive(Scalar range, DrawFn&& draw) {
  for (int attempt = 0; attempt < kMaxNoiseRetries; ++attempt) {
    const Scalar candidate = range + draw();
    if (candidate > 0.0) return candidate;
  }
  throw NonPositiveRange("apply_noise: range stayed non-positive after retries");
}

}  // namespace

Vec apply_noise(const Vec& true_ranges, const NoiseModel& noise, RngStream& rng) {
  validate_noise(noise);
  const int m = static_cast<int>(true_ranges.size());
  Vec out(m);
  if (const auto* gaussian = std::get_if<GaussianNoise>(&noise)) {
    for (int i = 0; i < m; ++i)
      out(i) = draw_positive(true_ranges(i), [&] { return rng.normal(gaussian->sigma); });
  } else if (const auto* laplacian = std::get_if<LaplacianNoise>(&noise)) {
    for (int i = 0; i < m; ++i)
      out(i) = draw_positive(true_ranges(i), [&] { return rng.laplace(laplacian->sigma); });
  } else {
    const auto& selective = std::get<SelectiveGaussianNoise>(noise);
    for (int i = 0; i < m; ++i)
      out(i) = draw_positive(true_ranges(i), [&] { return rng.normal(selective.sigma_base); });
    const int contaminated = rng.uniform_index(m);
    out(contaminated) += std::abs(rng.normal(selective.sigma_outlier));
  }
  return out;
}

Scenario generate_scenario(int m, int n, Scalar box_half_width, const NoiseModel& noise,
                           std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("generate_scenario: m must be >= 1");
  if (n != 2 && n != 3) throw std::invalid_argument("generate_scenario: n must be 2 or 3");
  if (!(box_half_width > 0.0)) throw std::invalid_argument("generate_scenario: box_half_width must be > 0");
  validate_noise(noise);

  RngStream rng(seed);
  for (int attempt = 0; attempt < kMaxNoiseRetries; ++attempt) {
    Mat anchors(m, n);
    for (int i = 0; i < m; ++i)
      for (int d = 0; d < n; ++d) anchors(i, d) = rng.uniform(-box_half_width, box_half_width);
    Vec source(n);
    for (int d = 0; d < n; ++d) source(d) = rng.uniform(-box_half_width, box_half_width);

    Vec exact(m);
    for (int i = 0; i < m; ++i) exact(i) = (source - anchors.row(i).transpose()).norm();
    // a source sitting on an anchor has no usable range; redraw the layout
    if (exact.minCoeff() <= 1e-9 * box_half_width) continue;

    Vec measured = apply_noise(exact, noise, rng);
    return Scenario{AnchorSet(std::move(anchors)), std::move(source), RangeVector(std::move(exact)),
                    RangeVector(std::move(measured)), noise, seed};
  }
  throw std::runtime_error("generate_scenario: could not draw a non-degenerate layout");
}

Scalar rmse(const std::vector<Vec>& estimates, const std::vector<Vec>& truths) {
  if (estimates.size() != truths.size())
    throw LengthMismatch("rmse: estimate/truth counts differ");
  if (estimates.empty()) throw LengthMismatch("rmse: empty input");
  Scalar sum_sq = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (estimates[i].size() != truths[i].size())
      throw LengthMismatch("rmse: dimension mismatch at pair " + std::to_string(i));
    sum_sq += (estimates[i] - truths[i]).squaredNorm();
  }
  return std::sqrt(sum_sq / static_cast<Scalar>(estimates.size()));
}

Vec centroid(const Mat& points) {
  if (points.rows() < 1) throw DimensionMismatch("centroid: need at least one point");
  return points.colwise().mean().transpose();
}

}  // namespace sdrloc
