#pragma once

#include <cstdint>
#include <vector>

#include "sdrloc/rng.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// Adds measurement noise to exact ranges. A sample that would drive a range
/// non-positive is redrawn (up to 100 times, then NonPositiveRange).
Vec apply_noise(const Vec& true_ranges, const NoiseModel& noise, RngStream& rng);

/// Draws anchors and source i.i.d. uniform on [-box_half_width, box_half_width]^n
/// and attaches noisy measurements. Pure function of its arguments.
Scenario generate_scenario(int m, int n, Scalar box_half_width, const NoiseModel& noise,
                           std::uint64_t seed);

/// sqrt of the mean squared position error over paired runs.
Scalar rmse(const std::vector<Vec>& estimates, const std::vector<Vec>& truths);

/// Column means of a k x n point matrix, k >= 1.
Vec centroid(const Mat& points);

}  // namespace sdrloc
