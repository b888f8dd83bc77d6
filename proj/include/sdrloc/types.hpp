#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sdrloc/errors.hpp"

namespace sdrloc {

using Scalar  = double;
using Complex = std::complex<Scalar>;
using Vec     = Eigen::VectorXd;
using Mat     = Eigen::MatrixXd;
using CVec    = Eigen::VectorXcd;
using CMat    = Eigen::MatrixXcd;

/// Known sensor positions, one anchor per row (m x n, n >= 2).
class AnchorSet {
 public:
  explicit AnchorSet(Mat positions);
  const Mat& positions() const { return positions_; }
  int count() const { return static_cast<int>(positions_.rows()); }
  int dim() const { return static_cast<int>(positions_.cols()); }
  Vec anchor(int i) const { return positions_.row(i).transpose(); }

 private:
  Mat positions_;
};

/// Strictly positive, finite range measurements, one per anchor.
class RangeVector {
 public:
  explicit RangeVector(Vec values);
  const Vec& values() const { return values_; }
  int count() const { return static_cast<int>(values_.size()); }
  Scalar operator[](int i) const { return values_(i); }

 private:
  Vec values_;
};

struct GaussianNoise {
  Scalar sigma = 0.0;
};

// sigma is the standard deviation; the underlying scale is sigma/sqrt(2).
struct LaplacianNoise {
  Scalar sigma = 0.0;
};

// Gaussian noise on every range plus a half-normal offset on one
// uniformly chosen range.
struct SelectiveGaussianNoise {
  Scalar sigma_base = 0.0;
  Scalar sigma_outlier = 0.0;
};

using NoiseModel = std::variant<GaussianNoise, LaplacianNoise, SelectiveGaussianNoise>;

void validate_noise(const NoiseModel& noise);
std::string noise_model_name(const NoiseModel& noise);

struct Scenario {
  AnchorSet anchors;
  Vec source;
  RangeVector true_ranges;
  RangeVector measured_ranges;
  NoiseModel noise;
  std::uint64_t seed = 0;
};

enum class SolverStatus { Optimal, Inaccurate, Failed };
enum class FailureKind { None, Infeasible, Unbounded, Numerical };

std::string to_string(SolverStatus status);
std::string to_string(FailureKind kind);

struct LocalizationResult {
  Vec position;
  Mat relaxation_matrix;
  Scalar eig_ratio = 1.0;
  Scalar objective = 0.0;
  SolverStatus solver_status = SolverStatus::Failed;
  FailureKind failure = FailureKind::None;
  int iterations = 0;
  std::vector<std::string> warnings;

  bool tight(Scalar ratio_threshold = 100.0) const { return eig_ratio >= ratio_threshold; }
};

}  // namespace sdrloc
