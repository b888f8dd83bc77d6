#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdrloc/sdp.hpp"
#include "sdrloc/slcp.hpp"
#include "sdrloc/sll1.hpp"
#include "sdrloc/slnn.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// One noise family evaluated over a list of parameter values. For the
/// selective model the parameter is the outlier deviation and sigma_base is
/// the common noise floor.
struct NoiseGrid {
  std::string model = "gaussian";  // gaussian | laplacian | selective_gaussian
  Scalar sigma_base = 0.04;
  std::vector<Scalar> params;

  NoiseModel instantiate(Scalar param) const;
};

struct ExperimentConfig {
  int m = 5;
  int n = 2;
  Scalar box_half_width = 10.0;
  NoiseGrid noise;
  std::vector<std::string> algorithms;  // slcp slnn srls sll1-ad sll1-md sll1-sd
  int runs = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
  SlcpOptions slcp;
  SlnnOptions slnn;
  Sll1Settings sll1;
  std::string output_dir;

  void validate() const;
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct AlgoNoiseReport {
  std::string algorithm;
  std::string noise_model;
  Scalar noise_param = 0.0;
  int runs = 0;
  Scalar rmse_all = 0.0;
  std::optional<Scalar> rmse_tight;
  int n_tight = 0;
  Scalar mean_iterations = 0.0;
  Scalar mean_solve_time = 0.0;  // seconds
  int failure_count = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<AlgoNoiseReport> rows;

  std::string to_json() const;   // deterministic: no wall-clock fields
  std::string to_csv() const;    // deterministic: no wall-clock fields
  std::string timing_csv() const;
  std::string to_table() const;
};

/// Runs the Monte Carlo grid: per run one scenario shared by every selected
/// algorithm; deterministic given (config, seed) regardless of job count.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Per-run estimates for paired tests (row-major: [noise][algorithm][run]).
struct PairedRuns {
  std::vector<Vec> truths;
  // errors[noise_idx][algo_idx][run]; NaN marks a failed run
  std::vector<std::vector<std::vector<Scalar>>> errors;
};

ExperimentReport run_experiment(const ExperimentConfig& config, PairedRuns* paired);

}  // namespace sdrloc
