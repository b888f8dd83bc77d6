#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "sdrloc/analysis.hpp"
#include "sdrloc/baseline.hpp"
#include "sdrloc/experiment.hpp"
#include "sdrloc/io.hpp"
#include "sdrloc/slcp.hpp"
#include "sdrloc/slnn.hpp"
#include "sdrloc/sll1.hpp"

using namespace sdrloc;

namespace {

constexpr int kExitSolveFailed = 1;
constexpr int kExitUsage = 2;

int cmd_simulate(const std::string& config_path, std::uint64_t seed_override,
                 const std::string& algos_override, const std::string& out_dir, int jobs) {
  ExperimentConfig config = ExperimentConfig::from_json(read_text_file(config_path));
  if (seed_override) config.seed = seed_override;
  if (!algos_override.empty()) {
    config.algorithms.clear();
    std::stringstream ss(algos_override);
    std::string item;
    while (std::getline(ss, item, ',')) config.algorithms.push_back(item);
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (jobs > 0) config.jobs = jobs;
  config.validate();

  ExperimentReport report = run_experiment(config);
  std::cout << report.to_table();
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    write_text_file(config.output_dir + "/report.json", report.to_json());
    write_text_file(config.output_dir + "/report.csv", report.to_csv());
    write_text_file(config.output_dir + "/timing.csv", report.timing_csv());
    std::cout << "report written to " << config.output_dir << "/report.{json,csv}\n";
  }
  return 0;
}

int cmd_localize(const std::string& anchors_path, const std::string& ranges_path,
                 const std::string& algorithm, bool m3_grid, Scalar tolerance) {
  AnchorSet anchors(read_anchors_csv(anchors_path));
  RangeVector ranges(read_ranges_csv(ranges_path));
  if (ranges.count() != anchors.count())
    throw DimensionMismatch("anchor and range counts differ");

  LocalizationResult result;
  if (algorithm == "slcp") {
    SlcpOptions opt;
    opt.grid_search_m3 = m3_grid;
    if (tolerance > 0) opt.solver.tolerance = tolerance;
    result = solve_slcp(anchors, ranges, opt);
  } else if (algorithm == "slnn") {
    SlnnOptions opt;
    if (tolerance > 0) opt.solver.tolerance = tolerance;
    result = solve_slnn(anchors, ranges, opt);
  } else if (algorithm == "srls") {
    SrlsResult srls_res = srls_detailed(anchors, ranges);
    result.position = srls_res.position;
    result.solver_status = SolverStatus::Optimal;
    result.eig_ratio = 1.0;
    if (srls_res.fallback) result.warnings.push_back("bisection fallback to unconstrained fit");
  } else if (algorithm == "sll1-ad" || algorithm == "sll1-md" || algorithm == "sll1-sd") {
    Sll1Settings settings;
    if (tolerance > 0) settings.solver.tolerance = tolerance;
    if (algorithm == "sll1-ad") result = sll1_ad(anchors, ranges, settings);
    if (algorithm == "sll1-md") result = sll1_md(anchors, ranges, settings);
    if (algorithm == "sll1-sd") result = sll1_sd(anchors, ranges, settings);
  } else {
    throw std::invalid_argument("unknown algorithm: " + algorithm);
  }

  std::cout << localization_result_to_json(result) << "\n";
  return result.solver_status == SolverStatus::Failed ? kExitSolveFailed : 0;
}

int cmd_hull(const std::string& anchors_path, const std::string& ranges_path, int n_betas,
             int n_samples, Scalar threshold, bool full_sweep, const std::string& out_dir,
             std::uint64_t seed) {
  AnchorSet anchors(read_anchors_csv(anchors_path));
  if (anchors.dim() != 2) throw DimensionMismatch("hull tracing requires 2-D anchors");
  RangeVector ranges(read_ranges_csv(ranges_path));
  if (ranges.count() != anchors.count())
    throw DimensionMismatch("anchor and range counts differ");

  SlcpData data = build_slcp(anchors, ranges);
  // equilibrated axes: trace the set of (|c^H t|^2/|c|^2, |r^T t|^2/|r|^2)
  const CVec ch = data.c / data.c.norm();
  const Vec rh = data.r / data.r.norm();

  HullOptions options;
  options.gap_rel_threshold = threshold;
  options.full_sweep = full_sweep;
  HullTrace trace = trace_hull(ch, rh, n_betas, options);
  ConvexityOutcome outcome = convexity_test(trace, threshold);

  RngStream rng(seed);
  auto samples = sample_set_points(ch, rh, n_samples, rng);

  std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
  const std::string base = out_dir.empty() ? "." : out_dir;
  write_text_file(base + "/hull_trace.csv", hull_trace_to_csv(trace));
  write_text_file(base + "/hull_samples.csv", samples_to_csv(samples));

  std::printf("traced %d directions (%d solver failures), diameter %.6g\n",
              static_cast<int>(trace.points.size()), trace.failures, trace.diameter);
  if (full_sweep)
    std::printf("note: full sweep beyond the first quadrant relies on the conjectural hull\n");
  std::printf("convexity test: %s (%zu gap%s)\n", outcome.passed ? "PASS" : "FAIL",
              outcome.gaps.size(), outcome.gaps.size() == 1 ? "" : "s");
  for (const auto& gap : outcome.gaps)
    std::printf("  gap at beta %.6f: normalized jump %.4f\n", gap.beta, gap.distance);
  std::printf("files: %s/hull_trace.csv %s/hull_samples.csv\n", base.c_str(), base.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-based source localization via semidefinite relaxation"};
  app.require_subcommand(1);

  std::string config_path, anchors_path, ranges_path, out_dir;
  std::string algorithm = "slnn", algos_override;
  std::uint64_t seed = 0;
  int jobs = 0, n_betas = 200, n_samples = 20000;
  Scalar tolerance = 0, threshold = 0.02;
  bool m3_grid = false, full_sweep = false;

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment grid");
  simulate->add_option("--config", config_path, "experiment config (JSON)")->required();
  simulate->add_option("--seed", seed, "override the config seed");
  simulate->add_option("--algos", algos_override, "comma-separated algorithm list");
  simulate->add_option("--out", out_dir, "output directory for report.{json,csv}");
  simulate->add_option("--jobs", jobs, "worker threads");

  auto* localize = app.add_subcommand("localize", "estimate a source position from files");
  localize->add_option("--anchors", anchors_path, "CSV, one anchor per row")->required();
  localize->add_option("--ranges", ranges_path, "CSV, ranges on one row")->required();
  localize->add_option("--algo", algorithm, "slcp|slnn|srls|sll1-ad|sll1-md|sll1-sd");
  localize->add_flag("--m3-grid-search", m3_grid, "exhaustive rotation search (slcp, m=3)");
  localize->add_option("--tol", tolerance, "solver tolerance override");

  auto* hull = app.add_subcommand("hull", "trace the relaxed image-set boundary");
  hull->add_option("--anchors", anchors_path, "CSV, one anchor per row")->required();
  hull->add_option("--ranges", ranges_path, "CSV, ranges on one row")->required();
  hull->add_option("--n-betas", n_betas, "direction grid size");
  hull->add_option("--samples", n_samples, "number of sampled image points");
  hull->add_option("--threshold", threshold, "gap threshold relative to the trace diameter");
  hull->add_flag("--full", full_sweep, "sweep all four quadrants (conjectural hull)");
  hull->add_option("--out", out_dir, "output directory for CSV files");
  hull->add_option("--seed", seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, seed, algos_override, out_dir, jobs);
    if (localize->parsed()) return cmd_localize(anchors_path, ranges_path, algorithm, m3_grid, tolerance);
    if (hull->parsed())
      return cmd_hull(anchors_path, ranges_path, n_betas, n_samples, threshold, full_sweep,
                      out_dir, seed ? seed : 12345);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
