#include "sdrloc/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "sdrloc/baseline.hpp"
#include "sdrloc/scenario.hpp"
#include "sdrloc/slnn.hpp"

namespace sdrloc {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kKnownAlgorithms = {"slcp", "slnn",    "srls",
                                                   "sll1-ad", "sll1-md", "sll1-sd"};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ull * (key + 0x632BE59BD9B4E019ull));
  return splitmix64_next(state);
}

}  // namespace

NoiseModel NoiseGrid::instantiate(Scalar param) const {
  if (model == "gaussian") return GaussianNoise{param};
  if (model == "laplacian") return LaplacianNoise{param};
  if (model == "selective_gaussian") return SelectiveGaussianNoise{sigma_base, param};
  throw std::invalid_argument("unknown noise model: " + model);
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("config: no algorithms selected");
  if (noise.params.empty()) throw std::invalid_argument("config: empty noise grid");
  if (m < 1 || (n != 2 && n != 3)) throw std::invalid_argument("config: bad m or n");
  if (!(box_half_width > 0)) throw std::invalid_argument("config: bad box_half_width");
  for (const auto& algo : algorithms) {
    bool known = false;
    for (const auto& k : kKnownAlgorithms) known |= k == algo;
    if (!known) throw std::invalid_argument("config: unknown algorithm '" + algo + "'");
    if (algo == "slcp" && n != 2)
      throw DimensionMismatch("config: slcp requires n = 2");
  }
  (void)noise.instantiate(noise.params.front());
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.m = doc.value("m", cfg.m);
  cfg.n = doc.value("n", cfg.n);
  cfg.box_half_width = doc.value("box_half_width", cfg.box_half_width);
  if (doc.contains("noise")) {
    const auto& nj = doc.at("noise");
    cfg.noise.model = nj.value("model", cfg.noise.model);
    cfg.noise.sigma_base = nj.value("sigma_base", cfg.noise.sigma_base);
    if (nj.contains("params")) cfg.noise.params = nj.at("params").get<std::vector<Scalar>>();
  }
  if (doc.contains("algorithms"))
    cfg.algorithms = doc.at("algorithms").get<std::vector<std::string>>();
  cfg.runs = doc.value("runs", cfg.runs);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.jobs = doc.value("jobs", cfg.jobs);
  cfg.output_dir = doc.value("output", cfg.output_dir);
  if (doc.contains("solver")) {
    const auto& sj = doc.at("solver");
    const Scalar tol = sj.value("tolerance", 0.0);
    const int iters = sj.value("max_iterations", 0);
    if (tol > 0) {
      cfg.slcp.solver.tolerance = tol;
      cfg.slnn.solver.tolerance = tol;
      cfg.sll1.solver.tolerance = tol;
    }
    if (iters > 0) {
      cfg.slcp.solver.max_iterations = iters;
      cfg.slnn.solver.max_iterations = iters;
      cfg.sll1.solver.max_iterations = iters;
    }
  }
  if (doc.contains("slcp")) {
    const auto& sj = doc.at("slcp");
    cfg.slcp.ratio_eval_mu = sj.value("ratio_eval_mu", cfg.slcp.ratio_eval_mu);
    cfg.slcp.grid_search_m3 = sj.value("grid_search_m3", cfg.slcp.grid_search_m3);
    cfg.slcp.grid_points = sj.value("grid_points", cfg.slcp.grid_points);
  }
  if (doc.contains("sll1")) {
    const auto& sj = doc.at("sll1");
    cfg.sll1.epsilon = sj.value("epsilon", cfg.sll1.epsilon);
    cfg.sll1.max_iters = sj.value("max_iters", cfg.sll1.max_iters);
    cfg.sll1.sigma_big = sj.value("sigma_big", cfg.sll1.sigma_big);
    cfg.sll1.mu = sj.value("mu", cfg.sll1.mu);
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  ordered_json doc;
  doc["m"] = m;
  doc["n"] = n;
  doc["box_half_width"] = box_half_width;
  doc["noise"] = {{"model", noise.model}, {"sigma_base", noise.sigma_base}, {"params", noise.params}};
  doc["algorithms"] = algorithms;
  doc["runs"] = runs;
  doc["seed"] = seed;
  doc["jobs"] = jobs;
  doc["solver"] = {{"slcp_tolerance", slcp.solver.tolerance},
                   {"slnn_tolerance", slnn.solver.tolerance},
                   {"sll1_tolerance", sll1.solver.tolerance}};
  doc["slcp"] = {{"ratio_eval_mu", slcp.ratio_eval_mu}, {"grid_search_m3", slcp.grid_search_m3}};
  doc["sll1"] = {{"epsilon", sll1.epsilon},
                 {"max_iters", sll1.max_iters},
                 {"sigma_big", sll1.sigma_big},
                 {"mu", sll1.mu}};
  return doc.dump(2);
}

namespace {

struct RunRecord {
  Scalar error = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar eig_ratio = 0.0;
  int iterations = 0;
  Scalar seconds = 0.0;
  bool failed = true;
};

RunRecord evaluate(const std::string& algo, const Scenario& scenario,
                   const ExperimentConfig& cfg) {
  RunRecord rec;
  const auto start = std::chrono::steady_clock::now();
  try {
    LocalizationResult res;
    if (algo == "slcp") {
      res = solve_slcp(scenario.anchors, scenario.measured_ranges, cfg.slcp);
    } else if (algo == "slnn") {
      res = solve_slnn(scenario.anchors, scenario.measured_ranges, cfg.slnn);
    } else if (algo == "srls") {
      SrlsResult srls_res = srls_detailed(scenario.anchors, scenario.measured_ranges);
      res.position = srls_res.position;
      res.solver_status = SolverStatus::Optimal;
      res.eig_ratio = 1.0;
      res.iterations = 0;
    } else if (algo == "sll1-ad") {
      res = sll1_ad(scenario.anchors, scenario.measured_ranges, cfg.sll1);
    } else if (algo == "sll1-md") {
      res = sll1_md(scenario.anchors, scenario.measured_ranges, cfg.sll1);
    } else if (algo == "sll1-sd") {
      res = sll1_sd(scenario.anchors, scenario.measured_ranges, cfg.sll1);
    } else {
      throw std::invalid_argument("unknown algorithm: " + algo);
    }
    if (res.solver_status != SolverStatus::Failed && res.position.allFinite()) {
      rec.failed = false;
      rec.error = (res.position - scenario.source).norm();
      rec.eig_ratio = res.eig_ratio;
      rec.iterations = res.iterations;
    }
  } catch (const std::exception&) {
    rec.failed = true;
  }
  rec.seconds = std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, nullptr);
}

ExperimentReport run_experiment(const ExperimentConfig& config, PairedRuns* paired) {
  config.validate();
  ExperimentReport report;
  report.config = config;

  const int n_noise = static_cast<int>(config.noise.params.size());
  const int n_algo = static_cast<int>(config.algorithms.size());
  if (paired) {
    paired->truths.assign(static_cast<std::size_t>(n_noise) * config.runs, Vec());
    paired->errors.assign(n_noise, std::vector<std::vector<Scalar>>(
                                       n_algo, std::vector<Scalar>(config.runs, 0.0)));
  }

  for (int noise_idx = 0; noise_idx < n_noise; ++noise_idx) {
    const NoiseModel noise = config.noise.instantiate(config.noise.params[noise_idx]);
    std::vector<std::vector<RunRecord>> records(n_algo,
                                                std::vector<RunRecord>(config.runs));
    std::vector<Vec> truths(config.runs);

    std::atomic<int> next_run{0};
    auto worker = [&] {
      for (;;) {
        const int run = next_run.fetch_add(1);
        if (run >= config.runs) break;
        const std::uint64_t run_seed =
            derive_seed(config.seed, static_cast<std::uint64_t>(noise_idx) * 0x10000000ull + run);
        Scenario scenario = generate_scenario(config.m, config.n, config.box_half_width, noise,
                                              run_seed);
        truths[run] = scenario.source;
        for (int a = 0; a < n_algo; ++a)
          records[a][run] = evaluate(config.algorithms[a], scenario, config);
      }
    };
    const int jobs = std::max(1, config.jobs);
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (int a = 0; a < n_algo; ++a) {
      AlgoNoiseReport row;
      row.algorithm = config.algorithms[a];
      row.noise_model = config.noise.model;
      row.noise_param = config.noise.params[noise_idx];
      row.runs = config.runs;
      Scalar sum_sq = 0, sum_sq_tight = 0, sum_iters = 0, sum_time = 0;
      int ok = 0;
      for (int run = 0; run < config.runs; ++run) {
        const RunRecord& rec = records[a][run];
        sum_time += rec.seconds;
        if (rec.failed) {
          ++row.failure_count;
          continue;
        }
        ++ok;
        sum_sq += rec.error * rec.error;
        sum_iters += rec.iterations;
        if (rec.eig_ratio >= 100.0) {
          ++row.n_tight;
          sum_sq_tight += rec.error * rec.error;
        }
      }
      row.rmse_all = ok ? std::sqrt(sum_sq / ok) : 0.0;
      if (row.n_tight > 0) row.rmse_tight = std::sqrt(sum_sq_tight / row.n_tight);
      row.mean_iterations = ok ? sum_iters / ok : 0.0;
      row.mean_solve_time = sum_time / config.runs;
      report.rows.push_back(std::move(row));

      if (paired)
        for (int run = 0; run < config.runs; ++run)
          (*paired).errors[noise_idx][a][run] =
              records[a][run].failed ? std::numeric_limits<Scalar>::quiet_NaN()
                                     : records[a][run].error;
    }
    if (paired)
      for (int run = 0; run < config.runs; ++run)
        paired->truths[static_cast<std::size_t>(noise_idx) * config.runs + run] = truths[run];
  }
  return report;
}

std::string ExperimentReport::to_json() const {
  ordered_json doc;
  doc["config"] = nlohmann::json::parse(config.to_json());
  doc["results"] = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["algorithm"] = row.algorithm;
    r["noise_model"] = row.noise_model;
    r["noise_param"] = row.noise_param;
    r["runs"] = row.runs;
    r["rmse_all"] = row.rmse_all;
    if (row.rmse_tight) {
      r["rmse_tight"] = *row.rmse_tight;
    } else {
      r["rmse_tight"] = nullptr;
    }
    r["n_tight"] = row.n_tight;
    r["mean_iterations"] = row.mean_iterations;
    r["failure_count"] = row.failure_count;
    doc["results"].push_back(r);
  }
  return doc.dump(2);
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "algorithm,noise_model,noise_param,runs,rmse_all,rmse_tight,n_tight,"
         "mean_iterations,failure_count\n";
  for (const auto& row : rows) {
    out << row.algorithm << ',' << row.noise_model << ',' << row.noise_param << ',' << row.runs
        << ',' << row.rmse_all << ',';
    if (row.rmse_tight) out << *row.rmse_tight;
    out << ',' << row.n_tight << ',' << row.mean_iterations << ',' << row.failure_count << '\n';
  }
  return out.str();
}

std::string ExperimentReport::timing_csv() const {
  // wall-clock data lives outside the deterministic report files
  std::ostringstream out;
  out.precision(6);
  out << "algorithm,noise_model,noise_param,mean_solve_time\n";
  for (const auto& row : rows)
    out << row.algorithm << ',' << row.noise_model << ',' << row.noise_param << ','
        << row.mean_solve_time << '\n';
  return out.str();
}

std::string ExperimentReport::to_table() const {
  std::ostringstream out;
  out << "algorithm   noise               rmse_all   rmse_tight  n_tight  iters  time[s]  fails\n";
  char line[256];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%-10s  %-12s %6.4g  %9.4f  %10.4f   %6d  %5.1f  %6.4f  %5d\n",
                  row.algorithm.c_str(), row.noise_model.c_str(), row.noise_param, row.rmse_all,
                  row.rmse_tight ? *row.rmse_tight : std::nan(""), row.n_tight,
                  row.mean_iterations, row.mean_solve_time, row.failure_count);
    out << line;
  }
  return out.str();
}

}  // namespace sdrloc
