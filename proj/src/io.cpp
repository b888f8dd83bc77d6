#include "sdrloc/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sdrloc {

namespace {

using nlohmann::ordered_json;

ordered_json vec_to_json(const Vec& v) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec vec_from_json(const nlohmann::json& j) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<Scalar>();
  return v;
}

ordered_json noise_to_json(const NoiseModel& noise) {
  ordered_json out;
  out["model"] = noise_model_name(noise);
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
    out["sigma"] = g->sigma;
  } else if (const auto* l = std::get_if<LaplacianNoise>(&noise)) {
    out["sigma"] = l->sigma;
  } else {
    const auto& s = std::get<SelectiveGaussianNoise>(noise);
    out["sigma_base"] = s.sigma_base;
    out["sigma_outlier"] = s.sigma_outlier;
  }
  return out;
}

NoiseModel noise_from_json(const nlohmann::json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "gaussian") return GaussianNoise{j.at("sigma").get<Scalar>()};
  if (model == "laplacian") return LaplacianNoise{j.at("sigma").get<Scalar>()};
  if (model == "selective_gaussian")
    return SelectiveGaussianNoise{j.at("sigma_base").get<Scalar>(),
                                  j.at("sigma_outlier").get<Scalar>()};
  throw std::invalid_argument("unknown noise model: " + model);
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario) {
  ordered_json doc;
  ordered_json anchors;
  anchors["positions"] = ordered_json::array();
  for (int i = 0; i < scenario.anchors.count(); ++i)
    anchors["positions"].push_back(vec_to_json(scenario.anchors.anchor(i)));
  anchors["m"] = scenario.anchors.count();
  anchors["n"] = scenario.anchors.dim();
  doc["anchors"] = anchors;
  doc["source"] = vec_to_json(scenario.source);
  doc["true_ranges"] = vec_to_json(scenario.true_ranges.values());
  doc["measured_ranges"] = vec_to_json(scenario.measured_ranges.values());
  doc["noise"] = noise_to_json(scenario.noise);
  doc["seed"] = scenario.seed;
  return doc.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  const auto& anchors_json = doc.at("anchors");
  const int m = anchors_json.at("m").get<int>();
  const int n = anchors_json.at("n").get<int>();
  Mat positions(m, n);
  const auto& rows = anchors_json.at("positions");
  if (static_cast<int>(rows.size()) != m)
    throw std::invalid_argument("scenario_from_json: anchor count mismatch");
  for (int i = 0; i < m; ++i) positions.row(i) = vec_from_json(rows[i]).transpose();
  return Scenario{AnchorSet(std::move(positions)),
                  vec_from_json(doc.at("source")),
                  RangeVector(vec_from_json(doc.at("true_ranges"))),
                  RangeVector(vec_from_json(doc.at("measured_ranges"))),
                  noise_from_json(doc.at("noise")),
                  doc.at("seed").get<std::uint64_t>()};
}

namespace {

std::vector<Scalar> parse_csv_line(const std::string& line, int line_number) {
  std::vector<Scalar> values;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    // trim whitespace
    const auto first = cell.find_first_not_of(" \t\r");
    if (first == std::string::npos) throw ParseError(line_number, "empty field");
    const auto last = cell.find_last_not_of(" \t\r");
    try {
      std::size_t used = 0;
      const std::string token = cell.substr(first, last - first + 1);
      const Scalar v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(line_number, "not a number: '" + cell + "'");
    }
  }
  if (values.empty()) throw ParseError(line_number, "no values");
  return values;
}

}  // namespace

Mat read_anchors_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::vector<std::vector<Scalar>> rows;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_csv_line(line, line_number));
    if (rows.size() > 1 && rows.back().size() != rows.front().size())
      throw ParseError(line_number, "inconsistent column count");
  }
  if (rows.empty()) throw ParseError(line_number, "no anchors in " + path);
  Mat out(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return out;
}

Vec read_ranges_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto values = parse_csv_line(line, line_number);
    Vec out(static_cast<int>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<int>(i)) = values[i];
    return out;
  }
  throw ParseError(line_number, "no ranges in " + path);
}

std::string hull_trace_to_csv(const HullTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& point : trace.points) {
    Scalar gap = 0.0;
    for (const auto& g : trace.gaps)
      if (g.beta == point.beta) gap = g.distance;
    if (point.ok) {
      out << point.beta << ',' << point.u << ',' << point.v << ',' << gap << '\n';
    } else {
      out << point.beta << ",nan,nan," << gap << '\n';
    }
  }
  return out.str();
}

std::string samples_to_csv(const std::vector<std::pair<Scalar, Scalar>>& samples) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [u, v] : samples) out << u << ',' << v << '\n';
  return out.str();
}

std::string localization_result_to_json(const LocalizationResult& result) {
  ordered_json doc;
  doc["position"] = vec_to_json(result.position);
  doc["eig_ratio"] = result.eig_ratio;
  doc["objective"] = result.objective;
  doc["status"] = to_string(result.solver_status);
  doc["failure"] = to_string(result.failure);
  doc["iterations"] = result.iterations;
  doc["warnings"] = result.warnings;
  return doc.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sdrloc
