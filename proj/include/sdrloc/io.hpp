#pragma once

#include <string>

#include "sdrloc/analysis.hpp"
#include "sdrloc/types.hpp"

namespace sdrloc {

/// Scenario serialization; field names mirror the in-memory layout:
/// anchors{positions,m,n}, source, true_ranges, measured_ranges,
/// noise{model,...}, seed.
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

/// Anchors file: CSV, one anchor per row. Throws ParseError with the
/// offending 1-based line number.
Mat read_anchors_csv(const std::string& path);

/// Ranges file: CSV, all ranges on a single row.
Vec read_ranges_csv(const std::string& path);

/// Boundary trace, one row per grid angle: beta,u,v,gap. Failed grid points
/// carry nan coordinates; gap is the normalized jump when flagged, else 0.
std::string hull_trace_to_csv(const HullTrace& trace);

/// Sampled image points, one "u,v" row each.
std::string samples_to_csv(const std::vector<std::pair<Scalar, Scalar>>& samples);

std::string localization_result_to_json(const LocalizationResult& result);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sdrloc
