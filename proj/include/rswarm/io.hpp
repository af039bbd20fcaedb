#pragma once

// Scenario files, run bundles and SVG plots.

#include <filesystem>
#include <string>

#include "rswarm/engine.hpp"
#include "rswarm/scenario.hpp"

namespace rswarm {

/// Parses and validates scenario text; throws ValidationError listing every problem.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::filesystem::path& path);

/// Canonical JSON form; parse_scenario_text(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& sc);

/// printf("%.9g").
std::string fmt9(double x);

/// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string trajectories_csv(const RunLog& log);
std::string metrics_csv(const RunLog& log);
std::string events_jsonl(const RunLog& log);
std::string run_summary_json(const RunLog& log);

/// Writes scenario.json, trajectories.csv, metrics.csv, events.jsonl, run.json and plot.svg.
void write_bundle(const std::filesystem::path& dir, const Scenario& sc, const RunLog& log);

/// Renders plot.svg from the files of a run directory.
std::string render_plot(const std::filesystem::path& dir);

/// Human-readable summary of detections, violations and goal arrivals of a run directory.
std::string report(const std::filesystem::path& dir);

/// RESILIENT_SWARM_OUT when set, else "runs".
std::filesystem::path default_output_root();

}  // namespace rswarm
