#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "ecofence/scenario.hpp"

namespace ecofence {

// Scenario files are JSON documents tagged "format": "ecofence-scenario/1".
// See README.md for the schema. Relative paths inside a scenario (coefficient
// table, density file, background series) resolve against `base_dir`.
//
// Every violation is collected; a LoadError lists all of them with field paths.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

// Canonical self-contained form: density weights inlined on edges, background
// as a point list, every config field present. The coefficient table is only
// written when it differs from the default.
nlohmann::json scenario_to_json(const Scenario& scenario);

// Per-edge cyclist density weights, CSV with header `edge_id,weight`.
using DensityFile = std::map<std::string, double>;

// Rejects weights below 1 and edges missing from `network`.
DensityFile load_density_file(const std::filesystem::path& path, const RoadNetwork& network);
void apply_density(RoadNetwork& network, const DensityFile& weights);

// CSV with header `time_s,level_g_per_min`.
BackgroundSeries load_background_csv(const std::filesystem::path& path);
// A number, or a path to a background CSV.
BackgroundSeries parse_background_arg(const std::string& arg);

}  // namespace ecofence
