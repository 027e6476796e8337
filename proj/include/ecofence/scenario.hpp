#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecofence/coordinator.hpp"
#include "ecofence/emission_model.hpp"
#include "ecofence/road_network.hpp"

namespace ecofence {

// One scheduled vehicle.
struct SpawnSpec {
  std::string vehicle_id;
  double spawn_time = 0.0;
  std::optional<int> euro_class;  // drawn uniformly from 1..4 when absent
  std::vector<std::string> route;
  std::optional<double> speed_kmh;  // edge speed limits when absent
  double speed_jitter_kmh = 0.0;
  Powertrain powertrain = Powertrain::Hybrid;
};

// `count` vehicles entering `route` every `interval_s` from `start_s`. Ids are
// `<id>.<index>` with the index zero-padded to three digits.
struct FlowSpec {
  std::string id;
  std::vector<std::string> route;
  double start_s = 0.0;
  double interval_s = 1.0;
  int count = 0;
  std::optional<int> euro_class;
  std::optional<double> speed_kmh;
  double speed_jitter_kmh = 0.0;
  Powertrain powertrain = Powertrain::Hybrid;
};

struct CyclistSpec {
  std::string cyclist_id;  // RFID tag id
  double start_time = 0.0;
  std::vector<std::string> route;
  double speed_kmh = 15.0;
};

// Piecewise-constant background level in g/min. Zero before the first point.
struct BackgroundSeries {
  std::vector<std::pair<double, double>> points;  // (time s, level), sorted by time

  static BackgroundSeries constant(double level) { return {{{0.0, level}}}; }
  double level_at(double t) const noexcept;

  friend bool operator==(const BackgroundSeries&, const BackgroundSeries&) = default;
};

struct SimulationConfig {
  ControllerConfig controller;
  double dt_s = 1.0;
  double horizon_s = 600.0;
  double detection_range_m = 10.0;

  void validate() const;
};

struct Scenario {
  std::string name;
  RoadNetwork network;
  std::vector<SpawnSpec> vehicles;
  std::vector<FlowSpec> flows;
  std::vector<CyclistSpec> cyclists;
  SimulationConfig config;
  BackgroundSeries background;
  CoefficientTable coefficients = default_coefficient_table();
};

// Individual vehicles plus expanded flows, ordered by (spawn_time, id).
std::vector<SpawnSpec> expand_spawns(const Scenario& scenario);

}  // namespace ecofence
