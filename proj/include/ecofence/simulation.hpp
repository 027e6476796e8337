#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecofence/coordinator.hpp"
#include "ecofence/scenario.hpp"
#include "ecofence/world.hpp"

namespace ecofence {

// One row per simulation step.
struct TraceRow {
  double sim_time = 0.0;
  int vehicle_count = 0;
  int member_count = 0;
  int active_fences = 0;
  std::string fence_id;  // first active fence, empty when none
  double fence_x = 0.0;
  double fence_y = 0.0;
  double last_detection_at = 0.0;
  double in_fence_rate = 0.0;   // g/min, polluting fence members
  double out_fence_rate = 0.0;  // g/min, polluting vehicles outside every fence
  double total_rate = 0.0;      // g/min, all polluting vehicles
  double budget = 0.0;          // E(Delta)
  double expected_in_fence_rate = 0.0;  // sum x_i e_i at the last toss
};

struct VehicleTraceRow {
  double sim_time = 0.0;
  std::string vehicle_id;
  Vec2 position;
  std::string edge_id;
  double speed_kmh = 0.0;
  VehicleMode mode = VehicleMode::Polluting;
  bool in_fence = false;
};

struct ScenarioTrace {
  std::vector<TraceRow> rows;
  std::vector<VehicleTraceRow> vehicle_rows;
  std::vector<CommandLogRecord> commands;
  std::vector<VehicleDwell> dwell;
};

struct RunOptions {
  bool record_vehicle_rows = true;
};

// Main loop. Per step: move, spawn, detect, expire/decide, apply commands,
// record. Deterministic in (scenario, seed).
ScenarioTrace run(const Scenario& scenario, std::uint64_t seed, const RunOptions& options = {});

}  // namespace ecofence
