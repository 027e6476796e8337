#include "ecofence/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ecofence/errors.hpp"

namespace ecofence {

double BackgroundSeries::level_at(double t) const noexcept {
  double level = 0.0;
  for (const auto& [time, value] : points) {
    if (time > t + kTimeEpsilon) break;
    level = value;
  }
  return level;
}

void SimulationConfig::validate() const {
  controller.validate();
  if (!(dt_s > 0.0)) throw ConfigError("dt must be positive");
  if (!(horizon_s >= 0.0)) throw ConfigError("horizon must be non-negative");
  if (!(detection_range_m > 0.0)) throw ConfigError("detection range must be positive");
}

std::vector<SpawnSpec> expand_spawns(const Scenario& scenario) {
  std::vector<SpawnSpec> all = scenario.vehicles;
  for (const FlowSpec& flow : scenario.flows) {
    for (int i = 0; i < flow.count; ++i) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, ".%03d", i);
      SpawnSpec spec;
      spec.vehicle_id = flow.id + suffix;
      spec.spawn_time = flow.start_s + flow.interval_s * i;
      spec.euro_class = flow.euro_class;
      spec.route = flow.route;
      spec.speed_kmh = flow.speed_kmh;
      spec.speed_jitter_kmh = flow.speed_jitter_kmh;
      spec.powertrain = flow.powertrain;
      all.push_back(std::move(spec));
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const SpawnSpec& a, const SpawnSpec& b) {
    if (a.spawn_time != b.spawn_time) return a.spawn_time < b.spawn_time;
    return a.vehicle_id < b.vehicle_id;
  });
  return all;
}

ScenarioTrace run(const Scenario& scenario, std::uint64_t seed, const RunOptions& options) {
  scenario.config.validate();
  const SimulationConfig& cfg = scenario.config;

  World world(scenario);
  Coordinator coordinator(cfg.controller, scenario.coefficients);
  UniformStream spawn_stream(seed, StreamPurpose::Spawn);
  UniformStream coin_stream(seed, StreamPurpose::CoinToss);

  ScenarioTrace trace;
  const auto steps = static_cast<long>(std::llround(cfg.horizon_s / cfg.dt_s));
  trace.rows.reserve(static_cast<std::size_t>(steps) + 1);

  for (long k = 0; k <= steps; ++k) {
    const double now = static_cast<double>(k) * cfg.dt_s;
    if (k > 0) world.step(cfg.dt_s);
    world.spawn_due(spawn_stream);

    for (const DetectionEvent& event : world.detect(cfg.detection_range_m)) {
      if (auto cmd = coordinator.on_detection(event.cyclist_id, event.vehicle_id, event.vehicle_position, now)) {
        world.schedule(*cmd);
      }
    }
    const std::vector<VehicleReport> reports = world.reports();
    const auto background = BackgroundReading::from_level(scenario.background.level_at(now),
                                                          cfg.controller.allowable_limit);
    for (const ModeCommand& cmd : coordinator.update(now, reports, background, coin_stream)) world.schedule(cmd);
    world.apply_due_commands();

    const std::vector<std::string> fence_members = coordinator.fence_members();
    const std::vector<double> rates = world.emission_rates();
    TraceRow row;
    row.sim_time = now;
    row.vehicle_count = static_cast<int>(world.vehicles().size());
    row.member_count = static_cast<int>(fence_members.size());
    row.active_fences = static_cast<int>(coordinator.fences().size());
    if (!coordinator.fences().empty()) {
      const Geofence& fence = coordinator.fences().begin()->second;
      row.fence_id = fence.id;
      row.fence_x = fence.center.x;
      row.fence_y = fence.center.y;
      row.last_detection_at = fence.last_detection_at;
    }
    const auto vehicles = world.vehicles();
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
      const VehicleState& v = vehicles[i];
      const bool in_fence = std::binary_search(fence_members.begin(), fence_members.end(), v.vehicle_id);
      if (v.mode == VehicleMode::Polluting) {
        row.total_rate += rates[i];
        (in_fence ? row.in_fence_rate : row.out_fence_rate) += rates[i];
      }
      if (options.record_vehicle_rows) {
        trace.vehicle_rows.push_back({now, v.vehicle_id, world.position(v), world.current_edge(v).id, v.speed_kmh,
                                      v.mode, in_fence});
      }
    }
    row.budget = coordinator.current_limit();
    row.expected_in_fence_rate = coordinator.fences().empty() ? 0.0 : coordinator.expected_in_fence_rate();
    trace.rows.push_back(std::move(row));
    world.account(cfg.dt_s);
  }
  trace.commands = coordinator.log();
  trace.dwell = world.dwell();
  return trace;
}

}  // namespace ecofence
