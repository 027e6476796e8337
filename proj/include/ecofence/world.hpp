#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecofence/coordinator.hpp"
#include "ecofence/rng.hpp"
#include "ecofence/scenario.hpp"

namespace ecofence {

struct PendingMode {
  VehicleMode mode = VehicleMode::Polluting;
  double effective_time = 0.0;
};

struct VehicleState {
  std::string vehicle_id;
  VehicleClass euro_class{VehicleClass::kMin};
  Powertrain powertrain = Powertrain::Hybrid;
  std::vector<std::size_t> route;  // edge indices
  std::size_t route_pos = 0;
  double edge_offset = 0.0;  // meters along the current edge
  std::optional<double> speed_override_kmh;
  double speed_kmh = 0.0;
  VehicleMode mode = VehicleMode::Polluting;
  std::optional<PendingMode> pending;
  double spawn_time = 0.0;
  double present_s = 0.0;
  double polluting_s = 0.0;
  int mode_switches = 0;
};

struct CyclistState {
  std::string cyclist_id;
  std::vector<std::size_t> route;
  std::size_t route_pos = 0;
  double edge_offset = 0.0;
  double speed_kmh = 0.0;
};

struct DetectionEvent {
  std::string cyclist_id;
  std::string vehicle_id;
  Vec2 vehicle_position;
};

// Totals kept for vehicles after they leave the network.
struct VehicleDwell {
  std::string vehicle_id;
  double present_s = 0.0;
  double polluting_s = 0.0;
  int mode_switches = 0;
};

// Constant-speed route followers on a road network. A World owns copies of
// everything it needs, so it can be handed to another thread whole.
class World {
 public:
  explicit World(const Scenario& scenario);

  double now() const noexcept { return now_; }
  std::span<const VehicleState> vehicles() const noexcept { return vehicles_; }
  std::span<const CyclistState> cyclists() const noexcept { return cyclists_; }
  const RoadNetwork& network() const noexcept { return network_; }

  // Adds vehicles and cyclists whose start time has come. Spawn randomness
  // (speed jitter, then EURO class) is drawn in (spawn_time, id) order.
  void spawn_due(UniformStream& spawn_stream);

  // Advances the clock and every agent by dt seconds. Agents that reach the
  // end of their route are removed. Due mode commands are applied.
  void step(double dt);

  // (cyclist, vehicle) pairs within range, ascending vehicle id per cyclist.
  std::vector<DetectionEvent> detect(double detection_range_m) const;

  // Queues a command; a later command for the same vehicle replaces an unapplied one.
  void schedule(const ModeCommand& command);
  void apply_due_commands();

  std::vector<VehicleReport> reports() const;
  Vec2 position(const VehicleState& vehicle) const;
  Vec2 position(const CyclistState& cyclist) const;
  const Edge& current_edge(const VehicleState& vehicle) const;

  // g/min of every vehicle if it were polluting, index-aligned with vehicles().
  std::vector<double> emission_rates() const;
  // Sum over polluting vehicles; restricted to `member_ids` (sorted) when given.
  double aggregate_emission_rate(const std::vector<std::string>* member_ids = nullptr) const;
  double aggregate_emission_rate(const Geofence& fence) const;

  // Adds dt to every present vehicle's dwell counters.
  void account(double dt);
  // Dwell totals for all vehicles ever spawned, ascending id.
  std::vector<VehicleDwell> dwell() const;

 private:
  bool advance(std::vector<std::size_t>& route, std::size_t& pos, double& offset,
               const std::optional<double>& override_kmh, double& speed_kmh, double dt) const;
  void retire(const VehicleState& vehicle);

  RoadNetwork network_;
  CoefficientTable table_;
  PollutantKind pollutant_;
  std::vector<SpawnSpec> pending_spawns_;
  std::size_t next_spawn_ = 0;
  std::vector<CyclistSpec> pending_cyclists_;
  std::vector<bool> cyclist_started_;
  std::vector<VehicleState> vehicles_;  // sorted by id
  std::vector<CyclistState> cyclists_;
  std::vector<VehicleDwell> retired_;
  double now_ = 0.0;
};

}  // namespace ecofence
