#include "ecofence/world.hpp"

#include <algorithm>
#include <cmath>

#include "ecofence/errors.hpp"
#include "ecofence/kernels.hpp"

namespace ecofence {

namespace {

constexpr double kKmhToMps = 1.0 / 3.6;

}  // namespace

World::World(const Scenario& scenario)
    : network_(scenario.network),
      table_(scenario.coefficients),
      pollutant_(scenario.config.controller.pollutant),
      pending_spawns_(expand_spawns(scenario)),
      pending_cyclists_(scenario.cyclists),
      cyclist_started_(scenario.cyclists.size(), false) {}

void World::spawn_due(UniformStream& spawn_stream) {
  while (next_spawn_ < pending_spawns_.size() &&
         pending_spawns_[next_spawn_].spawn_time <= now_ + kTimeEpsilon) {
    const SpawnSpec& spec = pending_spawns_[next_spawn_++];
    VehicleState v;
    v.vehicle_id = spec.vehicle_id;
    v.powertrain = spec.powertrain;
    v.route = network_.resolve_route(spec.route);
    v.spawn_time = now_;
    if (spec.speed_kmh) {
      double speed = *spec.speed_kmh;
      if (spec.speed_jitter_kmh > 0.0) speed += (2.0 * spawn_stream.next() - 1.0) * spec.speed_jitter_kmh;
      v.speed_override_kmh = std::max(speed, 1.0);
    }
    v.euro_class = VehicleClass(spec.euro_class ? *spec.euro_class
                                                : spawn_stream.next_int(VehicleClass::kMin, VehicleClass::kMax));
    v.speed_kmh = v.speed_override_kmh.value_or(network_.edge(v.route.front()).speed_limit_kmh);
    v.mode = v.powertrain == Powertrain::PureEV ? VehicleMode::Electric : VehicleMode::Polluting;

    auto at = std::lower_bound(vehicles_.begin(), vehicles_.end(), v.vehicle_id,
                               [](const VehicleState& s, const std::string& id) { return s.vehicle_id < id; });
    if (at != vehicles_.end() && at->vehicle_id == v.vehicle_id) {
      throw DomainError("vehicle id '" + v.vehicle_id + "' spawned twice");
    }
    vehicles_.insert(at, std::move(v));
  }
  for (std::size_t i = 0; i < pending_cyclists_.size(); ++i) {
    const CyclistSpec& spec = pending_cyclists_[i];
    if (cyclist_started_[i] || spec.start_time > now_ + kTimeEpsilon) continue;
    cyclist_started_[i] = true;
    CyclistState c;
    c.cyclist_id = spec.cyclist_id;
    c.route = network_.resolve_route(spec.route);
    c.speed_kmh = spec.speed_kmh;
    cyclists_.push_back(std::move(c));
  }
}

bool World::advance(std::vector<std::size_t>& route, std::size_t& pos, double& offset,
                    const std::optional<double>& override_kmh, double& speed_kmh, double dt) const {
  double remaining = dt;
  while (true) {
    const Edge& edge = network_.edge(route[pos]);
    speed_kmh = override_kmh.value_or(edge.speed_limit_kmh);
    const double mps = speed_kmh * kKmhToMps;
    const double left = edge.length() - offset;
    const double travel = mps * remaining;
    if (travel < left) {
      offset += travel;
      return true;
    }
    remaining -= mps > 0.0 ? left / mps : remaining;
    ++pos;
    offset = 0.0;
    if (pos == route.size()) return false;  // arrived
    if (remaining <= 0.0) {
      speed_kmh = override_kmh.value_or(network_.edge(route[pos]).speed_limit_kmh);
      return true;
    }
  }
}

void World::retire(const VehicleState& vehicle) {
  retired_.push_back({vehicle.vehicle_id, vehicle.present_s, vehicle.polluting_s, vehicle.mode_switches});
}

void World::step(double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  now_ += dt;
  std::vector<VehicleState> kept;
  kept.reserve(vehicles_.size());
  for (VehicleState& v : vehicles_) {
    if (advance(v.route, v.route_pos, v.edge_offset, v.speed_override_kmh, v.speed_kmh, dt)) {
      kept.push_back(std::move(v));
    } else {
      retire(v);
    }
  }
  vehicles_ = std::move(kept);

  std::vector<CyclistState> riding;
  for (CyclistState& c : cyclists_) {
    std::optional<double> speed = c.speed_kmh;
    if (advance(c.route, c.route_pos, c.edge_offset, speed, c.speed_kmh, dt)) riding.push_back(std::move(c));
  }
  cyclists_ = std::move(riding);
  apply_due_commands();
}

std::vector<DetectionEvent> World::detect(double detection_range_m) const {
  if (!(detection_range_m > 0.0)) throw DomainError("detection range must be positive");
  std::vector<DetectionEvent> events;
  for (const CyclistState& c : cyclists_) {
    const Vec2 cyclist = position(c);
    for (const VehicleState& v : vehicles_) {  // already ascending id
      const Vec2 p = position(v);
      if (distance(p, cyclist) <= detection_range_m) events.push_back({c.cyclist_id, v.vehicle_id, p});
    }
  }
  return events;
}

void World::schedule(const ModeCommand& command) {
  auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), command.vehicle_id,
                             [](const VehicleState& s, const std::string& id) { return s.vehicle_id < id; });
  if (it == vehicles_.end() || it->vehicle_id != command.vehicle_id) return;  // already gone
  it->pending = PendingMode{command.mode, command.effective_time};
}

void World::apply_due_commands() {
  for (VehicleState& v : vehicles_) {
    if (!v.pending || v.pending->effective_time > now_ + kTimeEpsilon) continue;
    VehicleMode target = v.pending->mode;
    v.pending.reset();
    // EVs cannot pollute and ICE vehicles cannot go electric.
    if (v.powertrain == Powertrain::PureEV) target = VehicleMode::Electric;
    if (v.powertrain == Powertrain::PureICE) target = VehicleMode::Polluting;
    if (target != v.mode) {
      v.mode = target;
      ++v.mode_switches;
    }
  }
}

Vec2 World::position(const VehicleState& vehicle) const {
  return network_.edge(vehicle.route[vehicle.route_pos]).point_at(vehicle.edge_offset);
}

Vec2 World::position(const CyclistState& cyclist) const {
  return network_.edge(cyclist.route[cyclist.route_pos]).point_at(cyclist.edge_offset);
}

const Edge& World::current_edge(const VehicleState& vehicle) const {
  return network_.edge(vehicle.route[vehicle.route_pos]);
}

std::vector<VehicleReport> World::reports() const {
  std::vector<VehicleReport> out;
  out.reserve(vehicles_.size());
  for (const VehicleState& v : vehicles_) {
    out.push_back({v.vehicle_id, position(v), current_edge(v).density_weight, v.speed_kmh, v.euro_class,
                   v.powertrain});
  }
  return out;
}

std::vector<double> World::emission_rates() const {
  std::vector<FleetSample> samples;
  samples.reserve(vehicles_.size());
  for (const VehicleState& v : vehicles_) {
    samples.push_back({v.euro_class, v.powertrain == Powertrain::PureEV ? 0.0 : v.speed_kmh});
  }
  std::vector<double> rates(samples.size());
  fleet_emission_rates(samples, table_, pollutant_, rates);
  return rates;
}

double World::aggregate_emission_rate(const std::vector<std::string>* member_ids) const {
  const std::vector<double> rates = emission_rates();
  double total = 0.0;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const VehicleState& v = vehicles_[i];
    if (v.mode != VehicleMode::Polluting) continue;
    if (member_ids && !std::binary_search(member_ids->begin(), member_ids->end(), v.vehicle_id)) continue;
    total += rates[i];
  }
  return total;
}

double World::aggregate_emission_rate(const Geofence& fence) const {
  std::vector<std::string> ids = members(fence, reports());
  std::sort(ids.begin(), ids.end());
  return aggregate_emission_rate(&ids);
}

void World::account(double dt) {
  for (VehicleState& v : vehicles_) {
    v.present_s += dt;
    if (v.mode == VehicleMode::Polluting) v.polluting_s += dt;
  }
}

std::vector<VehicleDwell> World::dwell() const {
  std::vector<VehicleDwell> all = retired_;
  for (const VehicleState& v : vehicles_) all.push_back({v.vehicle_id, v.present_s, v.polluting_s, v.mode_switches});
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.vehicle_id < b.vehicle_id; });
  return all;
}

}  // namespace ecofence
