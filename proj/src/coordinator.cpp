#include "ecofence/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "ecofence/errors.hpp"

namespace ecofence {

std::string_view to_string(VehicleMode mode) noexcept {
  return mode == VehicleMode::Polluting ? "polluting" : "electric";
}

std::string_view to_string(Powertrain powertrain) noexcept {
  switch (powertrain) {
    case Powertrain::Hybrid:
      return "hybrid";
    case Powertrain::PureEV:
      return "ev";
    case Powertrain::PureICE:
      return "ice";
  }
  return "?";
}

Powertrain parse_powertrain(std::string_view text) {
  if (text == "hybrid") return Powertrain::Hybrid;
  if (text == "ev") return Powertrain::PureEV;
  if (text == "ice") return Powertrain::PureICE;
  throw DomainError("unknown powertrain '" + std::string(text) + "' (expected hybrid, ev or ice)");
}

void ControllerConfig::validate() const {
  if (!(tau_s > 0.0)) throw ConfigError("tau must be positive");
  if (!(switch_interval_s > 0.0)) throw ConfigError("switch interval must be positive");
  if (!(expiry_timeout_s > 0.0)) throw ConfigError("expiry timeout must be positive");
  if (!(actuation_latency_s >= 0.0)) throw ConfigError("actuation latency must be non-negative");
  if (!(radius_m > 0.0)) throw ConfigError("geofence radius must be positive");
  if (!std::isfinite(allowable_limit)) throw ConfigError("allowable limit must be finite");
}

ControllerConfig ControllerConfig::hil_emulation() {
  ControllerConfig config;
  config.tau_s = 5.0;
  config.switch_interval_s = 5.0;
  config.actuation_latency_s = 5.0;
  return config;
}

BackgroundReading BackgroundReading::from_level(double level, double safe_limit) {
  return {level, level - safe_limit};
}

bool Geofence::active_at(double now, double expiry_timeout) const noexcept {
  return now - last_detection_at <= expiry_timeout + kTimeEpsilon;
}

Geofence& on_detection(FenceMap& fences, std::string_view cyclist_id, std::string_view detecting_vehicle_id,
                       Vec2 detecting_position, double now, double radius) {
  auto it = fences.find(cyclist_id);
  if (it == fences.end()) {
    Geofence fence;
    fence.id = std::string(cyclist_id);
    fence.radius = radius;
    fence.created_at = now;
    it = fences.emplace(fence.id, std::move(fence)).first;
  }
  Geofence& fence = it->second;
  fence.center = detecting_position;
  fence.last_detection_at = now;
  fence.detector_vehicle_id = std::string(detecting_vehicle_id);
  return fence;
}

std::vector<std::string> expire(FenceMap& fences, double now, double expiry_timeout) {
  std::vector<std::string> restore;
  for (auto it = fences.begin(); it != fences.end();) {
    if (it->second.active_at(now, expiry_timeout)) {
      ++it;
      continue;
    }
    restore.insert(restore.end(), it->second.member_ids.begin(), it->second.member_ids.end());
    it = fences.erase(it);
  }
  return restore;
}

std::vector<std::string> members(const Geofence& fence, std::span<const VehicleReport> vehicles) {
  std::vector<std::string> out;
  for (const VehicleReport& v : vehicles) {
    if (distance(v.position, fence.center) <= fence.radius + kTimeEpsilon) out.push_back(v.vehicle_id);
  }
  return out;
}

double compute_limit(const ControllerConfig& config, const BackgroundReading& background) {
  return config.allowable_limit - background.level;
}

FencePlan plan_fence(const Geofence& fence, std::span<const VehicleReport> member_reports,
                     const CoefficientTable& table, const ControllerConfig& config,
                     const BackgroundReading& background) {
  std::vector<const VehicleReport*> sorted;
  sorted.reserve(member_reports.size());
  for (const auto& r : member_reports) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const VehicleReport* a, const VehicleReport* b) { return a->vehicle_id < b->vehicle_id; });

  FencePlan plan;
  plan.fence_id = fence.id;
  plan.limit = compute_limit(config, background);
  for (const VehicleReport* r : sorted) {
    plan.member_ids.push_back(r->vehicle_id);
    if (config.force_detector_electric && r->vehicle_id == fence.detector_vehicle_id) {
      plan.forced_electric.push_back(r->vehicle_id);
      continue;
    }
    const double rate = r->powertrain == Powertrain::PureEV
                            ? 0.0
                            : vehicle_emission_rate(r->euro_class, config.pollutant, r->speed_kmh, table);
    if (r->powertrain == Powertrain::PureICE) {
      plan.uncontrollable.push_back(r->vehicle_id);
      plan.uncontrollable_rate += rate;
      continue;
    }
    plan.problem.entries.push_back({r->vehicle_id, r->density_weight, rate});
  }
  plan.problem.limit = plan.limit - plan.uncontrollable_rate;
  plan.assignment = solve(plan.problem);
  return plan;
}

TickOutcome enact_plan(FencePlan plan, const ControllerConfig& config, UniformStream& coin, double now) {
  TickOutcome outcome;
  const double effective = now + config.actuation_latency_s;

  // Interleave forced and tossed vehicles so draws follow ascending id.
  std::set<std::string_view> forced(plan.forced_electric.begin(), plan.forced_electric.end());
  std::unordered_map<std::string_view, std::size_t> entry_index;
  for (std::size_t i = 0; i < plan.problem.entries.size(); ++i) {
    entry_index.emplace(plan.problem.entries[i].vehicle_id, i);
  }
  for (const std::string& id : plan.member_ids) {
    CommandLogRecord rec;
    rec.sim_time = now;
    rec.fence_id = plan.fence_id;
    rec.vehicle_id = id;
    rec.effective_time = effective;
    if (forced.contains(id)) {
      rec.probability = 0.0;
      rec.commanded_mode = VehicleMode::Electric;
    } else if (auto it = entry_index.find(id); it != entry_index.end()) {
      const ProblemEntry& entry = plan.problem.entries[it->second];
      const double x = plan.assignment.probabilities[it->second];
      const double u = coin.next();
      rec.density_weight = entry.density_weight;
      rec.emission_rate = entry.emission_rate;
      rec.probability = x;
      rec.draw = u;
      rec.commanded_mode = toss(x, u);
    } else {
      continue;  // uncontrollable
    }
    outcome.commands.push_back({id, rec.commanded_mode, now, effective});
    outcome.log.push_back(std::move(rec));
  }
  outcome.plan = std::move(plan);
  return outcome;
}

TickOutcome decision_tick(const Geofence& fence, std::span<const VehicleReport> vehicles,
                          const CoefficientTable& table, const ControllerConfig& config,
                          const BackgroundReading& background, UniformStream& coin, double now) {
  std::vector<VehicleReport> inside;
  for (const auto& v : vehicles) {
    if (distance(v.position, fence.center) <= fence.radius + kTimeEpsilon) inside.push_back(v);
  }
  return enact_plan(plan_fence(fence, inside, table, config, background), config, coin, now);
}

ModeCommand single_vehicle_tick(std::string_view detecting_vehicle_id, double now, const ControllerConfig& config) {
  return {std::string(detecting_vehicle_id), VehicleMode::Electric, now, now + config.actuation_latency_s};
}

Coordinator::Coordinator(ControllerConfig config, CoefficientTable table)
    : config_(std::move(config)), table_(std::move(table)) {
  config_.validate();
  current_limit_ = config_.allowable_limit;
}

std::optional<ModeCommand> Coordinator::on_detection(std::string_view cyclist_id, std::string_view vehicle_id,
                                                     Vec2 position, double now) {
  ecofence::on_detection(fences_, cyclist_id, vehicle_id, position, now, config_.radius_m);
  if (!config_.single_vehicle || !config_.control_enabled) return std::nullopt;

  ModeCommand cmd = single_vehicle_tick(vehicle_id, now, config_);
  single_timers_[cmd.vehicle_id] = now;
  auto& control = controlled_[cmd.vehicle_id];
  const bool already_electric = control.mode == VehicleMode::Electric && !control.fence_id.empty();
  control = {std::string(cyclist_id), VehicleMode::Electric};
  if (already_electric) return std::nullopt;

  CommandLogRecord rec;
  rec.sim_time = now;
  rec.fence_id = std::string(cyclist_id);
  rec.vehicle_id = cmd.vehicle_id;
  rec.commanded_mode = VehicleMode::Electric;
  rec.effective_time = cmd.effective_time;
  log_.push_back(std::move(rec));
  return cmd;
}

void Coordinator::revert(const std::string& vehicle_id, const std::string& fence_id, double now,
                         std::vector<ModeCommand>& out) {
  auto it = controlled_.find(vehicle_id);
  if (it == controlled_.end()) return;
  const bool was_electric = it->second.mode == VehicleMode::Electric;
  controlled_.erase(it);
  if (!was_electric) return;

  const double effective = now + config_.actuation_latency_s;
  out.push_back({vehicle_id, VehicleMode::Polluting, now, effective});
  CommandLogRecord rec;
  rec.sim_time = now;
  rec.fence_id = fence_id;
  rec.vehicle_id = vehicle_id;
  rec.commanded_mode = VehicleMode::Polluting;
  rec.effective_time = effective;
  log_.push_back(std::move(rec));
}

void Coordinator::record(const TickOutcome& outcome, std::vector<ModeCommand>& out) {
  for (const ModeCommand& cmd : outcome.commands) {
    controlled_[cmd.vehicle_id] = {outcome.plan.fence_id, cmd.mode};
    out.push_back(cmd);
  }
  log_.insert(log_.end(), outcome.log.begin(), outcome.log.end());
}

std::vector<std::string> Coordinator::fence_members() const {
  std::vector<std::string> all;
  for (const auto& [id, fence] : fences_) all.insert(all.end(), fence.member_ids.begin(), fence.member_ids.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

std::vector<ModeCommand> Coordinator::update(double now, std::span<const VehicleReport> vehicles,
                                             const BackgroundReading& background, UniformStream& coin) {
  std::vector<ModeCommand> out;
  current_limit_ = compute_limit(config_, background);

  // Expiry.
  std::vector<std::string> removed;
  for (const auto& [id, fence] : fences_) {
    if (!fence.active_at(now, config_.expiry_timeout_s)) removed.push_back(id);
  }
  const std::vector<std::string> restore = expire(fences_, now, config_.expiry_timeout_s);
  for (const std::string& fence_id : removed) plans_.erase(fence_id);
  if (config_.single_vehicle) {
    for (auto it = single_timers_.begin(); it != single_timers_.end();) {
      if (now - it->second > config_.expiry_timeout_s + kTimeEpsilon) {
        const std::string vid = it->first;
        const std::string fid = controlled_.contains(vid) ? controlled_.at(vid).fence_id : std::string();
        it = single_timers_.erase(it);
        revert(vid, fid, now, out);
      } else {
        ++it;
      }
    }
  } else {
    std::set<std::string> to_restore(restore.begin(), restore.end());
    for (const auto& [vid, control] : controlled_) {
      if (std::find(removed.begin(), removed.end(), control.fence_id) != removed.end()) to_restore.insert(vid);
    }
    for (const std::string& vid : to_restore) {
      auto it = controlled_.find(vid);
      if (it != controlled_.end()) revert(vid, it->second.fence_id, now, out);
    }
  }

  // Membership, ascending vehicle id. A vehicle inside two fences belongs to
  // the one with the smaller id.
  std::vector<const VehicleReport*> sorted;
  sorted.reserve(vehicles.size());
  for (const auto& v : vehicles) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(),
            [](const VehicleReport* a, const VehicleReport* b) { return a->vehicle_id < b->vehicle_id; });
  std::set<std::string_view> claimed;
  std::map<std::string, std::vector<VehicleReport>, std::less<>> member_reports;
  for (auto& [id, fence] : fences_) {
    fence.member_ids.clear();
    auto& reports = member_reports[id];
    for (const VehicleReport* v : sorted) {
      if (claimed.contains(v->vehicle_id)) continue;
      if (distance(v->position, fence.center) <= fence.radius + kTimeEpsilon) {
        fence.member_ids.push_back(v->vehicle_id);
        reports.push_back(*v);
        claimed.insert(v->vehicle_id);
      }
    }
  }
  if (fences_.empty()) expected_rate_ = 0.0;

  if (!config_.control_enabled || config_.single_vehicle) return out;

  const bool solve_due = now + kTimeEpsilon >= next_solve_;
  const bool toss_due = now + kTimeEpsilon >= next_toss_;
  while (next_solve_ <= now + kTimeEpsilon) next_solve_ += config_.tau_s;
  while (next_toss_ <= now + kTimeEpsilon) next_toss_ += config_.switch_interval_s;
  if (!solve_due && !toss_due) return out;

  for (const auto& [id, fence] : fences_) {
    auto plan = plans_.find(id);
    const bool stale = plan == plans_.end() || plan->second.member_ids != fence.member_ids;
    if (solve_due || stale) {
      plans_.insert_or_assign(id, plan_fence(fence, member_reports[id], table_, config_, background));
    }
  }
  if (!toss_due) return out;

  double expected = 0.0;
  for (const auto& [id, fence] : fences_) {
    TickOutcome outcome = enact_plan(plans_.at(id), config_, coin, now);
    expected += expected_emission(outcome.plan.assignment, outcome.plan.problem) + outcome.plan.uncontrollable_rate;
    record(outcome, out);
  }
  expected_rate_ = expected;

  // Members that left every fence go back to polluting.
  std::vector<std::string> outside;
  for (const auto& [vid, control] : controlled_) {
    if (!claimed.contains(vid)) outside.push_back(vid);
  }
  for (const std::string& vid : outside) revert(vid, controlled_.at(vid).fence_id, now, out);
  return out;
}

}  // namespace ecofence
