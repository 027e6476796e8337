#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecofence/emission_model.hpp"
#include "ecofence/geometry.hpp"
#include "ecofence/lp_optimizer.hpp"
#include "ecofence/rng.hpp"

namespace ecofence {

enum class VehicleMode { Polluting, Electric };
std::string_view to_string(VehicleMode mode) noexcept;

enum class Powertrain { Hybrid, PureEV, PureICE };
std::string_view to_string(Powertrain powertrain) noexcept;
Powertrain parse_powertrain(std::string_view text);

struct ControllerConfig {
  double tau_s = 1.0;              // optimisation interval
  double switch_interval_s = 1.0;  // coin-toss interval
  double expiry_timeout_s = 20.0;
  double allowable_limit = 1.0;  // L, g/min
  double actuation_latency_s = 0.0;
  double radius_m = 100.0;
  bool control_enabled = true;
  bool single_vehicle = false;
  bool force_detector_electric = false;
  PollutantKind pollutant = PollutantKind::CO;

  void validate() const;

  // Real-vehicle timing: 5 s decisions, 5 s for the powertrain to act.
  static ControllerConfig hil_emulation();
};

struct BackgroundReading {
  double level = 0.0;  // g/min-equivalent contribution inside the fence
  double delta = 0.0;  // level minus the safe limit

  static BackgroundReading from_level(double level, double safe_limit);
};

struct Geofence {
  std::string id;  // cyclist tag id
  Vec2 center;
  double radius = 100.0;
  double created_at = 0.0;
  double last_detection_at = 0.0;
  std::string detector_vehicle_id;
  std::vector<std::string> member_ids;  // refreshed every update

  bool active_at(double now, double expiry_timeout) const noexcept;
};

using FenceMap = std::map<std::string, Geofence, std::less<>>;

// What a vehicle tells the server: where it is, how dirty it is, which road.
struct VehicleReport {
  std::string vehicle_id;
  Vec2 position;
  double density_weight = 1.0;
  double speed_kmh = 0.0;
  VehicleClass euro_class{VehicleClass::kMin};
  Powertrain powertrain = Powertrain::Hybrid;
};

struct ModeCommand {
  std::string vehicle_id;
  VehicleMode mode = VehicleMode::Polluting;
  double issued_at = 0.0;
  double effective_time = 0.0;
};

// One row of the audit trail. Optional fields are empty for reverts and forced commands.
struct CommandLogRecord {
  double sim_time = 0.0;
  std::string fence_id;
  std::string vehicle_id;
  std::optional<double> density_weight;
  std::optional<double> emission_rate;
  std::optional<double> probability;
  std::optional<double> draw;
  VehicleMode commanded_mode = VehicleMode::Polluting;
  double effective_time = 0.0;
};

// Expiry comparisons allow this much clock noise.
inline constexpr double kTimeEpsilon = 1e-9;

// Creates the fence for a newly detected cyclist, or moves an existing one to
// the detecting vehicle.
Geofence& on_detection(FenceMap& fences, std::string_view cyclist_id, std::string_view detecting_vehicle_id,
                       Vec2 detecting_position, double now, double radius);

// Removes fences not refreshed within the timeout (retained at exactly the
// timeout). Returns the last known members of the removed fences.
std::vector<std::string> expire(FenceMap& fences, double now, double expiry_timeout);

// Reports within the fence radius (inclusive), in report order.
std::vector<std::string> members(const Geofence& fence, std::span<const VehicleReport> vehicles);

// E(Delta) = L - background level.
double compute_limit(const ControllerConfig& config, const BackgroundReading& background);

// Weighted coin toss: polluting iff draw < probability.
inline VehicleMode toss(double probability, double draw) noexcept {
  return draw < probability ? VehicleMode::Polluting : VehicleMode::Electric;
}

// The solved optimisation for one fence at one decision instant.
struct FencePlan {
  std::string fence_id;
  std::vector<std::string> member_ids;  // sorted, as seen when planned
  GeofenceProblem problem;
  Assignment assignment;
  std::vector<std::string> forced_electric;  // detector when force_detector_electric is set
  std::vector<std::string> uncontrollable;   // pure ICE members, counted against the budget
  double uncontrollable_rate = 0.0;
  double limit = 0.0;  // E(Delta) before subtracting uncontrollable emissions
};

struct TickOutcome {
  FencePlan plan;
  std::vector<ModeCommand> commands;
  std::vector<CommandLogRecord> log;
};

FencePlan plan_fence(const Geofence& fence, std::span<const VehicleReport> member_reports,
                     const CoefficientTable& table, const ControllerConfig& config,
                     const BackgroundReading& background);

// Draws one toss per planned vehicle in ascending vehicle id order.
TickOutcome enact_plan(FencePlan plan, const ControllerConfig& config, UniformStream& coin, double now);

// plan_fence on the fence members among `vehicles`, then enact_plan.
TickOutcome decision_tick(const Geofence& fence, std::span<const VehicleReport> vehicles,
                          const CoefficientTable& table, const ControllerConfig& config,
                          const BackgroundReading& background, UniformStream& coin, double now);

// Single-vehicle operation: the detecting vehicle goes electric at once.
ModeCommand single_vehicle_tick(std::string_view detecting_vehicle_id, double now, const ControllerConfig& config);

// Central decision authority. All mutation goes through on_detection and
// update, called from one thread in simulation-time order; the object holds
// no references to outside state so it can be moved between threads.
class Coordinator {
 public:
  Coordinator(ControllerConfig config, CoefficientTable table);

  // Upserts the cyclist's fence. In single-vehicle mode also returns the
  // command switching the detector to electric.
  std::optional<ModeCommand> on_detection(std::string_view cyclist_id, std::string_view vehicle_id,
                                          Vec2 position, double now);

  // Expiry, membership refresh and, on decision/toss boundaries, new mode commands.
  std::vector<ModeCommand> update(double now, std::span<const VehicleReport> vehicles,
                                  const BackgroundReading& background, UniformStream& coin);

  const ControllerConfig& config() const noexcept { return config_; }
  const FenceMap& fences() const noexcept { return fences_; }
  const std::vector<CommandLogRecord>& log() const noexcept { return log_; }

  // Sorted union of members of all active fences as of the last update.
  std::vector<std::string> fence_members() const;
  // sum x_i e_i (+ uncontrollable emissions) over all fences at the last toss.
  double expected_in_fence_rate() const noexcept { return expected_rate_; }
  // E(Delta) at the last update.
  double current_limit() const noexcept { return current_limit_; }

 private:
  void revert(const std::string& vehicle_id, const std::string& fence_id, double now,
              std::vector<ModeCommand>& out);
  void record(const TickOutcome& outcome, std::vector<ModeCommand>& out);

  ControllerConfig config_;
  CoefficientTable table_;
  FenceMap fences_;
  std::map<std::string, FencePlan, std::less<>> plans_;
  struct Control {
    std::string fence_id;
    VehicleMode mode = VehicleMode::Polluting;
  };
  // Vehicles currently under a command and the fence that issued it.
  std::map<std::string, Control, std::less<>> controlled_;
  // Single-vehicle mode: detector id -> last detection time.
  std::map<std::string, double, std::less<>> single_timers_;
  std::vector<CommandLogRecord> log_;
  double next_solve_ = 0.0;
  double next_toss_ = 0.0;
  double expected_rate_ = 0.0;
  double current_limit_ = 0.0;
};

}  // namespace ecofence
