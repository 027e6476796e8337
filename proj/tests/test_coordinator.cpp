#include <doctest.h>

#include <algorithm>

#include "ecofence/coordinator.hpp"
#include "ecofence/errors.hpp"
#include "test_support.hpp"

using namespace ecofence;

namespace {

VehicleReport report(std::string id, Vec2 pos, double d = 1.0, double speed = 30.0, int cls = 1,
                     Powertrain pt = Powertrain::Hybrid) {
  return {std::move(id), pos, d, speed, VehicleClass(cls), pt};
}

// Every vehicle emits 1.0 g/min at 30 km/h.
const CoefficientTable& unit_table() {
  static const CoefficientTable t = test::flat_table(1.0, 60.0);
  return t;
}

std::optional<VehicleMode> last_command(const std::vector<ModeCommand>& cmds, const std::string& id) {
  std::optional<VehicleMode> mode;
  for (const auto& c : cmds) {
    if (c.vehicle_id == id) mode = c.mode;
  }
  return mode;
}

}  // namespace

TEST_CASE("on_detection creates and recenters") {
  FenceMap fences;
  Geofence& f = on_detection(fences, "tag", "v1", {0, 0}, 5.0, 100.0);
  CHECK(f.center == Vec2{0, 0});
  CHECK(f.created_at == 5.0);
  CHECK(f.last_detection_at == 5.0);

  on_detection(fences, "tag", "v2", {30, 0}, 8.0, 100.0);
  REQUIRE(fences.size() == 1);
  CHECK(fences.at("tag").center == Vec2{30, 0});
  CHECK(fences.at("tag").last_detection_at == 8.0);
  CHECK(fences.at("tag").created_at == 5.0);
  CHECK(fences.at("tag").detector_vehicle_id == "v2");

  on_detection(fences, "other", "v3", {500, 0}, 9.0, 100.0);
  CHECK(fences.size() == 2);
}

TEST_CASE("expire keeps a fence at exactly the timeout") {
  FenceMap fences;
  on_detection(fences, "tag", "v1", {0, 0}, 10.0, 100.0);
  fences.at("tag").member_ids = {"a", "b"};

  CHECK(expire(fences, 30.0, 20.0).empty());
  CHECK(fences.size() == 1);

  const auto restored = expire(fences, 30.1, 20.0);
  CHECK(fences.empty());
  CHECK(restored == std::vector<std::string>{"a", "b"});

  CHECK(expire(fences, 100.0, 20.0).empty());
}

TEST_CASE("members uses an inclusive radius") {
  Geofence f;
  f.center = {0, 0};
  f.radius = 100.0;
  const std::vector<VehicleReport> fleet{report("edge", {60, 80}), report("out", {100.1, 0}),
                                         report("in", {-10, 5})};
  CHECK(members(f, fleet) == std::vector<std::string>{"edge", "in"});
  CHECK(members(f, std::span<const VehicleReport>{}).empty());
}

TEST_CASE("compute_limit subtracts the background") {
  ControllerConfig cfg;
  CHECK(compute_limit(cfg, BackgroundReading::from_level(0.0, 1.0)) == 1.0);
  CHECK(compute_limit(cfg, BackgroundReading::from_level(1.5, 1.0)) == -0.5);
  CHECK(compute_limit(cfg, BackgroundReading::from_level(0.4, 1.0)) == doctest::Approx(0.6));
}

TEST_CASE("toss") {
  UniformStream rng(11, StreamPurpose::CoinToss);
  int polluting = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next();
    CHECK(toss(1.0, u) == VehicleMode::Polluting);
    CHECK(toss(0.0, u) == VehicleMode::Electric);
    polluting += toss(0.5, u) == VehicleMode::Polluting;
  }
  CHECK(polluting >= 4800);
  CHECK(polluting <= 5200);
}

TEST_CASE("config validation") {
  ControllerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.radius_m = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.actuation_latency_s = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const ControllerConfig hil = ControllerConfig::hil_emulation();
  CHECK(hil.tau_s == 5.0);
  CHECK(hil.actuation_latency_s == 5.0);
  CHECK(parse_powertrain("ev") == Powertrain::PureEV);
  CHECK_THROWS_AS(parse_powertrain("diesel"), DomainError);
}

TEST_CASE("decision_tick builds the problem from reports") {
  Geofence fence;
  fence.id = "tag";
  fence.center = {0, 0};
  fence.radius = 100;
  const std::vector<VehicleReport> fleet{report("b", {10, 0}, 2.0), report("a", {0, 10}, 1.0),
                                         report("far", {500, 0})};
  ControllerConfig cfg;
  cfg.allowable_limit = 1.5;
  UniformStream coin(1, StreamPurpose::CoinToss);
  const TickOutcome out =
      decision_tick(fence, fleet, unit_table(), cfg, BackgroundReading::from_level(0, 1.0), coin, 3.0);
  REQUIRE(out.plan.problem.entries.size() == 2);
  CHECK(out.plan.problem.entries[0].vehicle_id == "a");
  CHECK(out.plan.problem.entries[1].density_weight == 2.0);
  CHECK(out.plan.problem.entries[1].emission_rate == 1.0);
  CHECK(out.plan.assignment.probability("a") == 1.0);
  CHECK(out.plan.assignment.probability("b") == 0.5);
  REQUIRE(out.log.size() == 2);
  CHECK(out.log[0].vehicle_id == "a");
  CHECK(out.log[0].commanded_mode == VehicleMode::Polluting);
  CHECK(coin.draws() == 2);
  for (const auto& c : out.commands) CHECK(c.vehicle_id != "far");
}

TEST_CASE("decision_tick with a non-positive limit commands everyone electric") {
  Geofence fence;
  fence.id = "tag";
  fence.radius = 100;
  std::vector<VehicleReport> fleet;
  for (int i = 0; i < 6; ++i) fleet.push_back(report("v" + std::to_string(i), {double(i), 0}));
  UniformStream coin(3, StreamPurpose::CoinToss);
  const TickOutcome out =
      decision_tick(fence, fleet, unit_table(), {}, BackgroundReading::from_level(1.5, 1.0), coin, 0.0);
  REQUIRE(out.commands.size() == 6);
  for (const auto& c : out.commands) CHECK(c.mode == VehicleMode::Electric);
}

TEST_CASE("actuation latency is carried on commands") {
  Geofence fence;
  fence.id = "tag";
  fence.radius = 100;
  const std::vector<VehicleReport> fleet{report("a", {0, 0})};
  UniformStream coin(3, StreamPurpose::CoinToss);
  const ControllerConfig hil = ControllerConfig::hil_emulation();
  const TickOutcome out = decision_tick(fence, fleet, unit_table(), hil, {}, coin, 12.0);
  REQUIRE(out.commands.size() == 1);
  CHECK(out.commands[0].issued_at == 12.0);
  CHECK(out.commands[0].effective_time == 17.0);
  CHECK(single_vehicle_tick("a", 4.0, hil).effective_time == 9.0);
}

TEST_CASE("forced detector and uncontrollable vehicles") {
  Geofence fence;
  fence.id = "tag";
  fence.radius = 100;
  fence.detector_vehicle_id = "det";
  const std::vector<VehicleReport> fleet{report("det", {0, 0}), report("ev", {1, 0}, 1, 30, 1, Powertrain::PureEV),
                                         report("ice", {2, 0}, 1, 30, 1, Powertrain::PureICE),
                                         report("hv", {3, 0})};
  ControllerConfig cfg;
  cfg.force_detector_electric = true;
  cfg.allowable_limit = 1.5;
  const FencePlan plan = plan_fence(fence, fleet, unit_table(), cfg, {});
  CHECK(plan.forced_electric == std::vector<std::string>{"det"});
  CHECK(plan.uncontrollable == std::vector<std::string>{"ice"});
  CHECK(plan.problem.limit == doctest::Approx(0.5));
  CHECK(plan.assignment.probability("ev") == 1.0);
  CHECK(plan.assignment.probability("hv") == 0.5);

  UniformStream coin(9, StreamPurpose::CoinToss);
  const TickOutcome out = enact_plan(plan, cfg, coin, 0.0);
  CHECK(coin.draws() == 2);
  CHECK(last_command(out.commands, "det") == VehicleMode::Electric);
  CHECK_FALSE(last_command(out.commands, "ice").has_value());
  CHECK(last_command(out.commands, "ev") == VehicleMode::Polluting);
}

TEST_CASE("Coordinator: single-vehicle timeline") {
  ControllerConfig cfg;
  cfg.single_vehicle = true;
  Coordinator c(cfg, unit_table());
  UniformStream coin(1, StreamPurpose::CoinToss);
  const std::vector<VehicleReport> fleet{report("v", {0, 0})};

  auto cmd = c.on_detection("tag", "v", {0, 0}, 0.0);
  REQUIRE(cmd.has_value());
  CHECK(cmd->mode == VehicleMode::Electric);
  CHECK(cmd->effective_time == 0.0);

  for (int t = 1; t <= 20; ++t) CHECK(c.update(t, fleet, {}, coin).empty());
  auto out = c.update(20.1, fleet, {}, coin);
  CHECK(last_command(out, "v") == VehicleMode::Polluting);
  CHECK(coin.draws() == 0);
}

TEST_CASE("Coordinator: repeated single-vehicle detections keep the vehicle electric") {
  ControllerConfig cfg;
  cfg.single_vehicle = true;
  Coordinator c(cfg, unit_table());
  UniformStream coin(1, StreamPurpose::CoinToss);
  const std::vector<VehicleReport> fleet{report("v", {0, 0})};
  int commands = 0;
  for (int t = 0; t <= 60; ++t) {
    if (t % 5 == 0) commands += c.on_detection("tag", "v", {0, 0}, t).has_value();
    const auto out = c.update(t, fleet, {}, coin);
    CHECK_FALSE(last_command(out, "v") == VehicleMode::Polluting);
  }
  CHECK(commands == 1);
}

TEST_CASE("Coordinator: expected rate never exceeds the budget") {
  Coordinator c({}, unit_table());
  UniformStream coin(5, StreamPurpose::CoinToss);
  std::vector<VehicleReport> fleet;
  for (int i = 0; i < 10; ++i) fleet.push_back(report("v" + std::to_string(i), {i * 5.0, 0}, 1.0 + i % 3));
  c.on_detection("tag", "v0", {0, 0}, 0.0);
  for (int t = 0; t <= 20; ++t) {
    c.update(t, fleet, {}, coin);
    CHECK(c.expected_in_fence_rate() <= c.current_limit() + kBudgetTolerance);
  }
}

TEST_CASE("Coordinator: non-members are never commanded") {
  Coordinator c({}, unit_table());
  UniformStream coin(5, StreamPurpose::CoinToss);
  std::vector<VehicleReport> fleet{report("in1", {0, 0}), report("in2", {50, 0}), report("out", {150, 0})};
  c.on_detection("tag", "in1", {0, 0}, 0.0);
  for (int t = 0; t < 10; ++t) {
    const auto out = c.update(t, fleet, BackgroundReading::from_level(0.2, 1.0), coin);
    CHECK_FALSE(last_command(out, "out").has_value());
  }
  for (const auto& rec : c.log()) CHECK(rec.vehicle_id != "out");
  CHECK(c.fence_members() == std::vector<std::string>{"in1", "in2"});
}

TEST_CASE("Coordinator: fence expiry reverts electric members") {
  Coordinator c({}, unit_table());
  UniformStream coin(5, StreamPurpose::CoinToss);
  std::vector<VehicleReport> fleet{report("a", {0, 0}), report("b", {10, 0})};
  c.on_detection("tag", "a", {0, 0}, 0.0);
  // Background above the limit: everyone electric.
  for (int t = 0; t <= 20; ++t) {
    const auto out = c.update(t, fleet, BackgroundReading::from_level(2.0, 1.0), coin);
    if (t == 0) {
      CHECK(last_command(out, "a") == VehicleMode::Electric);
      CHECK(last_command(out, "b") == VehicleMode::Electric);
    }
  }
  CHECK(c.fences().size() == 1);
  const auto out = c.update(21.0, fleet, BackgroundReading::from_level(2.0, 1.0), coin);
  CHECK(c.fences().empty());
  CHECK(last_command(out, "a") == VehicleMode::Polluting);
  CHECK(last_command(out, "b") == VehicleMode::Polluting);
}

TEST_CASE("Coordinator: a member leaving the fence reverts at the next tick") {
  Coordinator c({}, unit_table());
  UniformStream coin(5, StreamPurpose::CoinToss);
  std::vector<VehicleReport> fleet{report("a", {0, 0})};
  c.on_detection("tag", "a", {0, 0}, 0.0);
  auto out = c.update(0.0, fleet, BackgroundReading::from_level(2.0, 1.0), coin);
  CHECK(last_command(out, "a") == VehicleMode::Electric);
  fleet[0].position = {300, 0};
  out = c.update(1.0, fleet, BackgroundReading::from_level(2.0, 1.0), coin);
  CHECK(last_command(out, "a") == VehicleMode::Polluting);
}

TEST_CASE("Coordinator: solve and toss cadence") {
  ControllerConfig cfg;
  cfg.tau_s = 5.0;
  cfg.switch_interval_s = 2.0;
  Coordinator c(cfg, unit_table());
  UniformStream coin(5, StreamPurpose::CoinToss);
  std::vector<VehicleReport> fleet{report("a", {0, 0}), report("b", {1, 0})};
  c.on_detection("tag", "a", {0, 0}, 0.0);
  std::vector<double> toss_times;
  for (int t = 0; t <= 10; ++t) {
    c.on_detection("tag", "a", {0, 0}, t);
    if (!c.update(t, fleet, {}, coin).empty()) toss_times.push_back(t);
  }
  CHECK(toss_times == std::vector<double>{0, 2, 4, 6, 8, 10});
}

TEST_CASE("Coordinator: identical inputs give identical logs") {
  auto run_once = [] {
    Coordinator c({}, unit_table());
    UniformStream coin(42, StreamPurpose::CoinToss);
    std::vector<VehicleReport> fleet;
    for (int i = 0; i < 8; ++i) fleet.push_back(report("v" + std::to_string(i), {i * 7.0, 0}, 1.0 + i % 4));
    c.on_detection("tag", "v0", {0, 0}, 0.0);
    for (int t = 0; t < 30; ++t) c.update(t, fleet, BackgroundReading::from_level(0.3, 1.0), coin);
    std::vector<std::tuple<double, std::string, int, double>> out;
    for (const auto& r : c.log()) out.emplace_back(r.sim_time, r.vehicle_id, int(r.commanded_mode), r.draw.value_or(-1));
    return out;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("Coordinator: overlapping fences claim each vehicle once") {
  Coordinator c({}, unit_table());
  UniformStream coin(5, StreamPurpose::CoinToss);
  std::vector<VehicleReport> fleet{report("a", {0, 0}), report("b", {50, 0}), report("c", {120, 0})};
  c.on_detection("t1", "a", {0, 0}, 0.0);
  c.on_detection("t2", "c", {100, 0}, 0.0);
  c.update(0.0, fleet, {}, coin);
  CHECK(c.fences().at("t1").member_ids == std::vector<std::string>{"a", "b"});
  CHECK(c.fences().at("t2").member_ids == std::vector<std::string>{"c"});
}
