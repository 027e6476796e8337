#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecofence/simulation.hpp"

namespace ecofence {

// Aggregates over steps with at least one active fence.
struct TraceStats {
  int steps = 0;
  int fence_steps = 0;
  double mean_in_fence_rate = 0.0;
  double max_in_fence_rate = 0.0;
  double mean_expected_rate = 0.0;
  double max_expected_rate = 0.0;
  double mean_members = 0.0;
  double mean_budget = 0.0;
  double min_budget = 0.0;
  double fraction_within_budget = 0.0;  // realized in-fence rate <= budget
  double mean_total_rate = 0.0;
};

struct DwellFraction {
  std::string vehicle_id;
  double polluting_fraction = 0.0;
  int mode_switches = 0;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  TraceStats control;
  TraceStats baseline;
  std::vector<DwellFraction> dwell;  // control run
};

TraceStats trace_stats(const ScenarioTrace& trace);
std::vector<DwellFraction> dwell_fractions(const ScenarioTrace& trace);

struct CompareResult {
  RunSummary summary;
  ScenarioTrace control;
  ScenarioTrace baseline;
};

// Runs the scenario with control forced off, then on, with the same seed.
// The baseline draws no coin tosses, so spawns match exactly.
CompareResult run_compare(const Scenario& scenario, std::uint64_t seed, const RunOptions& options = {});

nlohmann::json summary_to_json(const RunSummary& summary);

enum class PlotKind { TotalEmissionsVsTime, InFenceBeforeAfter, PerVehicleAssignmentSnapshot, FleetSizeSweep };
PlotKind parse_plot_kind(std::string_view text);
std::string_view to_string(PlotKind kind) noexcept;

struct PlotTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct PlotInputs {
  const ScenarioTrace* control = nullptr;
  const ScenarioTrace* baseline = nullptr;
  std::optional<double> snapshot_time;  // per-vehicle snapshot; default is the busiest tick
};

// Columnar data for an external plotting tool.
PlotTable emit_plot_data(const PlotInputs& inputs, PlotKind kind);

// Shortest decimal that round-trips.
std::string format_number(double value);

void write_trace_csv(std::ostream& out, const ScenarioTrace& trace);
void write_vehicle_csv(std::ostream& out, const ScenarioTrace& trace);
void write_command_log_csv(std::ostream& out, std::span<const CommandLogRecord> log);
void write_plot_csv(std::ostream& out, const PlotTable& table);

// Seed sweeps: one run_compare per seed, merged in seed order.
namespace serial {
std::vector<RunSummary> sweep(const Scenario& scenario, std::span<const std::uint64_t> seeds);
}
namespace parallel {
std::vector<RunSummary> sweep(const Scenario& scenario, std::span<const std::uint64_t> seeds);
}

}  // namespace ecofence
