#include "ecofence/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>

#include "ecofence/errors.hpp"

namespace ecofence {

TraceStats trace_stats(const ScenarioTrace& trace) {
  TraceStats s;
  s.steps = static_cast<int>(trace.rows.size());
  double in_sum = 0.0, expected_sum = 0.0, members_sum = 0.0, budget_sum = 0.0, total_sum = 0.0;
  int within = 0;
  for (const TraceRow& row : trace.rows) {
    total_sum += row.total_rate;
    if (row.active_fences == 0) continue;
    if (s.fence_steps == 0) s.min_budget = row.budget;
    ++s.fence_steps;
    in_sum += row.in_fence_rate;
    expected_sum += row.expected_in_fence_rate;
    members_sum += row.member_count;
    budget_sum += row.budget;
    s.max_in_fence_rate = std::max(s.max_in_fence_rate, row.in_fence_rate);
    s.max_expected_rate = std::max(s.max_expected_rate, row.expected_in_fence_rate);
    s.min_budget = std::min(s.min_budget, row.budget);
    if (row.in_fence_rate <= row.budget + kBudgetTolerance) ++within;
  }
  if (s.steps > 0) s.mean_total_rate = total_sum / s.steps;
  if (s.fence_steps > 0) {
    const double n = s.fence_steps;
    s.mean_in_fence_rate = in_sum / n;
    s.mean_expected_rate = expected_sum / n;
    s.mean_members = members_sum / n;
    s.mean_budget = budget_sum / n;
    s.fraction_within_budget = within / n;
  }
  return s;
}

std::vector<DwellFraction> dwell_fractions(const ScenarioTrace& trace) {
  std::vector<DwellFraction> out;
  for (const VehicleDwell& d : trace.dwell) {
    out.push_back({d.vehicle_id, d.present_s > 0.0 ? d.polluting_s / d.present_s : 0.0, d.mode_switches});
  }
  return out;
}

CompareResult run_compare(const Scenario& scenario, std::uint64_t seed, const RunOptions& options) {
  Scenario baseline = scenario;
  baseline.config.controller.control_enabled = false;
  Scenario controlled = scenario;
  controlled.config.controller.control_enabled = true;

  CompareResult result;
  result.baseline = run(baseline, seed, options);
  result.control = run(controlled, seed, options);
  result.summary.scenario = scenario.name;
  result.summary.seed = seed;
  result.summary.baseline = trace_stats(result.baseline);
  result.summary.control = trace_stats(result.control);
  result.summary.dwell = dwell_fractions(result.control);
  return result;
}

namespace {

nlohmann::json stats_json(const TraceStats& s) {
  return {{"steps", s.steps},
          {"fence_steps", s.fence_steps},
          {"mean_in_fence_rate_g_per_min", s.mean_in_fence_rate},
          {"max_in_fence_rate_g_per_min", s.max_in_fence_rate},
          {"mean_expected_rate_g_per_min", s.mean_expected_rate},
          {"max_expected_rate_g_per_min", s.max_expected_rate},
          {"mean_members", s.mean_members},
          {"mean_budget_g_per_min", s.mean_budget},
          {"min_budget_g_per_min", s.min_budget},
          {"fraction_within_budget", s.fraction_within_budget},
          {"mean_total_rate_g_per_min", s.mean_total_rate}};
}

}  // namespace

nlohmann::json summary_to_json(const RunSummary& summary) {
  nlohmann::json dwell = nlohmann::json::array();
  for (const DwellFraction& d : summary.dwell) {
    dwell.push_back({{"vehicle_id", d.vehicle_id},
                     {"polluting_fraction", d.polluting_fraction},
                     {"mode_switches", d.mode_switches}});
  }
  return {{"scenario", summary.scenario},
          {"seed", summary.seed},
          {"control", stats_json(summary.control)},
          {"baseline", stats_json(summary.baseline)},
          {"dwell", dwell}};
}

PlotKind parse_plot_kind(std::string_view text) {
  if (text == "total_emissions_vs_time") return PlotKind::TotalEmissionsVsTime;
  if (text == "in_fence_before_after") return PlotKind::InFenceBeforeAfter;
  if (text == "per_vehicle_assignment_snapshot") return PlotKind::PerVehicleAssignmentSnapshot;
  if (text == "fleet_size_sweep") return PlotKind::FleetSizeSweep;
  throw DomainError("unknown plot kind '" + std::string(text) + "'");
}

std::string_view to_string(PlotKind kind) noexcept {
  switch (kind) {
    case PlotKind::TotalEmissionsVsTime:
      return "total_emissions_vs_time";
    case PlotKind::InFenceBeforeAfter:
      return "in_fence_before_after";
    case PlotKind::PerVehicleAssignmentSnapshot:
      return "per_vehicle_assignment_snapshot";
    case PlotKind::FleetSizeSweep:
      return "fleet_size_sweep";
  }
  return "?";
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

bool is_decision(const CommandLogRecord& r) { return r.draw.has_value(); }

}  // namespace

PlotTable emit_plot_data(const PlotInputs& in, PlotKind kind) {
  PlotTable table;
  const ScenarioTrace* primary = in.control ? in.control : in.baseline;
  if (!primary || primary->rows.empty()) throw DomainError("plot data needs a non-empty trace");

  switch (kind) {
    case PlotKind::TotalEmissionsVsTime:
      table.columns = {"sim_time", "vehicle_count", "total_rate_g_per_min"};
      for (const TraceRow& r : primary->rows) {
        table.rows.push_back({format_number(r.sim_time), std::to_string(r.vehicle_count), format_number(r.total_rate)});
      }
      break;

    case PlotKind::InFenceBeforeAfter: {
      if (!in.control || !in.baseline) throw DomainError("in_fence_before_after needs control and baseline traces");
      if (in.control->rows.size() != in.baseline->rows.size()) throw DomainError("traces differ in length");
      table.columns = {"sim_time", "before_g_per_min", "after_g_per_min", "budget_g_per_min"};
      for (std::size_t i = 0; i < in.control->rows.size(); ++i) {
        const TraceRow& after = in.control->rows[i];
        const TraceRow& before = in.baseline->rows[i];
        table.rows.push_back({format_number(after.sim_time), format_number(before.in_fence_rate),
                              format_number(after.in_fence_rate), format_number(after.budget)});
      }
      break;
    }

    case PlotKind::PerVehicleAssignmentSnapshot: {
      // Decision rows grouped by tick.
      std::map<double, std::vector<const CommandLogRecord*>> ticks;
      for (const CommandLogRecord& r : primary->commands) {
        if (is_decision(r)) ticks[r.sim_time].push_back(&r);
      }
      table.columns = {"sim_time", "fence_id", "vehicle_id", "d", "e_g_per_min", "x", "draw", "mode"};
      if (ticks.empty()) break;
      auto chosen = ticks.begin();
      if (in.snapshot_time) {
        chosen = ticks.lower_bound(*in.snapshot_time - kTimeEpsilon);
        if (chosen == ticks.end()) throw DomainError("no decision tick at or after the snapshot time");
      } else {
        for (auto it = ticks.begin(); it != ticks.end(); ++it) {
          if (it->second.size() > chosen->second.size()) chosen = it;
        }
      }
      for (const CommandLogRecord* r : chosen->second) {
        table.rows.push_back({format_number(r->sim_time), r->fence_id, r->vehicle_id, opt(r->density_weight),
                              opt(r->emission_rate), opt(r->probability), opt(r->draw),
                              std::string(to_string(r->commanded_mode))});
      }
      break;
    }

    case PlotKind::FleetSizeSweep: {
      struct Tick {
        int members = 0;
        double demand = 0.0, expected = 0.0, x_sum = 0.0;
        int polluting = 0;
      };
      std::map<std::pair<double, std::string>, Tick> ticks;
      for (const CommandLogRecord& r : primary->commands) {
        if (!is_decision(r)) continue;
        Tick& t = ticks[{r.sim_time, r.fence_id}];
        ++t.members;
        t.demand += *r.emission_rate;
        t.expected += *r.probability * *r.emission_rate;
        t.x_sum += *r.probability;
        if (r.commanded_mode == VehicleMode::Polluting) ++t.polluting;
      }
      struct Bucket {
        int ticks = 0;
        double demand = 0.0, expected = 0.0, x_sum = 0.0, polluting = 0.0, vehicles = 0.0;
      };
      std::map<int, Bucket> buckets;
      for (const auto& [key, t] : ticks) {
        Bucket& b = buckets[t.members];
        ++b.ticks;
        b.demand += t.demand;
        b.expected += t.expected;
        b.x_sum += t.x_sum;
        b.polluting += t.polluting;
        b.vehicles += t.members;
      }
      table.columns = {"members", "ticks", "mean_demand_g_per_min", "mean_expected_g_per_min", "mean_x",
                       "polluting_fraction"};
      for (const auto& [members, b] : buckets) {
        table.rows.push_back({std::to_string(members), std::to_string(b.ticks), format_number(b.demand / b.ticks),
                              format_number(b.expected / b.ticks), format_number(b.x_sum / b.vehicles),
                              format_number(b.polluting / b.vehicles)});
      }
      break;
    }
  }
  return table;
}

void write_trace_csv(std::ostream& out, const ScenarioTrace& trace) {
  out << "sim_time,vehicle_count,member_count,active_fences,fence_id,fence_x,fence_y,last_detection_at,"
         "in_fence_rate,out_fence_rate,total_rate,budget,expected_in_fence_rate\n";
  for (const TraceRow& r : trace.rows) {
    const bool fence = r.active_fences > 0;
    out << format_number(r.sim_time) << ',' << r.vehicle_count << ',' << r.member_count << ',' << r.active_fences
        << ',' << r.fence_id << ',' << (fence ? format_number(r.fence_x) : "") << ','
        << (fence ? format_number(r.fence_y) : "") << ',' << (fence ? format_number(r.last_detection_at) : "")
        << ',' << format_number(r.in_fence_rate) << ',' << format_number(r.out_fence_rate) << ','
        << format_number(r.total_rate) << ',' << format_number(r.budget) << ','
        << format_number(r.expected_in_fence_rate) << '\n';
  }
}

void write_vehicle_csv(std::ostream& out, const ScenarioTrace& trace) {
  out << "sim_time,vehicle_id,x,y,edge_id,speed_kmh,mode,in_fence\n";
  for (const VehicleTraceRow& r : trace.vehicle_rows) {
    out << format_number(r.sim_time) << ',' << r.vehicle_id << ',' << format_number(r.position.x) << ','
        << format_number(r.position.y) << ',' << r.edge_id << ',' << format_number(r.speed_kmh) << ','
        << to_string(r.mode) << ',' << (r.in_fence ? 1 : 0) << '\n';
  }
}

void write_command_log_csv(std::ostream& out, std::span<const CommandLogRecord> log) {
  out << "sim_time,fence_id,vehicle_id,d_i,e_i,x_i,draw,commanded_mode,effective_time\n";
  for (const CommandLogRecord& r : log) {
    out << format_number(r.sim_time) << ',' << r.fence_id << ',' << r.vehicle_id << ',' << opt(r.density_weight)
        << ',' << opt(r.emission_rate) << ',' << opt(r.probability) << ',' << opt(r.draw) << ','
        << to_string(r.commanded_mode) << ',' << format_number(r.effective_time) << '\n';
  }
}

void write_plot_csv(std::ostream& out, const PlotTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace ecofence
