// ecofence command-line front end.
//
//   ecofence run --scenario s.json --seed 1 --out out/
//   ecofence compare --scenario s.json --seed 1 --out out/
//   ecofence sweep --scenario s.json --seeds 1..16 --out out/
//   ecofence solve-debug --problem p.json
//   ecofence validate --scenario s.json
//
// Exit status: 0 success, 1 validation failure, 2 runtime failure.

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "ecofence/errors.hpp"
#include "ecofence/kernels.hpp"
#include "ecofence/lp_optimizer.hpp"
#include "ecofence/reporting.hpp"
#include "ecofence/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace ecofence;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct ScenarioArgs {
  std::string scenario;
  std::uint64_t seed = 1;
  bool no_control = false;
  bool single_vehicle = false;
  bool hil = false;
  std::optional<double> tau;
  std::optional<double> radius;
  std::optional<double> limit;
  std::optional<std::string> background;
  std::string out = "ecofence-out";
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args, bool with_seed) {
  cmd->add_option("--scenario", args.scenario, "Scenario JSON file")->required();
  if (with_seed) cmd->add_option("--seed", args.seed, "Run seed");
  cmd->add_flag("--single-vehicle", args.single_vehicle, "Only the detecting vehicle goes electric");
  cmd->add_flag("--hil", args.hil, "Hardware-in-the-loop timing: 5 s decisions and actuation latency");
  cmd->add_option("--tau", args.tau, "Decision interval in seconds");
  cmd->add_option("--radius", args.radius, "Geofence radius in meters");
  cmd->add_option("--limit", args.limit, "Allowable in-fence emissions L in g/min");
  cmd->add_option("--background", args.background, "Background level in g/min, or a time_s,level_g_per_min CSV");
  cmd->add_option("--out", args.out, "Output directory");
}

Scenario prepare(const ScenarioArgs& args) {
  Scenario scenario = load_scenario(args.scenario);
  ControllerConfig& c = scenario.config.controller;
  if (args.hil) {
    const ControllerConfig hil = ControllerConfig::hil_emulation();
    c.tau_s = hil.tau_s;
    c.switch_interval_s = hil.switch_interval_s;
    c.actuation_latency_s = hil.actuation_latency_s;
  }
  if (args.tau) c.tau_s = c.switch_interval_s = *args.tau;
  if (args.radius) c.radius_m = *args.radius;
  if (args.limit) c.allowable_limit = *args.limit;
  if (args.single_vehicle) c.single_vehicle = true;
  if (args.no_control) c.control_enabled = false;
  if (args.background) scenario.background = parse_background_arg(*args.background);
  scenario.config.validate();
  return scenario;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_trace_files(const fs::path& dir, const ScenarioTrace& trace) {
  fs::create_directories(dir);
  auto trace_out = open_out(dir / "trace.csv");
  write_trace_csv(trace_out, trace);
  auto vehicles_out = open_out(dir / "vehicles.csv");
  write_vehicle_csv(vehicles_out, trace);
  auto log_out = open_out(dir / "commands.csv");
  write_command_log_csv(log_out, trace.commands);
}

void write_plot(const fs::path& dir, const PlotInputs& inputs, PlotKind kind) {
  auto out = open_out(dir / ("plot_" + std::string(to_string(kind)) + ".csv"));
  write_plot_csv(out, emit_plot_data(inputs, kind));
}

void print_stats(const char* label, const TraceStats& s) {
  std::cout << std::fixed << std::setprecision(3) << label << ": fence steps " << s.fence_steps
            << ", mean in-fence " << s.mean_in_fence_rate << " g/min, max " << s.max_in_fence_rate
            << ", mean members " << s.mean_members << ", within budget " << s.fraction_within_budget << "\n";
}

int cmd_run(const ScenarioArgs& args) {
  const Scenario scenario = prepare(args);
  const ScenarioTrace trace = run(scenario, args.seed);
  const fs::path dir = args.out;
  write_trace_files(dir, trace);

  RunSummary summary;
  summary.scenario = scenario.name;
  summary.seed = args.seed;
  (scenario.config.controller.control_enabled ? summary.control : summary.baseline) = trace_stats(trace);
  summary.dwell = dwell_fractions(trace);
  open_out(dir / "summary.json") << summary_to_json(summary).dump(2) << '\n';

  PlotInputs inputs;
  inputs.control = &trace;
  write_plot(dir, inputs, PlotKind::TotalEmissionsVsTime);
  write_plot(dir, inputs, PlotKind::PerVehicleAssignmentSnapshot);
  write_plot(dir, inputs, PlotKind::FleetSizeSweep);
  print_stats(scenario.config.controller.control_enabled ? "control" : "baseline", trace_stats(trace));
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_compare(const ScenarioArgs& args) {
  const Scenario scenario = prepare(args);
  const CompareResult result = run_compare(scenario, args.seed);
  const fs::path dir = args.out;
  write_trace_files(dir / "control", result.control);
  write_trace_files(dir / "baseline", result.baseline);
  open_out(dir / "summary.json") << summary_to_json(result.summary).dump(2) << '\n';

  PlotInputs inputs{&result.control, &result.baseline, std::nullopt};
  for (PlotKind kind : {PlotKind::TotalEmissionsVsTime, PlotKind::InFenceBeforeAfter,
                        PlotKind::PerVehicleAssignmentSnapshot, PlotKind::FleetSizeSweep}) {
    write_plot(dir, inputs, kind);
  }
  print_stats("baseline", result.summary.baseline);
  print_stats("control ", result.summary.control);
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw DomainError("bad seed range '" + text + "'");
    return v;
  };
  if (dots == std::string::npos) return {parse(text)};
  const std::uint64_t lo = parse(std::string_view(text).substr(0, dots));
  const std::uint64_t hi = parse(std::string_view(text).substr(dots + 2));
  if (hi < lo) throw DomainError("seed range '" + text + "' is empty");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  return seeds;
}

int cmd_sweep(const ScenarioArgs& args, const std::string& range, bool serial_only) {
  const Scenario scenario = prepare(args);
  const std::vector<std::uint64_t> seeds = parse_seed_range(range);
  const std::vector<RunSummary> results =
      serial_only ? serial::sweep(scenario, seeds) : parallel::sweep(scenario, seeds);

  const fs::path dir = args.out;
  fs::create_directories(dir);
  nlohmann::json all = nlohmann::json::array();
  auto csv = open_out(dir / "sweep.csv");
  csv << "seed,baseline_mean_in_fence,control_mean_in_fence,control_max_in_fence,control_mean_members,"
         "control_within_budget\n";
  for (const RunSummary& s : results) {
    all.push_back(summary_to_json(s));
    csv << s.seed << ',' << format_number(s.baseline.mean_in_fence_rate) << ','
        << format_number(s.control.mean_in_fence_rate) << ',' << format_number(s.control.max_in_fence_rate) << ','
        << format_number(s.control.mean_members) << ',' << format_number(s.control.fraction_within_budget) << '\n';
  }
  open_out(dir / "sweep.json") << all.dump(2) << '\n';
  std::cout << "swept " << seeds.size() << " seeds on " << (serial_only ? 1 : max_threads())
            << " thread(s), wrote " << dir.string() << "\n";
  return 0;
}

int cmd_solve_debug(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, {"cannot open file"});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path, {e.what()});
  }
  GeofenceProblem problem;
  try {
    problem.limit = doc.at("limit").get<double>();
    for (const auto& e : doc.at("entries")) {
      problem.entries.push_back({e.at("id").get<std::string>(), e.value("d", 1.0), e.at("e").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path, {e.what()});
  }
  const Assignment a = solve(problem);
  std::cout << std::left << std::setw(14) << "vehicle_id" << std::right << std::setw(10) << "d" << std::setw(12)
            << "e(g/min)" << std::setw(12) << "x" << "\n";
  for (std::size_t i = 0; i < problem.entries.size(); ++i) {
    const ProblemEntry& e = problem.entries[i];
    std::cout << std::left << std::setw(14) << e.vehicle_id << std::right << std::fixed << std::setprecision(4)
              << std::setw(10) << e.density_weight << std::setw(12) << e.emission_rate << std::setw(12)
              << a.probabilities[i] << "\n";
  }
  std::cout << "limit " << problem.limit << "  expected " << expected_emission(a, problem) << "  objective "
            << a.objective_value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emission budgeting for hybrid vehicles inside a geofence around a detected cyclist"};
  app.require_subcommand(1);

  ScenarioArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write trace, command log and summary");
  add_scenario_options(run_cmd, run_args, true);
  run_cmd->add_flag("--no-control", run_args.no_control, "Baseline: never command any vehicle");

  ScenarioArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Run baseline and controlled with the same seed");
  add_scenario_options(compare_cmd, compare_args, true);

  ScenarioArgs sweep_args;
  std::string seed_range = "1..8";
  bool serial_only = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Compare over a range of seeds");
  add_scenario_options(sweep_cmd, sweep_args, false);
  sweep_cmd->add_option("--seeds", seed_range, "Seed range a..b (inclusive)");
  sweep_cmd->add_flag("--serial", serial_only, "Use the serial reference sweep");

  std::string problem_path;
  auto* solve_cmd = app.add_subcommand("solve-debug", "Solve one optimisation problem and print the assignment");
  solve_cmd->add_option("--problem", problem_path, "Problem JSON: {limit, entries: [{id, d, e}]}")->required();

  ScenarioArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file and report every problem");
  validate_cmd->add_option("--scenario", validate_args.scenario, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*compare_cmd) return cmd_compare(compare_args);
    if (*sweep_cmd) return cmd_sweep(sweep_args, seed_range, serial_only);
    if (*solve_cmd) return cmd_solve_debug(problem_path);
    if (*validate_cmd) {
      const Scenario s = load_scenario(validate_args.scenario);
      std::cout << s.name << ": ok (" << s.network.edges().size() << " edges, " << expand_spawns(s).size()
                << " vehicles, " << s.cyclists.size() << " cyclists)\n";
      return 0;
    }
  } catch (const LoadError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
