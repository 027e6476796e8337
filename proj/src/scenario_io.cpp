#include "ecofence/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ecofence/errors.hpp"

namespace ecofence {

namespace {

using nlohmann::json;

// Collects violations while walking a document.
class Checker {
 public:
  void fail(const std::string& path, const std::string& message) { errors_.push_back(path + ": " + message); }
  const std::vector<std::string>& errors() const { return errors_; }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(path + "." + key, "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(path + "." + key, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                    bool required) {
    if (!obj.contains(key)) {
      if (required) fail(path + "." + key, "missing");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_string() || v.get<std::string>().empty()) {
      fail(path + "." + key, "expected a non-empty string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<bool> boolean(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj.at(key).is_boolean()) {
      fail(path + "." + key, "expected true or false");
      return std::nullopt;
    }
    return obj.at(key).get<bool>();
  }

  std::vector<std::string> route(const json& obj, const std::string& path, const RoadNetwork& network) {
    std::vector<std::string> ids;
    if (!obj.contains("route") || !obj.at("route").is_array() || obj.at("route").empty()) {
      fail(path + ".route", "expected a non-empty array of edge ids");
      return ids;
    }
    for (const json& id : obj.at("route")) {
      if (!id.is_string()) {
        fail(path + ".route", "edge ids must be strings");
        return {};
      }
      ids.push_back(id.get<std::string>());
    }
    try {
      network.resolve_route(ids);
    } catch (const DomainError& e) {
      fail(path + ".route", e.what());
    }
    return ids;
  }

 private:
  std::vector<std::string> errors_;
};

std::string fmt_num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  return fields;
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

// Reads non-empty, non-comment lines after the header; (line number, fields).
std::vector<std::pair<int, std::vector<std::string>>> read_csv(const std::filesystem::path& path,
                                                               std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), {"cannot open file"});
  std::vector<std::pair<int, std::vector<std::string>>> rows;
  std::string line;
  int number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!have_header) {
      header = split_csv_line(line);
      have_header = true;
      continue;
    }
    rows.emplace_back(number, split_csv_line(line));
  }
  return rows;
}

ControllerConfig parse_config(const json& obj, SimulationConfig& sim, Checker& check) {
  const std::string path = "config";
  ControllerConfig c;
  if (auto preset = check.string(obj, "preset", path, false)) {
    if (*preset == "hil") {
      c = ControllerConfig::hil_emulation();
    } else if (*preset != "simulation") {
      check.fail(path + ".preset", "expected 'simulation' or 'hil'");
    }
  }
  if (auto v = check.number(obj, "radius_m", path, false)) c.radius_m = *v;
  if (auto v = check.number(obj, "limit_g_per_min", path, false)) c.allowable_limit = *v;
  if (auto v = check.number(obj, "tau_s", path, false)) {
    c.tau_s = *v;
    if (!obj.contains("switch_interval_s")) c.switch_interval_s = *v;
  }
  if (auto v = check.number(obj, "switch_interval_s", path, false)) c.switch_interval_s = *v;
  if (auto v = check.number(obj, "expiry_timeout_s", path, false)) c.expiry_timeout_s = *v;
  if (auto v = check.number(obj, "actuation_latency_s", path, false)) c.actuation_latency_s = *v;
  if (auto v = check.boolean(obj, "control", path)) c.control_enabled = *v;
  if (auto v = check.boolean(obj, "single_vehicle", path)) c.single_vehicle = *v;
  if (auto v = check.boolean(obj, "force_detector_electric", path)) c.force_detector_electric = *v;
  if (auto v = check.string(obj, "pollutant", path, false)) {
    try {
      c.pollutant = parse_pollutant(*v);
    } catch (const DomainError& e) {
      check.fail(path + ".pollutant", e.what());
    }
  }
  if (auto v = check.number(obj, "dt_s", path, false)) sim.dt_s = *v;
  if (auto v = check.number(obj, "horizon_s", path, false)) sim.horizon_s = *v;
  if (auto v = check.number(obj, "detection_range_m", path, false)) sim.detection_range_m = *v;

  if (!(c.radius_m > 0.0)) check.fail(path + ".radius_m", "must be > 0 (got " + fmt_num(c.radius_m) + ")");
  if (!(c.tau_s > 0.0)) check.fail(path + ".tau_s", "must be > 0");
  if (!(c.switch_interval_s > 0.0)) check.fail(path + ".switch_interval_s", "must be > 0");
  if (!(c.expiry_timeout_s > 0.0)) check.fail(path + ".expiry_timeout_s", "must be > 0");
  if (!(c.actuation_latency_s >= 0.0)) check.fail(path + ".actuation_latency_s", "must be >= 0");
  if (!(sim.dt_s > 0.0)) check.fail(path + ".dt_s", "must be > 0");
  if (!(sim.horizon_s >= 0.0)) check.fail(path + ".horizon_s", "must be >= 0");
  if (!(sim.detection_range_m > 0.0)) check.fail(path + ".detection_range_m", "must be > 0");
  return c;
}

std::optional<Powertrain> parse_powertrain_field(const json& obj, const std::string& path, Checker& check) {
  auto text = check.string(obj, "powertrain", path, false);
  if (!text) return std::nullopt;
  try {
    return parse_powertrain(*text);
  } catch (const DomainError& e) {
    check.fail(path + ".powertrain", e.what());
    return std::nullopt;
  }
}

std::optional<int> parse_euro_field(const json& obj, const std::string& path, Checker& check) {
  if (!obj.contains("euro_class")) return std::nullopt;
  const json& v = obj.at("euro_class");
  if (!v.is_number_integer() || v.get<int>() < VehicleClass::kMin || v.get<int>() > VehicleClass::kMax) {
    check.fail(path + ".euro_class", "expected an integer in [1,4]");
    return std::nullopt;
  }
  return v.get<int>();
}

void parse_speed_fields(const json& obj, const std::string& path, Checker& check,
                        std::optional<double>& speed, double& jitter) {
  speed = check.number(obj, "speed_kmh", path, false);
  if (speed && !(*speed > 0.0)) check.fail(path + ".speed_kmh", "must be > 0");
  if (auto j = check.number(obj, "speed_jitter_kmh", path, false)) {
    jitter = *j;
    if (jitter < 0.0) check.fail(path + ".speed_jitter_kmh", "must be >= 0");
    if (jitter > 0.0 && !speed) check.fail(path + ".speed_jitter_kmh", "requires speed_kmh");
  }
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  Checker check;
  Scenario scenario;
  if (!doc.is_object()) throw LoadError("scenario", {"document root must be an object"});
  if (doc.contains("format") && doc.at("format") != "ecofence-scenario/1") {
    check.fail("format", "unsupported format (expected ecofence-scenario/1)");
  }
  scenario.name = doc.value("name", std::string("unnamed"));

  // Network.
  if (!doc.contains("network") || !doc.at("network").contains("edges") || !doc.at("network").at("edges").is_array()) {
    check.fail("network.edges", "missing edge list");
  } else {
    const json& edges = doc.at("network").at("edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string path = "network.edges[" + std::to_string(i) + "]";
      const json& e = edges[i];
      Edge edge;
      auto id = check.string(e, "id", path, true);
      auto limit = check.number(e, "speed_limit_kmh", path, true);
      auto weight = check.number(e, "density_weight", path, false);
      bool geometry_ok = e.contains("geometry") && e.at("geometry").is_array();
      if (geometry_ok) {
        for (const json& pt : e.at("geometry")) {
          if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
            geometry_ok = false;
            break;
          }
          edge.geometry.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
      }
      if (!geometry_ok) check.fail(path + ".geometry", "expected an array of [x, y] points");
      if (weight && *weight < 1.0) {
        check.fail(path + ".density_weight", "must be >= 1.0 (got " + fmt_num(*weight) + ")");
      }
      if (!id || !limit || !geometry_ok || (weight && *weight < 1.0)) continue;
      edge.id = *id;
      edge.speed_limit_kmh = *limit;
      edge.density_weight = weight.value_or(1.0);
      try {
        scenario.network.add_edge(std::move(edge));
      } catch (const DomainError& err) {
        check.fail(path, err.what());
      }
    }
  }

  // Density weights from a separate file override inline ones.
  if (auto density = check.string(doc, "density_file", "", false)) {
    try {
      apply_density(scenario.network, load_density_file(base_dir / *density, scenario.network));
    } catch (const LoadError& err) {
      for (const auto& d : err.diagnostics()) check.fail("density_file", err.source() + ": " + d);
    }
  }

  // Coefficients.
  if (doc.contains("coefficients")) {
    const json& c = doc.at("coefficients");
    try {
      if (c.is_string()) {
        scenario.coefficients = CoefficientTable::load(base_dir / c.get<std::string>());
      } else {
        scenario.coefficients = CoefficientTable::from_json(c);
      }
    } catch (const ConfigError& err) {
      check.fail("coefficients", err.what());
    }
  }

  if (doc.contains("config")) {
    if (!doc.at("config").is_object()) {
      check.fail("config", "expected an object");
    } else {
      scenario.config.controller = parse_config(doc.at("config"), scenario.config, check);
    }
  }

  if (doc.contains("vehicles")) {
    const json& list = doc.at("vehicles");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "vehicles[" + std::to_string(i) + "]";
      const json& v = list[i];
      SpawnSpec spec;
      spec.vehicle_id = check.string(v, "id", path, true).value_or("");
      spec.spawn_time = check.number(v, "spawn_time", path, false).value_or(0.0);
      if (spec.spawn_time < 0.0) check.fail(path + ".spawn_time", "must be >= 0");
      spec.euro_class = parse_euro_field(v, path, check);
      spec.route = check.route(v, path, scenario.network);
      parse_speed_fields(v, path, check, spec.speed_kmh, spec.speed_jitter_kmh);
      spec.powertrain = parse_powertrain_field(v, path, check).value_or(Powertrain::Hybrid);
      scenario.vehicles.push_back(std::move(spec));
    }
  }

  if (doc.contains("flows")) {
    const json& list = doc.at("flows");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "flows[" + std::to_string(i) + "]";
      const json& f = list[i];
      FlowSpec flow;
      flow.id = check.string(f, "id", path, true).value_or("");
      flow.route = check.route(f, path, scenario.network);
      flow.start_s = check.number(f, "start_s", path, false).value_or(0.0);
      flow.interval_s = check.number(f, "interval_s", path, true).value_or(1.0);
      if (!(flow.interval_s > 0.0)) check.fail(path + ".interval_s", "must be > 0");
      if (flow.start_s < 0.0) check.fail(path + ".start_s", "must be >= 0");
      if (!f.contains("count") || !f.at("count").is_number_integer() || f.at("count").get<int>() < 0) {
        check.fail(path + ".count", "expected a non-negative integer");
      } else {
        flow.count = f.at("count").get<int>();
      }
      flow.euro_class = parse_euro_field(f, path, check);
      parse_speed_fields(f, path, check, flow.speed_kmh, flow.speed_jitter_kmh);
      flow.powertrain = parse_powertrain_field(f, path, check).value_or(Powertrain::Hybrid);
      scenario.flows.push_back(std::move(flow));
    }
  }

  if (doc.contains("cyclists")) {
    const json& list = doc.at("cyclists");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "cyclists[" + std::to_string(i) + "]";
      const json& c = list[i];
      CyclistSpec spec;
      spec.cyclist_id = check.string(c, "id", path, true).value_or("");
      spec.start_time = check.number(c, "start_time", path, false).value_or(0.0);
      spec.route = check.route(c, path, scenario.network);
      spec.speed_kmh = check.number(c, "speed_kmh", path, false).value_or(15.0);
      if (!(spec.speed_kmh > 0.0)) check.fail(path + ".speed_kmh", "must be > 0");
      scenario.cyclists.push_back(std::move(spec));
    }
  }

  // Unique agent ids.
  {
    std::map<std::string, int> seen;
    for (const SpawnSpec& s : expand_spawns(scenario)) {
      if (++seen[s.vehicle_id] == 2) check.fail("vehicles", "duplicate vehicle id '" + s.vehicle_id + "'");
    }
  }

  if (doc.contains("background")) {
    const json& b = doc.at("background");
    if (b.is_number()) {
      scenario.background = BackgroundSeries::constant(b.get<double>());
    } else if (b.is_string()) {
      try {
        scenario.background = load_background_csv(base_dir / b.get<std::string>());
      } catch (const LoadError& err) {
        for (const auto& d : err.diagnostics()) check.fail("background", err.source() + ": " + d);
      }
    } else if (b.is_array()) {
      double prev = -INFINITY;
      for (std::size_t i = 0; i < b.size(); ++i) {
        const json& pt = b[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
          check.fail("background[" + std::to_string(i) + "]", "expected [time_s, level]");
          continue;
        }
        const double t = pt[0].get<double>();
        if (t <= prev) check.fail("background[" + std::to_string(i) + "]", "times must increase");
        prev = t;
        scenario.background.points.emplace_back(t, pt[1].get<double>());
      }
    } else {
      check.fail("background", "expected a number, a point list or a CSV path");
    }
  }

  if (!check.errors().empty()) throw LoadError("scenario", check.errors());
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), {"cannot open file"});
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw LoadError(path.string(), {e.what()});
  }
  try {
    return parse_scenario(doc, path.parent_path());
  } catch (const LoadError& e) {
    throw LoadError(path.string(), e.diagnostics());
  }
}

namespace {

json route_json(const std::vector<std::string>& route) { return route; }

}  // namespace

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["format"] = "ecofence-scenario/1";
  doc["name"] = s.name;
  json edges = json::array();
  for (const Edge& e : s.network.edges()) {
    json geometry = json::array();
    for (const Vec2& p : e.geometry) geometry.push_back({p.x, p.y});
    edges.push_back({{"id", e.id},
                     {"geometry", geometry},
                     {"speed_limit_kmh", e.speed_limit_kmh},
                     {"density_weight", e.density_weight}});
  }
  doc["network"] = {{"edges", edges}};

  json vehicles = json::array();
  for (const SpawnSpec& v : s.vehicles) {
    json j = {{"id", v.vehicle_id}, {"spawn_time", v.spawn_time}, {"route", route_json(v.route)},
              {"powertrain", to_string(v.powertrain)}};
    if (v.euro_class) j["euro_class"] = *v.euro_class;
    if (v.speed_kmh) j["speed_kmh"] = *v.speed_kmh;
    if (v.speed_jitter_kmh > 0.0) j["speed_jitter_kmh"] = v.speed_jitter_kmh;
    vehicles.push_back(std::move(j));
  }
  doc["vehicles"] = vehicles;

  json flows = json::array();
  for (const FlowSpec& f : s.flows) {
    json j = {{"id", f.id},           {"route", route_json(f.route)}, {"start_s", f.start_s},
              {"interval_s", f.interval_s}, {"count", f.count},       {"powertrain", to_string(f.powertrain)}};
    if (f.euro_class) j["euro_class"] = *f.euro_class;
    if (f.speed_kmh) j["speed_kmh"] = *f.speed_kmh;
    if (f.speed_jitter_kmh > 0.0) j["speed_jitter_kmh"] = f.speed_jitter_kmh;
    flows.push_back(std::move(j));
  }
  doc["flows"] = flows;

  json cyclists = json::array();
  for (const CyclistSpec& c : s.cyclists) {
    cyclists.push_back({{"id", c.cyclist_id}, {"start_time", c.start_time}, {"route", route_json(c.route)},
                        {"speed_kmh", c.speed_kmh}});
  }
  doc["cyclists"] = cyclists;

  json background = json::array();
  for (const auto& [t, level] : s.background.points) background.push_back({t, level});
  doc["background"] = background;

  const ControllerConfig& c = s.config.controller;
  doc["config"] = {{"radius_m", c.radius_m},
                   {"limit_g_per_min", c.allowable_limit},
                   {"tau_s", c.tau_s},
                   {"switch_interval_s", c.switch_interval_s},
                   {"expiry_timeout_s", c.expiry_timeout_s},
                   {"actuation_latency_s", c.actuation_latency_s},
                   {"control", c.control_enabled},
                   {"single_vehicle", c.single_vehicle},
                   {"force_detector_electric", c.force_detector_electric},
                   {"pollutant", to_string(c.pollutant)},
                   {"dt_s", s.config.dt_s},
                   {"horizon_s", s.config.horizon_s},
                   {"detection_range_m", s.config.detection_range_m}};
  if (!(s.coefficients == default_coefficient_table())) doc["coefficients"] = s.coefficients.to_json();
  return doc;
}

DensityFile load_density_file(const std::filesystem::path& path, const RoadNetwork& network) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  std::vector<std::string> errors;
  if (header.size() < 2 || header[0] != "edge_id" || header[1] != "weight") {
    errors.push_back("line 1: expected header 'edge_id,weight'");
  }
  DensityFile weights;
  for (const auto& [line, fields] : rows) {
    const std::string where = "line " + std::to_string(line);
    if (fields.size() != 2) {
      errors.push_back(where + ": expected 2 fields");
      continue;
    }
    const auto weight = parse_double(fields[1]);
    if (!weight) {
      errors.push_back(where + ": weight '" + fields[1] + "' is not a number");
      continue;
    }
    if (*weight < 1.0) errors.push_back(where + ": weight for '" + fields[0] + "' must be >= 1.0 (got " + fields[1] + ")");
    if (!network.contains(fields[0])) errors.push_back(where + ": unknown edge '" + fields[0] + "'");
    if (weights.contains(fields[0])) errors.push_back(where + ": duplicate edge '" + fields[0] + "'");
    weights[fields[0]] = *weight;
  }
  if (!errors.empty()) throw LoadError(path.string(), errors);
  return weights;
}

void apply_density(RoadNetwork& network, const DensityFile& weights) {
  for (const auto& [edge, weight] : weights) network.set_density_weight(edge, weight);
}

BackgroundSeries load_background_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_csv(path, header);
  std::vector<std::string> errors;
  if (header.size() < 2 || header[0] != "time_s" || header[1] != "level_g_per_min") {
    errors.push_back("line 1: expected header 'time_s,level_g_per_min'");
  }
  BackgroundSeries series;
  for (const auto& [line, fields] : rows) {
    const std::string where = "line " + std::to_string(line);
    if (fields.size() != 2) {
      errors.push_back(where + ": expected 2 fields");
      continue;
    }
    const auto t = parse_double(fields[0]);
    const auto level = parse_double(fields[1]);
    if (!t || !level) {
      errors.push_back(where + ": expected two numbers");
      continue;
    }
    if (!series.points.empty() && *t <= series.points.back().first) errors.push_back(where + ": times must increase");
    series.points.emplace_back(*t, *level);
  }
  if (!errors.empty()) throw LoadError(path.string(), errors);
  return series;
}

BackgroundSeries parse_background_arg(const std::string& arg) {
  if (auto level = parse_double(arg)) return BackgroundSeries::constant(*level);
  return load_background_csv(arg);
}

}  // namespace ecofence
