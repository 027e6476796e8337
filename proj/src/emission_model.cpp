#include "ecofence/emission_model.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "ecofence/default_coefficients.hpp"
#include "ecofence/errors.hpp"

namespace ecofence {

VehicleClass::VehicleClass(int euro_class) : euro_(euro_class) {
  if (euro_class < kMin || euro_class > kMax) {
    throw DomainError("euro class must be in [1,4], got " + std::to_string(euro_class));
  }
}

std::string_view to_string(PollutantKind kind) noexcept {
  switch (kind) {
    case PollutantKind::CO:
      return "CO";
  }
  return "?";
}

PollutantKind parse_pollutant(std::string_view text) {
  if (text == "CO") return PollutantKind::CO;
  throw DomainError("unknown pollutant '" + std::string(text) + "'");
}

double emission_rate_g_per_km(const EmissionCoefficients& c, double v) {
  if (!(v > 0.0)) throw DomainError("speed must be positive");
  // Horner form of a + b v + ... + g v^6.
  const double poly =
      c.a + v * (c.b + v * (c.c + v * (c.d + v * (c.e + v * (c.f + v * c.g)))));
  const double rate = (c.k / v) * poly;
  if (!std::isfinite(rate)) throw ModelError("emission rate is not finite at v=" + std::to_string(v));
  if (rate < 0.0) {
    std::cerr << "ecofence: warning: negative emission rate " << rate << " g/km at v=" << v
              << " km/h clamped to 0\n";
    return 0.0;
  }
  return rate;
}

double to_g_per_min(double rate_g_per_km, double speed_kmh) {
  if (rate_g_per_km < 0.0 || speed_kmh < 0.0) throw DomainError("rate and speed must be non-negative");
  // g/km * km/h = g/h
  return rate_g_per_km * speed_kmh / 60.0;
}

void CoefficientTable::set(VehicleClass cls, PollutantKind pollutant, const EmissionCoefficients& coeffs) {
  entries_[{cls.euro(), pollutant}] = coeffs;
}

bool CoefficientTable::contains(VehicleClass cls, PollutantKind pollutant) const {
  return entries_.contains({cls.euro(), pollutant});
}

const EmissionCoefficients& CoefficientTable::at(VehicleClass cls, PollutantKind pollutant) const {
  auto it = entries_.find({cls.euro(), pollutant});
  if (it == entries_.end()) {
    throw ConfigError("no coefficients for EURO " + std::to_string(cls.euro()) + " " +
                      std::string(to_string(pollutant)));
  }
  return it->second;
}

void CoefficientTable::set_speed_domain(SpeedDomain domain) {
  if (!(domain.min_kmh > 0.0) || !(domain.max_kmh >= domain.min_kmh) || !std::isfinite(domain.max_kmh)) {
    throw ConfigError("speed domain must satisfy 0 < min <= max");
  }
  domain_ = domain;
}

namespace {

constexpr std::array kPollutants{PollutantKind::CO};

// Raw polynomial value without clamping, used to reject negative entries at load.
double raw_rate(const EmissionCoefficients& c, double v) {
  const double poly =
      c.a + v * (c.b + v * (c.c + v * (c.d + v * (c.e + v * (c.f + v * c.g)))));
  return (c.k / v) * poly;
}

}  // namespace

void CoefficientTable::validate() const {
  for (PollutantKind p : kPollutants) {
    for (int cls = VehicleClass::kMin; cls <= VehicleClass::kMax; ++cls) {
      if (!entries_.contains({cls, p})) {
        throw ConfigError("coefficient table has no entry for EURO " + std::to_string(cls) + " " +
                          std::string(to_string(p)));
      }
    }
  }
  // 1 km/h grid over the domain, plus the domain end.
  std::vector<double> grid;
  for (double v = domain_.min_kmh; v < domain_.max_kmh; v += 1.0) grid.push_back(v);
  grid.push_back(domain_.max_kmh);

  for (PollutantKind p : kPollutants) {
    for (double v : grid) {
      double cleaner = -1.0;
      for (int cls = VehicleClass::kMax; cls >= VehicleClass::kMin; --cls) {
        const double rate = raw_rate(entries_.at({cls, p}), v);
        if (!std::isfinite(rate) || rate < 0.0) {
          throw ConfigError("EURO " + std::to_string(cls) + " " + std::string(to_string(p)) +
                            " rate is negative or non-finite at v=" + std::to_string(v));
        }
        if (rate < cleaner) {
          throw ConfigError("EURO " + std::to_string(cls) + " " + std::string(to_string(p)) +
                            " emits less than EURO " + std::to_string(cls + 1) +
                            " at v=" + std::to_string(v));
        }
        cleaner = rate;
      }
    }
  }
}

CoefficientTable CoefficientTable::from_json(const nlohmann::json& doc) {
  CoefficientTable table;
  try {
    if (doc.contains("speed_domain_kmh")) {
      const auto& dom = doc.at("speed_domain_kmh");
      table.set_speed_domain({dom.at(0).get<double>(), dom.at(1).get<double>()});
    }
    for (const auto& entry : doc.at("entries")) {
      EmissionCoefficients c;
      c.k = entry.at("k").get<double>();
      c.a = entry.at("a").get<double>();
      c.b = entry.value("b", 0.0);
      c.c = entry.value("c", 0.0);
      c.d = entry.value("d", 0.0);
      c.e = entry.value("e", 0.0);
      c.f = entry.value("f", 0.0);
      c.g = entry.value("g", 0.0);
      table.set(VehicleClass(entry.at("euro_class").get<int>()),
                parse_pollutant(entry.at("pollutant").get<std::string>()), c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed coefficient table: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("malformed coefficient table: ") + e.what());
  }
  table.validate();
  return table;
}

CoefficientTable CoefficientTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coefficient table " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json CoefficientTable::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, c] : entries_) {
    entries.push_back({{"euro_class", key.first},
                       {"pollutant", to_string(key.second)},
                       {"k", c.k}, {"a", c.a}, {"b", c.b}, {"c", c.c},
                       {"d", c.d}, {"e", c.e}, {"f", c.f}, {"g", c.g}});
  }
  return {{"format", "ecofence-coefficients/1"},
          {"units", {{"rate", "g/km"}, {"speed", "km/h"}}},
          {"speed_domain_kmh", {domain_.min_kmh, domain_.max_kmh}},
          {"entries", std::move(entries)}};
}

const CoefficientTable& default_coefficient_table() {
  static const CoefficientTable table =
      CoefficientTable::from_json(nlohmann::json::parse(detail::kDefaultCoefficientsJson));
  return table;
}

double vehicle_emission_rate(VehicleClass cls, PollutantKind pollutant, double speed_kmh,
                             const CoefficientTable& table) {
  const EmissionCoefficients& coeffs = table.at(cls, pollutant);
  if (speed_kmh < 0.0) throw DomainError("speed must be non-negative");
  if (speed_kmh == 0.0) return 0.0;
  return to_g_per_min(emission_rate_g_per_km(coeffs, speed_kmh), speed_kmh);
}

}  // namespace ecofence
