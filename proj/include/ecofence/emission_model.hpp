#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

namespace ecofence {

// Average-speed model coefficients. The rate in g/km at speed v (km/h) is
//   (k / v) * (a + b v + c v^2 + d v^3 + e v^4 + f v^5 + g v^6).
struct EmissionCoefficients {
  double k = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double e = 0.0;
  double f = 0.0;
  double g = 0.0;

  friend bool operator==(const EmissionCoefficients&, const EmissionCoefficients&) = default;
};

// EURO exhaust class, 1 (dirtiest) to 4.
class VehicleClass {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 4;

  explicit VehicleClass(int euro_class);

  int euro() const noexcept { return euro_; }

  friend auto operator<=>(const VehicleClass&, const VehicleClass&) = default;

 private:
  int euro_;
};

enum class PollutantKind { CO };

std::string_view to_string(PollutantKind kind) noexcept;
PollutantKind parse_pollutant(std::string_view text);

// Speed range over which table entries must evaluate finite and non-negative.
struct SpeedDomain {
  double min_kmh = 1.0;
  double max_kmh = 130.0;

  friend bool operator==(const SpeedDomain&, const SpeedDomain&) = default;
};

double emission_rate_g_per_km(const EmissionCoefficients& coeffs, double speed_kmh);
double to_g_per_min(double rate_g_per_km, double speed_kmh);

class CoefficientTable {
 public:
  CoefficientTable() = default;

  void set(VehicleClass cls, PollutantKind pollutant, const EmissionCoefficients& coeffs);
  bool contains(VehicleClass cls, PollutantKind pollutant) const;
  const EmissionCoefficients& at(VehicleClass cls, PollutantKind pollutant) const;

  const SpeedDomain& speed_domain() const noexcept { return domain_; }
  void set_speed_domain(SpeedDomain domain);

  // Throws ConfigError unless the table covers {1..4} x {CO}, every entry is
  // finite and non-negative over the speed domain, and rates do not decrease
  // as the class number goes down at any sampled speed.
  void validate() const;

  static CoefficientTable from_json(const nlohmann::json& doc);
  static CoefficientTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  friend bool operator==(const CoefficientTable&, const CoefficientTable&) = default;

 private:
  std::map<std::pair<int, PollutantKind>, EmissionCoefficients> entries_;
  SpeedDomain domain_;
};

// Table shipped in data/coefficients_default.json, compiled into the library.
const CoefficientTable& default_coefficient_table();

// g/min for a vehicle of the given class at the given speed. Zero at v = 0.
double vehicle_emission_rate(VehicleClass cls, PollutantKind pollutant, double speed_kmh,
                             const CoefficientTable& table);

}  // namespace ecofence
