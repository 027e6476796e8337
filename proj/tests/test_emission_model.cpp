#include <doctest.h>

#include <cmath>
#include <fstream>

#include "ecofence/emission_model.hpp"
#include "ecofence/errors.hpp"
#include "test_support.hpp"

using namespace ecofence;

namespace {

// Term-by-term evaluation with std::pow, independent of the Horner form used
// by the library.
double naive_rate(const EmissionCoefficients& c, double v) {
  const double terms[] = {c.a, c.b, c.c, c.d, c.e, c.f, c.g};
  double poly = 0.0;
  for (int p = 0; p < 7; ++p) poly += terms[p] * std::pow(v, p);
  return c.k / v * poly;
}

}  // namespace

TEST_CASE("emission_rate_g_per_km reduces to simple forms") {
  CHECK(emission_rate_g_per_km({1.0, 60.0}, 30.0) == doctest::Approx(2.0).epsilon(1e-15));
  for (double v : {1.0, 7.0, 55.0, 130.0}) {
    CHECK(emission_rate_g_per_km({1.0, 0.0, 1.0}, v) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("emission_rate_g_per_km matches a hand-evaluated polynomial") {
  // (0.5 / 50) * (10 + 0.2*50 + 0.001*50^2) = 0.01 * 22.5, evaluated offline.
  const EmissionCoefficients c{0.5, 10.0, 0.2, 0.001};
  CHECK(emission_rate_g_per_km(c, 50.0) == doctest::Approx(0.225).epsilon(1e-12));
  CHECK(emission_rate_g_per_km(c, 50.0) == doctest::Approx(naive_rate(c, 50.0)).epsilon(1e-12));
}

TEST_CASE("every coefficient position has the right power of v") {
  // Unit coefficient in one slot at a time: rate = v^(p-1).
  for (int p = 0; p < 7; ++p) {
    EmissionCoefficients c{1.0};
    double* slots[] = {&c.a, &c.b, &c.c, &c.d, &c.e, &c.f, &c.g};
    *slots[p] = 1.0;
    CHECK(emission_rate_g_per_km(c, 3.0) == doctest::Approx(std::pow(3.0, p - 1)));
  }
}

TEST_CASE("emission_rate_g_per_km errors and clamping") {
  CHECK_THROWS_AS(emission_rate_g_per_km({1.0, 60.0}, 0.0), DomainError);
  CHECK_THROWS_AS(emission_rate_g_per_km({1.0, 60.0}, -5.0), DomainError);
  CHECK_THROWS_WITH(emission_rate_g_per_km({1.0, 60.0}, 0.0), "speed must be positive");
  CHECK_THROWS_AS(emission_rate_g_per_km({INFINITY, 1.0}, 10.0), ModelError);
  CHECK_THROWS_AS(emission_rate_g_per_km({1.0, NAN}, 10.0), ModelError);
  // Negative polynomial value is clamped.
  CHECK(emission_rate_g_per_km({1.0, -10.0}, 10.0) == 0.0);
}

TEST_CASE("to_g_per_min") {
  CHECK(to_g_per_min(2.0, 30.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(to_g_per_min(123.0, 0.0) == 0.0);
  CHECK(to_g_per_min(1.5, 40.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(to_g_per_min(-1.0, 10.0), DomainError);
  CHECK_THROWS_AS(to_g_per_min(1.0, -10.0), DomainError);
}

TEST_CASE("vehicle_emission_rate composes the two conversions") {
  const CoefficientTable table = test::flat_table(1.0, 60.0);
  CHECK(vehicle_emission_rate(VehicleClass(2), PollutantKind::CO, 30.0, table) == 1.0);
  CHECK(vehicle_emission_rate(VehicleClass(2), PollutantKind::CO, 0.0, table) == 0.0);
  CHECK_THROWS_AS(vehicle_emission_rate(VehicleClass(2), PollutantKind::CO, -1.0, table), DomainError);

  CoefficientTable partial;
  partial.set(VehicleClass(1), PollutantKind::CO, {1.0, 60.0});
  CHECK_THROWS_AS(vehicle_emission_rate(VehicleClass(3), PollutantKind::CO, 30.0, partial), ConfigError);
}

TEST_CASE("default table: dirtier classes emit at least as much") {
  const CoefficientTable& table = default_coefficient_table();
  CHECK(vehicle_emission_rate(VehicleClass(1), PollutantKind::CO, 40.0, table) >=
        vehicle_emission_rate(VehicleClass(4), PollutantKind::CO, 40.0, table));
  for (double v = 1.0; v <= 130.0; v += 0.5) {
    for (int cls = 1; cls < 4; ++cls) {
      CHECK(vehicle_emission_rate(VehicleClass(cls), PollutantKind::CO, v, table) >=
            vehicle_emission_rate(VehicleClass(cls + 1), PollutantKind::CO, v, table));
    }
  }
}

TEST_CASE("default table: finite and non-negative on [1, 130] km/h") {
  const CoefficientTable& table = default_coefficient_table();
  for (int cls = 1; cls <= 4; ++cls) {
    for (double v = 1.0; v <= 130.0; v += 0.25) {
      const double gkm = emission_rate_g_per_km(table.at(VehicleClass(cls), PollutantKind::CO), v);
      CHECK(std::isfinite(gkm));
      CHECK(gkm >= 0.0);
    }
  }
}

TEST_CASE("composed per-minute rate tends to k*a/60 as v -> 0") {
  for (const auto& [k, a] : {std::pair{1.0, 60.0}, std::pair{0.7, 24.0}, std::pair{3.0, 2.5}}) {
    const double limit = k * a / 60.0;
    const double near_zero = to_g_per_min(emission_rate_g_per_km({k, a}, 0.001), 0.001);
    CHECK(std::abs(near_zero - limit) <= 1e-6 * std::abs(limit));
  }
}

TEST_CASE("composed per-minute rate is continuous over the speed domain") {
  const CoefficientTable& table = default_coefficient_table();
  for (int cls = 1; cls <= 4; ++cls) {
    double prev = vehicle_emission_rate(VehicleClass(cls), PollutantKind::CO, 0.01, table);
    for (double v = 0.02; v <= 130.0; v += 0.01) {
      const double cur = vehicle_emission_rate(VehicleClass(cls), PollutantKind::CO, v, table);
      CHECK(std::abs(cur - prev) < 1e-3);
      prev = cur;
    }
  }
}

TEST_CASE("VehicleClass range") {
  CHECK_NOTHROW(VehicleClass(1));
  CHECK_NOTHROW(VehicleClass(4));
  CHECK_THROWS_AS(VehicleClass(0), DomainError);
  CHECK_THROWS_AS(VehicleClass(5), DomainError);
  CHECK(parse_pollutant("CO") == PollutantKind::CO);
  CHECK_THROWS_AS(parse_pollutant("NOx"), DomainError);
}

TEST_CASE("table validation") {
  SUBCASE("missing class") {
    CoefficientTable t;
    for (int cls = 1; cls <= 3; ++cls) t.set(VehicleClass(cls), PollutantKind::CO, {1.0, 10.0});
    CHECK_THROWS_AS(t.validate(), ConfigError);
  }
  SUBCASE("cleaner class emitting more") {
    CoefficientTable t = test::flat_table(1.0, 10.0);
    t.set(VehicleClass(4), PollutantKind::CO, {2.0, 10.0});
    CHECK_THROWS_AS(t.validate(), ConfigError);
  }
  SUBCASE("negative somewhere in the domain") {
    CoefficientTable t = test::flat_table(1.0, 10.0);
    for (int cls = 1; cls <= 4; ++cls) t.set(VehicleClass(cls), PollutantKind::CO, {1.0, 10.0, -1.0});
    CHECK_THROWS_AS(t.validate(), ConfigError);
  }
  SUBCASE("equal classes are allowed") { CHECK_NOTHROW(test::flat_table(1.0, 10.0).validate()); }
}

TEST_CASE("shipped coefficient file loads and matches the compiled-in default") {
  const CoefficientTable loaded = CoefficientTable::load(test::source_path("data/coefficients_default.json"));
  CHECK(loaded == default_coefficient_table());
  CHECK(CoefficientTable::from_json(loaded.to_json()) == loaded);
  CHECK_THROWS_AS(CoefficientTable::load(test::source_path("data/nope.json")), ConfigError);
  CHECK_THROWS_AS(CoefficientTable::from_json(nlohmann::json{{"entries", {{{"euro_class", 9}}}}}), ConfigError);
}
