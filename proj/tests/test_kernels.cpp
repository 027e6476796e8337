#include <doctest.h>

#include <cstring>

#include "ecofence/kernels.hpp"
#include "ecofence/rng.hpp"

using namespace ecofence;

namespace {

std::vector<FleetSample> random_fleet(std::size_t n, std::uint64_t seed) {
  UniformStream rng(seed, StreamPurpose::Workload);
  std::vector<FleetSample> fleet(n);
  for (auto& f : fleet) {
    f.euro_class = VehicleClass(rng.next_int(1, 4));
    f.speed_kmh = rng.next() < 0.05 ? 0.0 : 1.0 + 129.0 * rng.next();
  }
  return fleet;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("fleet rates: serial and parallel are bit-identical") {
  const CoefficientTable& table = default_coefficient_table();
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{100}, kParallelFleetThreshold + 17}) {
    const auto fleet = random_fleet(n, n + 1);
    std::vector<double> a(n), b(n), c(n);
    serial::fleet_emission_rates(fleet, table, PollutantKind::CO, a);
    parallel::fleet_emission_rates(fleet, table, PollutantKind::CO, b);
    fleet_emission_rates(fleet, table, PollutantKind::CO, c);
    CHECK(same_bits(a, b));
    CHECK(same_bits(a, c));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a[i] == vehicle_emission_rate(fleet[i].euro_class, PollutantKind::CO, fleet[i].speed_kmh, table));
    }
  }
}

TEST_CASE("fleet rates: size mismatch and errors surface") {
  const auto fleet = random_fleet(10, 3);
  std::vector<double> small(5);
  CHECK_THROWS(serial::fleet_emission_rates(fleet, default_coefficient_table(), PollutantKind::CO, small));
  CHECK_THROWS(parallel::fleet_emission_rates(fleet, default_coefficient_table(), PollutantKind::CO, small));

  CoefficientTable partial;
  partial.set(VehicleClass(1), PollutantKind::CO, {1.0, 60.0});
  auto big = random_fleet(kParallelFleetThreshold + 1, 4);
  std::vector<double> out(big.size());
  CHECK_THROWS(parallel::fleet_emission_rates(big, partial, PollutantKind::CO, out));
}

TEST_CASE("solve_batch: serial and parallel agree with solve") {
  UniformStream rng(99, StreamPurpose::Workload);
  std::vector<GeofenceProblem> problems(kParallelBatchThreshold * 3);
  for (auto& p : problems) {
    const int n = rng.next_int(0, 20);
    for (int i = 0; i < n; ++i) {
      p.entries.push_back({"v" + std::to_string(i), 1.0 + 9.0 * rng.next(), 3.0 * rng.next()});
    }
    p.limit = -1.0 + 10.0 * rng.next();
  }
  const auto a = serial::solve_batch(problems);
  const auto b = parallel::solve_batch(problems);
  const auto c = solve_batch(problems);
  REQUIRE(a.size() == problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const Assignment ref = solve(problems[i]);
    CHECK(a[i].probabilities == ref.probabilities);
    CHECK(b[i].probabilities == ref.probabilities);
    CHECK(c[i].probabilities == ref.probabilities);
    CHECK(b[i].objective_value == ref.objective_value);
  }

  problems[70].entries.push_back({"bad", 0.5, 1.0});
  CHECK_THROWS(parallel::solve_batch(problems));
  CHECK_THROWS(serial::solve_batch(problems));
}

TEST_CASE("max_threads") { CHECK(max_threads() >= 1); }
