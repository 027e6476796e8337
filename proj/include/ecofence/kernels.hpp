#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ecofence/emission_model.hpp"
#include "ecofence/lp_optimizer.hpp"

// Data-parallel kernels. Each has a serial reference in ecofence::serial and an
// OpenMP version in ecofence::parallel producing bit-identical results; the
// unqualified entry points pick one by problem size.

namespace ecofence {

struct FleetSample {
  VehicleClass euro_class{VehicleClass::kMin};
  double speed_kmh = 0.0;
};

// Below this many vehicles the fork/join costs more than the work.
inline constexpr std::size_t kParallelFleetThreshold = 4096;
inline constexpr std::size_t kParallelBatchThreshold = 64;

namespace serial {

void fleet_emission_rates(std::span<const FleetSample> fleet, const CoefficientTable& table,
                          PollutantKind pollutant, std::span<double> out);
std::vector<Assignment> solve_batch(std::span<const GeofenceProblem> problems);

}  // namespace serial

namespace parallel {

void fleet_emission_rates(std::span<const FleetSample> fleet, const CoefficientTable& table,
                          PollutantKind pollutant, std::span<double> out);
std::vector<Assignment> solve_batch(std::span<const GeofenceProblem> problems);

}  // namespace parallel

void fleet_emission_rates(std::span<const FleetSample> fleet, const CoefficientTable& table,
                          PollutantKind pollutant, std::span<double> out);
std::vector<Assignment> solve_batch(std::span<const GeofenceProblem> problems);

// Threads an OpenMP region would use; 1 without OpenMP.
int max_threads() noexcept;

}  // namespace ecofence
