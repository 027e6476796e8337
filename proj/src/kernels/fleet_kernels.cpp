#include <exception>
#include <mutex>

#include "ecofence/errors.hpp"
#include "ecofence/kernels.hpp"

#ifdef ECOFENCE_HAVE_OPENMP
#include <omp.h>
#endif

namespace ecofence {

int max_threads() noexcept {
#ifdef ECOFENCE_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

void check_sizes(std::span<const FleetSample> fleet, std::span<double> out) {
  if (fleet.size() != out.size()) throw DomainError("output span does not match fleet size");
}

}  // namespace

namespace serial {

void fleet_emission_rates(std::span<const FleetSample> fleet, const CoefficientTable& table,
                          PollutantKind pollutant, std::span<double> out) {
  check_sizes(fleet, out);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    out[i] = vehicle_emission_rate(fleet[i].euro_class, pollutant, fleet[i].speed_kmh, table);
  }
}

}  // namespace serial

namespace parallel {

void fleet_emission_rates(std::span<const FleetSample> fleet, const CoefficientTable& table,
                          PollutantKind pollutant, std::span<double> out) {
  check_sizes(fleet, out);
  // Exceptions must not cross the parallel region; keep the first and rethrow.
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<std::ptrdiff_t>(fleet.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = vehicle_emission_rate(fleet[i].euro_class, pollutant, fleet[i].speed_kmh, table);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace parallel

void fleet_emission_rates(std::span<const FleetSample> fleet, const CoefficientTable& table,
                          PollutantKind pollutant, std::span<double> out) {
  if (fleet.size() >= kParallelFleetThreshold) {
    parallel::fleet_emission_rates(fleet, table, pollutant, out);
  } else {
    serial::fleet_emission_rates(fleet, table, pollutant, out);
  }
}

}  // namespace ecofence
