#include <exception>
#include <mutex>

#include "ecofence/reporting.hpp"

namespace ecofence {

namespace {

RunSummary sweep_one(const Scenario& scenario, std::uint64_t seed) {
  RunOptions options;
  options.record_vehicle_rows = false;
  return run_compare(scenario, seed, options).summary;
}

}  // namespace

namespace serial {

std::vector<RunSummary> sweep(const Scenario& scenario, std::span<const std::uint64_t> seeds) {
  std::vector<RunSummary> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) out.push_back(sweep_one(scenario, seed));
  return out;
}

}  // namespace serial

namespace parallel {

// Each iteration builds its own World and Coordinator; nothing is shared but
// the read-only scenario. Results land in seed order regardless of schedule.
std::vector<RunSummary> sweep(const Scenario& scenario, std::span<const std::uint64_t> seeds) {
  std::vector<RunSummary> out(seeds.size());
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = sweep_one(scenario, seeds[i]);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace parallel

}  // namespace ecofence
