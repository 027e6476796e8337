#include <exception>
#include <mutex>

#include "ecofence/kernels.hpp"

namespace ecofence {

namespace serial {

std::vector<Assignment> solve_batch(std::span<const GeofenceProblem> problems) {
  std::vector<Assignment> out;
  out.reserve(problems.size());
  for (const GeofenceProblem& p : problems) out.push_back(solve(p));
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<Assignment> solve_batch(std::span<const GeofenceProblem> problems) {
  std::vector<Assignment> out(problems.size());
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<std::ptrdiff_t>(problems.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = solve(problems[i]);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace parallel

std::vector<Assignment> solve_batch(std::span<const GeofenceProblem> problems) {
  return problems.size() >= kParallelBatchThreshold ? parallel::solve_batch(problems)
                                                    : serial::solve_batch(problems);
}

}  // namespace ecofence
