#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ecofence {

// One vehicle inside a geofence as seen by the optimizer.
struct ProblemEntry {
  std::string vehicle_id;
  double density_weight = 1.0;  // cyclist density of the road the vehicle is on, >= 1
  double emission_rate = 0.0;   // g/min in polluting mode, >= 0
};

// max sum x_i / d_i  s.t.  sum x_i e_i <= limit,  0 <= x_i <= 1
struct GeofenceProblem {
  std::vector<ProblemEntry> entries;
  double limit = 0.0;  // E(Delta) in g/min, may be <= 0

  // Throws DomainError on d < 1, e < 0, non-finite values or duplicate ids.
  void validate() const;
};

// x_i is the probability that vehicle i stays in polluting mode until the next toss.
struct Assignment {
  std::vector<std::string> vehicle_ids;
  std::vector<double> probabilities;
  double objective_value = 0.0;

  std::size_t size() const noexcept { return probabilities.size(); }
  // Throws DomainError for an unknown id.
  double probability(std::string_view vehicle_id) const;
};

// Budget slack allowed on sum x_i e_i.
inline constexpr double kBudgetTolerance = 1e-9;

// Greedy fractional-knapsack solution. Vehicles with e = 0 get x = 1, the rest
// are filled in increasing d*e order (ties: lower d, then input order).
Assignment solve(const GeofenceProblem& problem);

// Exhaustive search over basic solutions. Verification oracle, at most 8 entries.
inline constexpr std::size_t kBruteForceMaxEntries = 8;
Assignment brute_force_solve(const GeofenceProblem& problem);

double objective(const Assignment& assignment, const GeofenceProblem& problem);

// sum x_i e_i
double expected_emission(const Assignment& assignment, const GeofenceProblem& problem);

}  // namespace ecofence
