#include "ecofence/lp_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "ecofence/errors.hpp"

namespace ecofence {

void GeofenceProblem::validate() const {
  if (!std::isfinite(limit)) throw DomainError("emission limit must be finite");
  std::unordered_set<std::string_view> seen;
  for (const ProblemEntry& entry : entries) {
    if (!std::isfinite(entry.density_weight) || entry.density_weight < 1.0) {
      throw DomainError("density weight of '" + entry.vehicle_id + "' must be >= 1");
    }
    if (!std::isfinite(entry.emission_rate) || entry.emission_rate < 0.0) {
      throw DomainError("emission rate of '" + entry.vehicle_id + "' must be finite and >= 0");
    }
    if (!seen.insert(entry.vehicle_id).second) {
      throw DomainError("duplicate vehicle id '" + entry.vehicle_id + "'");
    }
  }
}

double Assignment::probability(std::string_view vehicle_id) const {
  for (std::size_t i = 0; i < vehicle_ids.size(); ++i) {
    if (vehicle_ids[i] == vehicle_id) return probabilities[i];
  }
  throw DomainError("no assignment for vehicle '" + std::string(vehicle_id) + "'");
}

namespace {

Assignment empty_assignment(const GeofenceProblem& problem) {
  Assignment out;
  out.vehicle_ids.reserve(problem.entries.size());
  for (const auto& entry : problem.entries) out.vehicle_ids.push_back(entry.vehicle_id);
  out.probabilities.assign(problem.entries.size(), 0.0);
  return out;
}

double objective_of(const std::vector<double>& x, const GeofenceProblem& problem) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i] / problem.entries[i].density_weight;
  return total;
}

}  // namespace

Assignment solve(const GeofenceProblem& problem) {
  problem.validate();
  Assignment out = empty_assignment(problem);
  if (problem.limit <= 0.0) return out;  // everyone electric

  const auto& entries = problem.entries;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].emission_rate == 0.0) {
      out.probabilities[i] = 1.0;
    } else {
      order.push_back(i);
    }
  }
  // Benefit/cost (1/d)/e descending is d*e ascending.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    const double cost_l = entries[lhs].density_weight * entries[lhs].emission_rate;
    const double cost_r = entries[rhs].density_weight * entries[rhs].emission_rate;
    if (cost_l != cost_r) return cost_l < cost_r;
    return entries[lhs].density_weight < entries[rhs].density_weight;
  });

  double remaining = problem.limit;
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    const double e = entries[i].emission_rate;
    if (e <= remaining) {
      out.probabilities[i] = 1.0;
      remaining -= e;
    } else {
      out.probabilities[i] = remaining / e;
      remaining = 0.0;
    }
  }
  out.objective_value = objective_of(out.probabilities, problem);
  return out;
}

Assignment brute_force_solve(const GeofenceProblem& problem) {
  problem.validate();
  const std::size_t n = problem.entries.size();
  if (n > kBruteForceMaxEntries) {
    throw SizeError("brute force limited to " + std::to_string(kBruteForceMaxEntries) + " entries, got " +
                    std::to_string(n));
  }
  Assignment best = empty_assignment(problem);
  if (problem.limit <= 0.0) return best;

  const double tol = kBudgetTolerance;
  double best_value = -1.0;
  std::vector<double> x(n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = (mask >> i) & 1U ? 1.0 : 0.0;
      used += x[i] * problem.entries[i].emission_rate;
    }
    if (used > problem.limit + tol) continue;

    // Candidate with no fractional variable, then one per index outside the set.
    auto consider = [&](const std::vector<double>& candidate) {
      const double value = objective_of(candidate, problem);
      if (value > best_value) {
        best_value = value;
        best.probabilities = candidate;
      }
    };
    consider(x);
    for (std::size_t j = 0; j < n; ++j) {
      if ((mask >> j) & 1U) continue;
      const double e = problem.entries[j].emission_rate;
      if (e <= 0.0) continue;
      const double frac = (problem.limit - used) / e;
      if (frac < 0.0 || frac > 1.0) continue;
      std::vector<double> candidate = x;
      candidate[j] = frac;
      consider(candidate);
    }
  }
  best.objective_value = best_value;
  return best;
}

double objective(const Assignment& assignment, const GeofenceProblem& problem) {
  double total = 0.0;
  for (const auto& entry : problem.entries) {
    total += assignment.probability(entry.vehicle_id) / entry.density_weight;
  }
  return total;
}

double expected_emission(const Assignment& assignment, const GeofenceProblem& problem) {
  double total = 0.0;
  for (const auto& entry : problem.entries) {
    total += assignment.probability(entry.vehicle_id) * entry.emission_rate;
  }
  return total;
}

}  // namespace ecofence
