#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecofence/geometry.hpp"

namespace ecofence {

struct Edge {
  std::string id;
  std::vector<Vec2> geometry;  // polyline, meters
  double speed_limit_kmh = 50.0;
  double density_weight = 1.0;  // cyclist density, >= 1

  double length() const noexcept;
  // Point at `offset` meters along the polyline, clamped to its ends.
  Vec2 point_at(double offset) const noexcept;
};

// Consecutive route edges must join within this distance.
inline constexpr double kRouteJoinTolerance = 0.5;

class RoadNetwork {
 public:
  // Throws DomainError on a duplicate id, degenerate geometry, non-positive
  // speed limit or density weight below 1.
  std::size_t add_edge(Edge edge);

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t index) const { return edges_.at(index); }
  const Edge& edge(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;

  void set_density_weight(std::string_view id, double weight);

  // Resolves edge ids to indices; throws DomainError if an id is unknown or
  // consecutive edges do not connect.
  std::vector<std::size_t> resolve_route(std::span<const std::string> edge_ids) const;

  friend bool operator==(const RoadNetwork& a, const RoadNetwork& b);

 private:
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ecofence
