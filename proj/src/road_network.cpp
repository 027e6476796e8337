#include "ecofence/road_network.hpp"

#include <cmath>

#include "ecofence/errors.hpp"

namespace ecofence {

double Edge::length() const noexcept {
  double total = 0.0;
  for (std::size_t i = 1; i < geometry.size(); ++i) total += distance(geometry[i - 1], geometry[i]);
  return total;
}

Vec2 Edge::point_at(double offset) const noexcept {
  if (geometry.empty()) return {};
  if (offset <= 0.0) return geometry.front();
  for (std::size_t i = 1; i < geometry.size(); ++i) {
    const double seg = distance(geometry[i - 1], geometry[i]);
    if (offset <= seg) return seg > 0.0 ? lerp(geometry[i - 1], geometry[i], offset / seg) : geometry[i];
    offset -= seg;
  }
  return geometry.back();
}

std::size_t RoadNetwork::add_edge(Edge edge) {
  if (edge.id.empty()) throw DomainError("edge id must not be empty");
  if (index_.contains(edge.id)) throw DomainError("duplicate edge id '" + edge.id + "'");
  if (edge.geometry.size() < 2 || !(edge.length() > 0.0)) {
    throw DomainError("edge '" + edge.id + "' has degenerate geometry");
  }
  if (!(edge.speed_limit_kmh > 0.0) || !std::isfinite(edge.speed_limit_kmh)) {
    throw DomainError("edge '" + edge.id + "' speed limit must be positive");
  }
  if (!(edge.density_weight >= 1.0) || !std::isfinite(edge.density_weight)) {
    throw DomainError("edge '" + edge.id + "' density weight must be >= 1");
  }
  const std::size_t index = edges_.size();
  index_.emplace(edge.id, index);
  edges_.push_back(std::move(edge));
  return index;
}

bool RoadNetwork::contains(std::string_view id) const { return index_.contains(std::string(id)); }

std::size_t RoadNetwork::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw DomainError("unknown edge '" + std::string(id) + "'");
  return it->second;
}

const Edge& RoadNetwork::edge(std::string_view id) const { return edges_[index_of(id)]; }

void RoadNetwork::set_density_weight(std::string_view id, double weight) {
  if (!(weight >= 1.0) || !std::isfinite(weight)) {
    throw DomainError("density weight for '" + std::string(id) + "' must be >= 1");
  }
  edges_[index_of(id)].density_weight = weight;
}

std::vector<std::size_t> RoadNetwork::resolve_route(std::span<const std::string> edge_ids) const {
  if (edge_ids.empty()) throw DomainError("route must contain at least one edge");
  std::vector<std::size_t> route;
  route.reserve(edge_ids.size());
  for (const std::string& id : edge_ids) {
    const std::size_t index = index_of(id);
    if (!route.empty()) {
      const Edge& prev = edges_[route.back()];
      if (distance(prev.geometry.back(), edges_[index].geometry.front()) > kRouteJoinTolerance) {
        throw DomainError("route edges '" + prev.id + "' and '" + id + "' are not connected");
      }
    }
    route.push_back(index);
  }
  return route;
}

bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
  if (a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t i = 0; i < a.edges_.size(); ++i) {
    const Edge& x = a.edges_[i];
    const Edge& y = b.edges_[i];
    if (x.id != y.id || x.geometry != y.geometry || x.speed_limit_kmh != y.speed_limit_kmh ||
        x.density_weight != y.density_weight) {
      return false;
    }
  }
  return true;
}

}  // namespace ecofence
