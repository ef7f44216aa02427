#include "demest/dem.hpp"

#include <cmath>

namespace demest {

void Dem::add_edge(DetectorSet edge, double theta) {
  if (edge.detector_count() != n_)
    throw DimensionError("edge detector count " +
                         std::to_string(edge.detector_count()) +
                         " does not match DEM detector count " +
                         std::to_string(n_));
  if (edge.empty()) throw DomainError("hyperedges must be non-empty");
  auto it = index_.find(edge);
  if (it != index_.end()) {
    rates_[it->second] = merge_rates(rates_[it->second], theta);
    return;
  }
  index_.emplace(edge, edges_.size());
  edges_.push_back(std::move(edge));
  rates_.push_back(theta);
}

const char* to_string(HyperedgeClass c) {
  switch (c) {
    case HyperedgeClass::point: return "point";
    case HyperedgeClass::timelike: return "timelike";
    case HyperedgeClass::spacelike: return "spacelike";
    case HyperedgeClass::spacetimelike: return "spacetimelike";
    case HyperedgeClass::order3: return "order3";
    case HyperedgeClass::order4plus: return "order4plus";
  }
  return "?";
}

std::vector<HyperedgeClass> classify(const Dem& dem) {
  std::vector<HyperedgeClass> out;
  out.reserve(dem.edge_count());
  for (const auto& edge : dem.edges()) {
    if (edge.size() == 1) {
      out.push_back(HyperedgeClass::point);
      continue;
    }
    if (edge.size() == 3) {
      out.push_back(HyperedgeClass::order3);
      continue;
    }
    if (edge.size() >= 4) {
      out.push_back(HyperedgeClass::order4plus);
      continue;
    }
    const Coord& a = dem.coords.at(edge.indices()[0]);
    const Coord& b = dem.coords.at(edge.indices()[1]);
    const bool same_space = a.x == b.x && a.y == b.y;
    if (same_space && std::abs(a.t - b.t) == 1.0)
      out.push_back(HyperedgeClass::timelike);
    else if (a.t == b.t)
      out.push_back(HyperedgeClass::spacelike);
    else
      out.push_back(HyperedgeClass::spacetimelike);
  }
  return out;
}

}  // namespace demest
