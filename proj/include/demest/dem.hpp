#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "demest/bits.hpp"
#include "demest/errors.hpp"

namespace demest {

struct Coord {
  double x = 0, y = 0, t = 0;
  bool operator==(const Coord&) const = default;
};

/// Per-detector (x, y, t) coordinates; t is the round index.
class DetectorCoords {
 public:
  void set(uint32_t det, Coord c) { map_[det] = c; }
  bool has(uint32_t det) const { return map_.count(det) != 0; }
  const Coord& at(uint32_t det) const {
    auto it = map_.find(det);
    if (it == map_.end())
      throw DomainError("no coordinates for detector " + std::to_string(det));
    return it->second;
  }
  bool empty() const { return map_.empty(); }
  size_t size() const { return map_.size(); }
  const std::unordered_map<uint32_t, Coord>& entries() const { return map_; }

  /// Throws unless every detector in [0, n) has coordinates.
  void require_complete(uint32_t n) const {
    for (uint32_t d = 0; d < n; ++d)
      if (!has(d))
        throw DomainError("operation needs coordinates for every detector; "
                          "detector " + std::to_string(d) + " has none");
  }

 private:
  std::unordered_map<uint32_t, Coord> map_;
};

inline double l1_distance(const Coord& a, const Coord& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.t - b.t);
}

/// A detector error model: unique hyperedges (columns of the incidence
/// matrix) with independent excitation rates, plus optional detector
/// coordinates.
class Dem {
 public:
  Dem() = default;
  explicit Dem(uint32_t detector_count) : n_(detector_count) {}

  uint32_t detector_count() const { return n_; }
  size_t edge_count() const { return edges_.size(); }
  const std::vector<DetectorSet>& edges() const { return edges_; }
  const DetectorSet& edge(size_t i) const { return edges_[i]; }
  double rate(size_t i) const { return rates_[i]; }
  Eigen::VectorXd rates() const {
    return Eigen::Map<const Eigen::VectorXd>(rates_.data(), rates_.size());
  }
  void set_rate(size_t i, double theta) { rates_[i] = theta; }

  /// Adds a hyperedge. A duplicate detector set is merged with the existing
  /// edge by summing attenuations: 1-2theta = (1-2theta_a)(1-2theta_b),
  /// the inclusion-exclusion rule.
  void add_edge(DetectorSet edge, double theta);

  /// Index of an edge by detector set, or -1.
  long find_edge(const DetectorSet& edge) const {
    auto it = index_.find(edge);
    return it == index_.end() ? -1 : static_cast<long>(it->second);
  }

  bool physical() const {
    for (double t : rates_)
      if (t < 0.0 || t >= 0.5) return false;
    return true;
  }

  int max_edge_cardinality() const {
    int k = 0;
    for (const auto& e : edges_) k = std::max<int>(k, e.size());
    return k;
  }

  DetectorCoords coords;

 private:
  uint32_t n_ = 0;
  std::vector<DetectorSet> edges_;
  std::vector<double> rates_;
  std::unordered_map<DetectorSet, size_t, DetectorSetHash> index_;
};

/// Combines two independent excitation rates for the same hyperedge.
inline double merge_rates(double a, double b) { return a * (1 - b) + b * (1 - a); }

enum class HyperedgeClass { point, timelike, spacelike, spacetimelike, order3, order4plus };

const char* to_string(HyperedgeClass c);

/// Per-edge classification by cardinality and coordinate layout; needs
/// coordinates for every detector that appears in an edge.
std::vector<HyperedgeClass> classify(const Dem& dem);

}  // namespace demest
