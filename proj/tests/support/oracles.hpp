#pragma once

// Independent test oracles: brute-force enumerations kept deliberately free
// of the library's transform pipelines.

#include <Eigen/Core>
#include <random>

#include "demest/dem.hpp"
#include "demest/syndromes.hpp"

namespace demest::testing {

/// O(4^n) double-sum Walsh-Hadamard transform.
inline Eigen::VectorXd slow_hadamard(const Eigen::VectorXd& v) {
  const Eigen::Index size = v.size();
  Eigen::VectorXd out(size);
  for (Eigen::Index y = 0; y < size; ++y) {
    double acc = 0;
    for (Eigen::Index x = 0; x < size; ++x) {
      const int parity = std::popcount(static_cast<uint64_t>(x & y)) & 1;
      acc += parity ? -v[x] : v[x];
    }
    out[y] = acc;
  }
  return out;
}

/// Exact syndrome distribution by enumerating all 2^E excitations.
inline Eigen::VectorXd brute_force_probs(const Dem& dem) {
  const uint32_t n = dem.detector_count();
  const size_t E = dem.edge_count();
  if (n > 24 || E > 24) throw std::runtime_error("brute force oracle too large");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
  std::vector<uint64_t> masks(E);
  for (size_t e = 0; e < E; ++e) masks[e] = dem.edge(e).subset_index();
  for (uint64_t exc = 0; exc < (uint64_t{1} << E); ++exc) {
    double prob = 1;
    uint64_t syndrome = 0;
    for (size_t e = 0; e < E; ++e) {
      if ((exc >> e) & 1) {
        prob *= dem.rate(e);
        syndrome ^= masks[e];
      } else {
        prob *= 1.0 - dem.rate(e);
      }
    }
    p[static_cast<Eigen::Index>(syndrome)] += prob;
  }
  return p;
}

/// Moment mu_Y = Pr(all detectors in Y fire) from the brute-force
/// distribution.
inline double brute_force_moment(const Dem& dem, const DetectorSet& subset) {
  const Eigen::VectorXd p = brute_force_probs(dem);
  const uint64_t mask = subset.subset_index();
  double mu = 0;
  for (Eigen::Index x = 0; x < p.size(); ++x)
    if ((static_cast<uint64_t>(x) & mask) == mask) mu += p[x];
  return mu;
}

/// Polarizations of a DEM in product form: pi_y = prod (1-2 theta)^{s.y}.
inline Eigen::VectorXd product_form_polarizations(const Dem& dem) {
  const uint32_t n = dem.detector_count();
  Eigen::VectorXd pi(Eigen::Index{1} << n);
  for (Eigen::Index y = 0; y < pi.size(); ++y) {
    double prod = 1;
    for (size_t e = 0; e < dem.edge_count(); ++e) {
      const int overlap =
          std::popcount(dem.edge(e).subset_index() & static_cast<uint64_t>(y)) & 1;
      if (overlap) prod *= 1.0 - 2.0 * dem.rate(e);
    }
    pi[y] = prod;
  }
  return pi;
}

/// Random DEM with unique edges and rates uniform in [lo, hi].
inline Dem random_dem(uint32_t n, size_t edges, double lo, double hi,
                      std::mt19937_64& rng, uint32_t max_cardinality = 0) {
  Dem dem(n);
  std::uniform_real_distribution<double> rate(lo, hi);
  std::uniform_int_distribution<uint64_t> subset(1, (uint64_t{1} << n) - 1);
  while (dem.edge_count() < edges) {
    uint64_t mask = subset(rng);
    if (max_cardinality &&
        std::popcount(mask) > static_cast<int>(max_cardinality))
      continue;
    DetectorSet edge = DetectorSet::from_index(mask, n);
    if (dem.find_edge(edge) >= 0) continue;
    dem.add_edge(std::move(edge), rate(rng));
  }
  return dem;
}

}  // namespace demest::testing
