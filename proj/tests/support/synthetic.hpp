#pragma once

// Synthetic DEM families mirroring repetition- and surface-code noise
// structure, shared by the unit and acceptance suites.

#include <random>

#include "demest/dem.hpp"

namespace demest::testing {

/// Chain DEM: adjacent pairs {i, i+1} plus all singletons. With n detectors
/// this has 2n - 1 edges (n = 30 gives 59, the ~60-edge scale).
inline Dem chain_dem(uint32_t n, double rate_lo, double rate_hi,
                     std::mt19937_64& rng) {
  Dem dem(n);
  std::uniform_real_distribution<double> rate(rate_lo, rate_hi);
  for (uint32_t i = 0; i + 1 < n; ++i)
    dem.add_edge(DetectorSet({i, i + 1}, n), rate(rng));
  for (uint32_t i = 0; i < n; ++i) dem.add_edge(DetectorSet({i}, n), rate(rng));
  return dem;
}

/// Repetition-code-like DEM on a (sites x rounds) grid with round-major
/// detector indexing and full coordinates. Edge families: timelike pairs,
/// same-round spacelike pairs, diagonal spacetime pairs, and point edges at
/// the two chain boundaries.
inline Dem repetition_grid_dem(uint32_t sites, int rounds, double rate_lo,
                               double rate_hi, std::mt19937_64& rng) {
  const uint32_t n = sites * static_cast<uint32_t>(rounds);
  Dem dem(n);
  auto det = [&](int r, uint32_t s) { return static_cast<uint32_t>(r) * sites + s; };
  std::uniform_real_distribution<double> rate(rate_lo, rate_hi);
  for (int r = 0; r < rounds; ++r)
    for (uint32_t s = 0; s < sites; ++s)
      dem.coords.set(det(r, s), {static_cast<double>(s), 0.0, static_cast<double>(r)});
  for (int r = 0; r + 1 < rounds; ++r)
    for (uint32_t s = 0; s < sites; ++s)
      dem.add_edge(DetectorSet({det(r, s), det(r + 1, s)}, n), rate(rng));
  for (int r = 0; r < rounds; ++r)
    for (uint32_t s = 0; s + 1 < sites; ++s)
      dem.add_edge(DetectorSet({det(r, s), det(r, s + 1)}, n), rate(rng));
  for (int r = 0; r + 1 < rounds; ++r)
    for (uint32_t s = 0; s + 1 < sites; ++s)
      dem.add_edge(DetectorSet({det(r, s), det(r + 1, s + 1)}, n), rate(rng));
  for (int r = 0; r < rounds; ++r) {
    dem.add_edge(DetectorSet({det(r, 0)}, n), rate(rng));
    dem.add_edge(DetectorSet({det(r, sites - 1)}, n), rate(rng));
  }
  return dem;
}

/// Surface-code-like DEM at the d=3, two-round scale: 8 stabilizer sites in
/// two rounds (n = 16) with points, timelike, spacelike, spacetime pairs,
/// order-3 hooks and order-4 measurement motifs.
inline Dem surface3_dem(double scale, std::mt19937_64& rng) {
  const uint32_t sites = 8;
  const int rounds = 2;
  const uint32_t n = sites * rounds;
  // d=3 rotated-surface stabilizer layout.
  const double xs[8] = {1, 3, 0, 2, 1, 3, 2, 0};
  const double ys[8] = {0, 0, 1, 1, 2, 2, 3, 3};
  Dem dem(n);
  auto det = [&](int r, uint32_t s) { return static_cast<uint32_t>(r) * sites + s; };
  for (int r = 0; r < rounds; ++r)
    for (uint32_t s = 0; s < sites; ++s)
      dem.coords.set(det(r, s), {xs[s], ys[s], static_cast<double>(r)});
  auto close = [&](uint32_t a, uint32_t b) {
    return std::abs(xs[a] - xs[b]) + std::abs(ys[a] - ys[b]) <= 2.0;
  };
  std::uniform_real_distribution<double> jitter(0.7, 1.3);
  auto rate = [&](double base) { return base * scale * jitter(rng); };

  for (int r = 0; r < rounds; ++r)
    for (uint32_t s = 0; s < sites; ++s)
      dem.add_edge(DetectorSet({det(r, s)}, n), rate(4e-3));
  for (uint32_t s = 0; s < sites; ++s)
    dem.add_edge(DetectorSet({det(0, s), det(1, s)}, n), rate(6e-3));
  for (int r = 0; r < rounds; ++r)
    for (uint32_t a = 0; a < sites; ++a)
      for (uint32_t b = a + 1; b < sites; ++b)
        if (close(a, b))
          dem.add_edge(DetectorSet({det(r, a), det(r, b)}, n), rate(3e-3));
  for (uint32_t a = 0; a < sites; ++a)
    for (uint32_t b = 0; b < sites; ++b)
      if (a != b && close(a, b))
        dem.add_edge(DetectorSet({det(0, a), det(1, b)}, n), rate(1.5e-3));
  // Hook-like order-3 edges and measurement-like order-4 motifs.
  for (uint32_t a = 0; a < sites; ++a)
    for (uint32_t b = a + 1; b < sites; ++b)
      if (close(a, b)) {
        dem.add_edge(DetectorSet({det(0, a), det(0, b), det(1, a)}, n), rate(8e-4));
        dem.add_edge(DetectorSet({det(0, a), det(0, b), det(1, a), det(1, b)}, n),
                     rate(6e-4));
      }
  return dem;
}

}  // namespace demest::testing
