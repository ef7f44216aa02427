#pragma once

#include <cstdint>

#include "demest/dem.hpp"
#include "demest/report.hpp"
#include "demest/syndromes.hpp"

namespace demest {

/// Draws `shots` syndromes x = M e with e_i ~ Bernoulli(theta_i). The RNG is
/// split into one stream per 4096-shot block keyed by (seed, block), so the
/// output is bit-identical for any thread count. Requires a physical DEM.
SyndromeBatch sample(const Dem& dem, size_t shots, uint64_t seed, int threads = 0);

inline constexpr size_t kSampleBlockShots = 4096;

/// Groups temporal-bulk edges (no detector in the first or last round) by
/// equivalence under integer round translation and replaces each member's
/// rate with the group mean of the report's estimates. Boundary-round edges
/// keep their estimated rate. Rounds must be integer-labeled.
Dem time_average(const Dem& dem, const EstimateReport& report);

/// Builds a DEM for `target_rounds` rounds from a time-averaged source:
/// first- and last-round edges are copied (last-round ones re-anchored to
/// the new last round) and one representative per bulk equivalence class is
/// translated to every valid bulk position. Collisions merge by attenuation
/// summation. Detectors must be laid out round-major with identical spatial
/// sites in every round.
Dem tile_rounds(const Dem& dem, int target_rounds);

/// Keeps rounds [t0, t1]: edges with no detector in the window are dropped,
/// the rest are clipped to the window, collisions merge by attenuation
/// summation, and detectors are reindexed to the window (rounds shifted so
/// the window starts at 0).
Dem restrict_rounds(const Dem& dem, int t0, int t1);

}  // namespace demest
