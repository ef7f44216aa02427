#include "demest/dem_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "demest/parallel.hpp"

namespace demest {

namespace {

double uniform_open(std::mt19937_64& rng) {
  // (0, 1]; never 0 so logarithms are safe.
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

long round_label(const Coord& c) {
  double r = std::round(c.t);
  if (std::abs(c.t - r) > 1e-9)
    throw DomainError("round-translation operations need integer round labels, got t=" +
                      std::to_string(c.t));
  return static_cast<long>(r);
}

}  // namespace

SyndromeBatch sample(const Dem& dem, size_t shots, uint64_t seed, int threads) {
  for (size_t i = 0; i < dem.edge_count(); ++i)
    if (dem.rate(i) < 0.0 || dem.rate(i) >= 0.5)
      throw DomainError("sampling needs a physical DEM; edge " +
                        dem.edge(i).str() + " has rate " +
                        std::to_string(dem.rate(i)));

  SyndromeBatch batch(dem.detector_count(), shots);
  const size_t blocks = (shots + kSampleBlockShots - 1) / kSampleBlockShots;
  parallel_for(blocks, threads, [&](size_t block) {
    const size_t begin = block * kSampleBlockShots;
    const size_t count = std::min(kSampleBlockShots, shots - begin);
    std::mt19937_64 rng(mix_seed(seed, block));
    for (size_t e = 0; e < dem.edge_count(); ++e) {
      const double theta = dem.rate(e);
      if (theta <= 0.0) continue;
      const double log1m = std::log1p(-theta);
      const auto& dets = dem.edge(e).indices();
      // Geometric skips between firing shots.
      size_t pos = 0;
      for (;;) {
        const double u = uniform_open(rng);
        pos += static_cast<size_t>(std::log(u) / log1m);
        if (pos >= count) break;
        for (uint32_t d : dets) batch.xor_bit(begin + pos, d);
        ++pos;
      }
    }
  });
  return batch;
}

namespace {

struct TranslationKey {
  std::string text;
  bool operator<(const TranslationKey& o) const { return text < o.text; }
};

TranslationKey translation_class_key(const Dem& dem, const DetectorSet& edge) {
  long tmin = std::numeric_limits<long>::max();
  for (uint32_t d : edge.indices())
    tmin = std::min(tmin, round_label(dem.coords.at(d)));
  std::vector<std::string> parts;
  char buf[96];
  for (uint32_t d : edge.indices()) {
    const Coord& c = dem.coords.at(d);
    std::snprintf(buf, sizeof buf, "%.17g|%.17g|%ld", c.x, c.y,
                  round_label(c) - tmin);
    parts.emplace_back(buf);
  }
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& p : parts) {
    key += p;
    key += ';';
  }
  return {key};
}

void round_extent(const Dem& dem, long* tmin, long* tmax) {
  if (dem.coords.empty()) throw DomainError("operation needs detector coordinates");
  *tmin = std::numeric_limits<long>::max();
  *tmax = std::numeric_limits<long>::min();
  for (const auto& [det, c] : dem.coords.entries()) {
    long t = round_label(c);
    *tmin = std::min(*tmin, t);
    *tmax = std::max(*tmax, t);
  }
}

bool touches_round(const Dem& dem, const DetectorSet& edge, long round) {
  for (uint32_t d : edge.indices())
    if (round_label(dem.coords.at(d)) == round) return true;
  return false;
}

}  // namespace

Dem time_average(const Dem& dem, const EstimateReport& report) {
  long tmin, tmax;
  round_extent(dem, &tmin, &tmax);

  std::unordered_map<DetectorSet, size_t, DetectorSetHash> report_index;
  for (size_t i = 0; i < report.edges.size(); ++i)
    report_index.emplace(report.edges[i], i);
  auto estimated_rate = [&](size_t dem_edge) {
    auto it = report_index.find(dem.edge(dem_edge));
    if (it == report_index.end())
      throw DomainError("report has no estimate for edge " +
                        dem.edge(dem_edge).str());
    return report.theta[static_cast<Eigen::Index>(it->second)];
  };

  std::map<TranslationKey, std::vector<size_t>> groups;
  std::vector<bool> bulk(dem.edge_count(), false);
  for (size_t e = 0; e < dem.edge_count(); ++e) {
    if (touches_round(dem, dem.edge(e), tmin) ||
        touches_round(dem, dem.edge(e), tmax))
      continue;
    bulk[e] = true;
    groups[translation_class_key(dem, dem.edge(e))].push_back(e);
  }

  std::vector<double> rates(dem.edge_count());
  for (size_t e = 0; e < dem.edge_count(); ++e) rates[e] = estimated_rate(e);
  for (const auto& [key, members] : groups) {
    double mean = 0;
    for (size_t e : members) mean += rates[e];
    mean /= static_cast<double>(members.size());
    for (size_t e : members) rates[e] = mean;
  }

  Dem out(dem.detector_count());
  out.coords = dem.coords;
  for (size_t e = 0; e < dem.edge_count(); ++e) out.add_edge(dem.edge(e), rates[e]);
  return out;
}

namespace {

/// Round-major detector layout: detector index = round_ord * per_round +
/// spatial_ord, with the same spatial sites (x, y) in every round.
struct GridLayout {
  long tmin = 0, tmax = 0;
  uint32_t per_round = 0;
  std::vector<std::pair<double, double>> sites;  // spatial_ord -> (x, y)

  long rounds() const { return tmax - tmin + 1; }
};

GridLayout grid_layout(const Dem& dem) {
  GridLayout g;
  round_extent(dem, &g.tmin, &g.tmax);
  const long rounds = g.rounds();
  if (dem.coords.size() != dem.detector_count() ||
      dem.detector_count() % rounds != 0)
    throw DomainError("round tiling needs complete coordinates forming "
                      "rounds x detectors_per_round");
  g.per_round = dem.detector_count() / static_cast<uint32_t>(rounds);
  g.sites.resize(g.per_round);
  for (uint32_t d = 0; d < dem.detector_count(); ++d) {
    const Coord& c = dem.coords.at(d);
    const long r = round_label(c) - g.tmin;
    if (static_cast<long>(d / g.per_round) != r)
      throw DomainError("round tiling needs round-major detector indices; "
                        "detector " + std::to_string(d) + " sits in round " +
                        std::to_string(r));
    const uint32_t s = d % g.per_round;
    if (r == 0)
      g.sites[s] = {c.x, c.y};
    else if (g.sites[s] != std::make_pair(c.x, c.y))
      throw DomainError("round tiling needs identical spatial sites in every round");
  }
  return g;
}

}  // namespace

Dem tile_rounds(const Dem& dem, int target_rounds) {
  if (target_rounds < 2) throw DomainError("tile_rounds needs at least 2 rounds");
  const GridLayout g = grid_layout(dem);
  const long src_rounds = g.rounds();
  const long shift_last = target_rounds - src_rounds;

  Dem out(g.per_round * static_cast<uint32_t>(target_rounds));
  for (long r = 0; r < target_rounds; ++r)
    for (uint32_t s = 0; s < g.per_round; ++s)
      out.coords.set(static_cast<uint32_t>(r) * g.per_round + s,
                     {g.sites[s].first, g.sites[s].second,
                      static_cast<double>(g.tmin + r)});

  auto translated = [&](const DetectorSet& edge, long round_shift) {
    std::vector<uint32_t> ids;
    for (uint32_t d : edge.indices()) {
      const long r = static_cast<long>(d / g.per_round) + round_shift;
      if (r < 0 || r >= target_rounds)
        throw DomainError("edge " + edge.str() + " does not fit in " +
                          std::to_string(target_rounds) + " rounds");
      ids.push_back(static_cast<uint32_t>(r) * g.per_round + d % g.per_round);
    }
    return DetectorSet(std::move(ids), out.detector_count());
  };

  // Boundary edges anchor to the matching boundary of the target.
  std::map<TranslationKey, std::vector<size_t>> classes;
  for (size_t e = 0; e < dem.edge_count(); ++e) {
    const bool first = touches_round(dem, dem.edge(e), g.tmin);
    const bool last = touches_round(dem, dem.edge(e), g.tmax);
    if (first && last && shift_last != 0)
      throw DomainError("edge " + dem.edge(e).str() +
                        " touches both boundary rounds; cannot retile");
    if (first) {
      out.add_edge(translated(dem.edge(e), 0), dem.rate(e));
    } else if (last) {
      out.add_edge(translated(dem.edge(e), shift_last), dem.rate(e));
    } else {
      classes[translation_class_key(dem, dem.edge(e))].push_back(e);
    }
  }

  for (const auto& [key, members] : classes) {
    double mean = 0;
    for (size_t e : members) mean += dem.rate(e);
    mean /= static_cast<double>(members.size());

    const size_t rep = members.front();
    long rep_t0 = std::numeric_limits<long>::max(), rep_t1 = 0;
    for (uint32_t d : dem.edge(rep).indices()) {
      const long r = static_cast<long>(d / g.per_round);
      rep_t0 = std::min(rep_t0, r);
      rep_t1 = std::max(rep_t1, r);
    }
    const long span = rep_t1 - rep_t0;
    // Every bulk placement: min round in [1, target-2-span].
    for (long p = 1; p + span <= target_rounds - 2; ++p)
      out.add_edge(translated(dem.edge(rep), p - rep_t0), mean);
  }
  return out;
}

Dem restrict_rounds(const Dem& dem, int t0, int t1) {
  if (t1 < t0) throw DomainError("restrict_rounds window is empty");
  dem.coords.require_complete(dem.detector_count());

  std::vector<long> new_index(dem.detector_count(), -1);
  std::vector<uint32_t> kept;
  for (uint32_t d = 0; d < dem.detector_count(); ++d) {
    const long t = round_label(dem.coords.at(d));
    if (t >= t0 && t <= t1) {
      new_index[d] = static_cast<long>(kept.size());
      kept.push_back(d);
    }
  }
  if (kept.empty()) throw DomainError("restrict_rounds window contains no detectors");

  Dem out(static_cast<uint32_t>(kept.size()));
  for (uint32_t d : kept) {
    Coord c = dem.coords.at(d);
    c.t -= t0;
    out.coords.set(static_cast<uint32_t>(new_index[d]), c);
  }
  for (size_t e = 0; e < dem.edge_count(); ++e) {
    std::vector<uint32_t> ids;
    for (uint32_t d : dem.edge(e).indices())
      if (new_index[d] >= 0) ids.push_back(static_cast<uint32_t>(new_index[d]));
    if (ids.empty()) continue;
    out.add_edge(DetectorSet(std::move(ids), out.detector_count()), dem.rate(e));
  }
  return out;
}

}  // namespace demest
