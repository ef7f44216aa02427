#include "demest/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "demest/numerics.hpp"
#include "demest/parallel.hpp"
#include "demest/parity_estimation.hpp"

namespace demest {

void RoundShape::check(const SyndromeBatch& batch) const {
  if (rounds < 1 || detectors_per_round < 1)
    throw DomainError("round shape needs positive rounds and detectors_per_round");
  if (batch.detector_count() != detector_count())
    throw DimensionError("batch has " + std::to_string(batch.detector_count()) +
                         " detectors; shape expects " +
                         std::to_string(detector_count()));
}

double weighted_total_attenuation(const EstimateReport& report) {
  double total = 0;
  for (size_t e = 0; e < report.edges.size(); ++e)
    total += static_cast<double>(report.edges[e].size()) *
             report.psi[static_cast<Eigen::Index>(e)];
  return total;
}

AttenuationTrace track_windows(const SyndromeBatch& batch, const Dem& structure,
                               size_t window_shots, int threads) {
  if (window_shots == 0) throw DomainError("window_shots must be positive");
  const size_t windows = batch.shot_count() / window_shots;
  AttenuationTrace trace;
  trace.edges = structure.edges();
  trace.rate_traces.resize(static_cast<Eigen::Index>(windows),
                           static_cast<Eigen::Index>(structure.edge_count()));
  trace.windows.resize(windows);

  for (size_t w = 0; w < windows; ++w) {
    SyndromeBatch window = batch.slice(w * window_shots, window_shots);
    SyndromeStats stats(window, threads);
    EstimateReport report = estimate_from_parities(stats, structure);

    auto& entry = trace.windows[w];
    entry.index = w;
    entry.first_shot = w * window_shots;
    entry.shot_count = window_shots;
    entry.weighted_total_attenuation = weighted_total_attenuation(report);
    double weight = 0;
    for (size_t s = 0; s < window.shot_count(); ++s)
      weight += window.hamming_weight(s);
    entry.mean_hamming_weight = weight / static_cast<double>(window.shot_count());
    trace.rate_traces.row(static_cast<Eigen::Index>(w)) = report.theta.transpose();
  }

  trace.stability.resize(static_cast<Eigen::Index>(structure.edge_count()));
  for (Eigen::Index e = 0; e < trace.rate_traces.cols(); ++e) {
    const auto col = trace.rate_traces.col(e);
    const double mean = col.mean();
    trace.stability[e] =
        windows > 1 ? (col.array() - mean).square().sum() / (windows - 1.0) : 0.0;
  }
  return trace;
}

CorrelationGraph long_range_pairs(const SyndromeStats& stats,
                                  const DetectorCoords& coords, double min_l1,
                                  bool same_round_only) {
  CorrelationGraph graph = correlation_graph(stats);
  CorrelationGraph filtered;
  filtered.detector_count = graph.detector_count;
  filtered.threshold = graph.threshold;
  for (const auto& pair : graph.pairs) {
    const Coord& a = coords.at(pair.i);
    const Coord& b = coords.at(pair.j);
    if (same_round_only && a.t != b.t) continue;
    if (l1_distance(a, b) < min_l1) continue;
    filtered.pairs.push_back(pair);
  }
  filtered.build_lookup();
  return filtered;
}

MotifScan motif_scan(const SyndromeStats& stats, const DetectorCoords& coords,
                     const RoundShape& shape) {
  shape.check(stats.batch());
  const uint32_t per_round = static_cast<uint32_t>(shape.detectors_per_round);
  const uint32_t n = stats.detector_count();

  // Spatial coordinates per site, taken from round 0.
  std::vector<Coord> site(per_round);
  for (uint32_t s = 0; s < per_round; ++s) site[s] = coords.at(s);

  Dem motif_dem(n);
  std::vector<MotifHit> meta;
  for (uint32_t a = 0; a < per_round; ++a) {
    for (uint32_t b = a + 1; b < per_round; ++b) {
      for (int t = 0; t + 1 < shape.rounds; ++t) {
        const uint32_t base = static_cast<uint32_t>(t) * per_round;
        motif_dem.add_edge(DetectorSet({base + a, base + b, base + per_round + a,
                                        base + per_round + b},
                                       n),
                           0.0);
        MotifHit hit;
        hit.site_a = a;
        hit.site_b = b;
        hit.round = t;
        hit.l1 = std::abs(site[a].x - site[b].x) + std::abs(site[a].y - site[b].y);
        meta.push_back(hit);
      }
    }
  }

  EstimateReport report = estimate_from_parities(stats, motif_dem);
  MotifScan scan;
  scan.motifs_scanned = meta.size();
  scan.threshold =
      meta.size() >= 2
          ? normal_quantile(1.0 - 1.0 / static_cast<double>(meta.size()))
          : -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < meta.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    MotifHit hit = meta[i];
    hit.theta = report.theta[e];
    hit.sigma = report.sigma[e];
    hit.z = hit.theta / hit.sigma;
    if (hit.z > scan.threshold) scan.hits.push_back(hit);
  }
  return scan;
}

namespace {

Eigen::VectorXd moving_average(const Eigen::VectorXd& series, int window) {
  if (window <= 1) return series;
  const Eigen::Index n = series.size();
  Eigen::VectorXd out(n);
  const int half_lo = (window - 1) / 2;
  const int half_hi = window / 2;
  // Prefix sums; edges use the trimmed window.
  std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half_lo);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half_hi);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct ExpFit {
  double tau = 0, amplitude = 0, baseline = 0, r2 = -1;
};

/// Least-squares fit of y ~ A exp(-t/tau) + c over t = 0..m-1, linear in
/// (A, c) for fixed tau; tau scanned on a log grid and polished.
ExpFit fit_exponential_decay(const Eigen::VectorXd& y) {
  const Eigen::Index m = y.size();
  ExpFit best;
  if (m < 4) return best;
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (sst <= 0) return best;

  auto evaluate = [&](double tau) {
    Eigen::ArrayXd u(m);
    for (Eigen::Index t = 0; t < m; ++t) u[t] = std::exp(-static_cast<double>(t) / tau);
    const double su = u.sum(), suu = (u * u).sum();
    const double sy = y.sum(), suy = (u * y.array()).sum();
    const double det = suu * m - su * su;
    if (std::abs(det) < 1e-12) return ExpFit{tau, 0, 0, -1};
    const double amp = (suy * m - su * sy) / det;
    const double base = (suu * sy - su * suy) / det;
    const double sse = (y.array() - (amp * u + base)).square().sum();
    return ExpFit{tau, amp, base, 1.0 - sse / sst};
  };

  for (double tau = 1.0; tau <= 2000.0; tau *= 1.15) {
    ExpFit fit = evaluate(tau);
    if (fit.r2 > best.r2 && fit.amplitude > 0) best = fit;
  }
  // Local polish around the grid winner.
  for (double scale : {1.02, 0.98, 1.05, 0.95, 1.1, 0.9}) {
    ExpFit fit = evaluate(best.tau * scale);
    if (fit.r2 > best.r2 && fit.amplitude > 0) best = fit;
  }
  return best;
}

}  // namespace

Eigen::VectorXd detector_event_fraction(const SyndromeBatch& batch,
                                        const RoundShape& shape,
                                        FractionGranularity granularity,
                                        int smooth_window) {
  shape.check(batch);
  const size_t shots = batch.shot_count();
  const uint32_t per_round = static_cast<uint32_t>(shape.detectors_per_round);
  Eigen::VectorXd series;

  switch (granularity) {
    case FractionGranularity::shot: {
      series.resize(static_cast<Eigen::Index>(shots));
      for (size_t s = 0; s < shots; ++s)
        series[static_cast<Eigen::Index>(s)] =
            static_cast<double>(batch.hamming_weight(s)) / batch.detector_count();
      break;
    }
    case FractionGranularity::round: {
      series.resize(static_cast<Eigen::Index>(shots) * shape.rounds);
      Eigen::Index out = 0;
      for (size_t s = 0; s < shots; ++s) {
        for (int r = 0; r < shape.rounds; ++r, ++out) {
          int events = 0;
          const uint32_t base = static_cast<uint32_t>(r) * per_round;
          for (uint32_t d = 0; d < per_round; ++d)
            events += batch.bit(s, base + d) ? 1 : 0;
          series[out] = static_cast<double>(events) / per_round;
        }
      }
      break;
    }
    case FractionGranularity::qubit: {
      series = Eigen::VectorXd::Zero(per_round);
      for (size_t s = 0; s < shots; ++s)
        for (int r = 0; r < shape.rounds; ++r) {
          const uint32_t base = static_cast<uint32_t>(r) * per_round;
          for (uint32_t d = 0; d < per_round; ++d)
            if (batch.bit(s, base + d)) series[d] += 1.0;
        }
      if (shots > 0) series /= static_cast<double>(shots) * shape.rounds;
      break;
    }
  }
  return moving_average(series, smooth_window);
}

std::vector<AnomalyEvent> detect_high_energy(const SyndromeBatch& batch,
                                             const RoundShape& shape,
                                             size_t shots_per_sample,
                                             const HighEnergyOptions& options) {
  shape.check(batch);
  if (shots_per_sample == 0) throw DomainError("shots_per_sample must be positive");
  const size_t samples = batch.shot_count() / shots_per_sample;
  const uint32_t per_round = static_cast<uint32_t>(shape.detectors_per_round);
  std::vector<AnomalyEvent> events;

  for (size_t sample = 0; sample < samples; ++sample) {
    const size_t first = sample * shots_per_sample;
    Eigen::VectorXd shot_fraction(static_cast<Eigen::Index>(shots_per_sample));
    for (size_t s = 0; s < shots_per_sample; ++s)
      shot_fraction[static_cast<Eigen::Index>(s)] =
          static_cast<double>(batch.hamming_weight(first + s)) /
          batch.detector_count();
    Eigen::VectorXd smoothed = moving_average(shot_fraction, options.shot_smooth_window);

    Eigen::Index raw_peak, smooth_peak;
    shot_fraction.maxCoeff(&raw_peak);
    smoothed.maxCoeff(&smooth_peak);
    if (std::abs(raw_peak - smooth_peak) > options.peak_shot_tolerance) continue;

    // Zoom into the candidate shot at round granularity.
    const size_t shot = first + static_cast<size_t>(raw_peak);
    Eigen::VectorXd round_fraction(shape.rounds);
    for (int r = 0; r < shape.rounds; ++r) {
      int count = 0;
      const uint32_t base = static_cast<uint32_t>(r) * per_round;
      for (uint32_t d = 0; d < per_round; ++d)
        count += batch.bit(shot, base + d) ? 1 : 0;
      round_fraction[r] = static_cast<double>(count) / per_round;
    }
    Eigen::Index peak_round;
    round_fraction.maxCoeff(&peak_round);
    Eigen::VectorXd smooth_rounds =
        moving_average(round_fraction, options.round_smooth_window);

    // Fit past the smoothing transient after the peak.
    const Eigen::Index fit_start =
        std::min<Eigen::Index>(shape.rounds - 1,
                               peak_round + options.round_smooth_window / 2 + 1);
    const Eigen::Index fit_len = shape.rounds - fit_start;
    if (fit_len < 8) continue;
    ExpFit fit = fit_exponential_decay(smooth_rounds.segment(fit_start, fit_len));
    if (fit.r2 < options.min_r2 || fit.tau < options.tau_min ||
        fit.tau > options.tau_max)
      continue;

    AnomalyEvent event;
    event.kind = AnomalyEvent::Kind::high_energy;
    event.sample = sample;
    event.shot = shot;
    event.round_begin = peak_round;
    event.round_end = std::min<long>(shape.rounds - 1,
                                     peak_round + static_cast<long>(5 * fit.tau));
    event.peak_fraction = round_fraction[peak_round];
    event.decay_tau = fit.tau;
    event.fit_r2 = fit.r2;
    events.push_back(event);
  }
  return events;
}

TlsScan detect_tls(const SyndromeBatch& batch, const RoundShape& shape,
                   const DetectorCoords& coords, size_t shots_per_sample,
                   const TlsTemplateSpec& spec) {
  shape.check(batch);
  if (shots_per_sample == 0) throw DomainError("shots_per_sample must be positive");
  const uint32_t per_round = static_cast<uint32_t>(shape.detectors_per_round);

  // Adjacent spatial site pairs: same round, l1 distance 1.
  std::vector<std::pair<uint32_t, uint32_t>> adjacent;
  for (uint32_t a = 0; a < per_round; ++a)
    for (uint32_t b = a + 1; b < per_round; ++b) {
      const Coord& ca = coords.at(a);
      const Coord& cb = coords.at(b);
      if (std::abs(ca.x - cb.x) + std::abs(ca.y - cb.y) == 1.0)
        adjacent.emplace_back(a, b);
    }

  const int trigger =
      static_cast<int>(std::ceil(spec.trigger_fraction * spec.filter_rounds));
  TlsScan scan;
  const size_t samples = batch.shot_count() / shots_per_sample;

  for (size_t sample = 0; sample < samples; ++sample) {
    std::vector<AnomalyEvent> sample_events;
    for (size_t s = 0; s < shots_per_sample; ++s) {
      const size_t shot = sample * shots_per_sample + s;
      for (const auto& [a, b] : adjacent) {
        // Per-round AND trace for this pair.
        std::vector<char> both(shape.rounds, 0);
        for (int r = 0; r < shape.rounds; ++r) {
          const uint32_t base = static_cast<uint32_t>(r) * per_round;
          both[r] = batch.bit(shot, base + a) && batch.bit(shot, base + b);
        }
        // Trailing moving sum, triggers merged within the gap.
        std::vector<long> starts;
        int window_sum = 0;
        for (int r = 0; r < shape.rounds; ++r) {
          window_sum += both[r];
          if (r >= spec.filter_rounds) window_sum -= both[r - spec.filter_rounds];
          if (window_sum >= trigger) {
            const long start = std::max(0, r - spec.filter_rounds + 1);
            if (starts.empty() || start - starts.back() >= spec.merge_gap_rounds)
              starts.push_back(start);
          }
        }
        for (long start : starts) {
          const long lo = std::max<long>(0, start - spec.window_before);
          const long hi =
              std::min<long>(shape.rounds - 1, start + spec.window_after);
          int width = 0;
          int run = 0;
          for (long r = lo; r <= hi + 1; ++r) {
            const bool on = r <= hi && both[r];
            if (on) {
              ++run;
            } else {
              if (run >= spec.min_run_rounds) width += run;
              run = 0;
            }
          }
          AnomalyEvent event;
          event.kind = AnomalyEvent::Kind::tls_like;
          event.sample = sample;
          event.shot = shot;
          event.round_begin = start;
          event.round_end = hi;
          event.width_rounds = width;
          event.site_a = a;
          event.site_b = b;
          double peak = 0;
          for (long r = start; r <= std::min<long>(shape.rounds - 1,
                                                   start + spec.filter_rounds);
               ++r)
            peak = std::max(peak, both[r] ? 1.0 : 0.0);
          event.peak_fraction = peak;
          sample_events.push_back(event);
          scan.widths.push_back(width);
        }
      }
    }
    // Inter-event separations in absolute rounds within the sample.
    std::vector<double> times;
    for (const auto& e : sample_events)
      times.push_back(
          static_cast<double>((e.shot % shots_per_sample) * shape.rounds) +
          static_cast<double>(e.round_begin));
    std::sort(times.begin(), times.end());
    for (size_t i = 1; i < times.size(); ++i)
      scan.gaps_rounds.push_back(times[i] - times[i - 1]);
    scan.events.insert(scan.events.end(), sample_events.begin(), sample_events.end());
  }

  scan.mean_gap_rounds =
      scan.gaps_rounds.empty()
          ? 0.0
          : pairwise_sum(scan.gaps_rounds.data(), scan.gaps_rounds.size()) /
                static_cast<double>(scan.gaps_rounds.size());
  return scan;
}

}  // namespace demest
