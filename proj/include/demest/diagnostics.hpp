#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "demest/dem.hpp"
#include "demest/report.hpp"
#include "demest/stats.hpp"
#include "demest/syndromes.hpp"

namespace demest {

/// Round framing of a batch: detector index = round * detectors_per_round +
/// spatial site (round-major).
struct RoundShape {
  int rounds = 1;
  int detectors_per_round = 1;

  uint32_t detector_count() const {
    return static_cast<uint32_t>(rounds) * detectors_per_round;
  }
  void check(const SyndromeBatch& batch) const;
};

/// Sum over edges of |S| psi_S; about twice the expected syndrome Hamming
/// weight for weak noise.
double weighted_total_attenuation(const EstimateReport& report);

struct AttenuationTrace {
  struct Window {
    size_t index = 0;
    size_t first_shot = 0;
    size_t shot_count = 0;
    double weighted_total_attenuation = 0;
    double mean_hamming_weight = 0;
  };
  std::vector<Window> windows;
  std::vector<DetectorSet> edges;
  Eigen::MatrixXd rate_traces;  // windows x edges
  Eigen::VectorXd stability;    // per-edge variance across windows
};

/// Splits the batch into consecutive windows of `window_shots`, estimates
/// rates per window with the parity algorithm, and tracks weighted total
/// attenuation and mean syndrome weight alongside per-edge rate traces.
AttenuationTrace track_windows(const SyndromeBatch& batch, const Dem& structure,
                               size_t window_shots, int threads = 0);

/// The pairwise significance screen restricted to pairs at l1 distance (on
/// x, y, t) of at least `min_l1`, optionally to same-round pairs.
CorrelationGraph long_range_pairs(const SyndromeStats& stats,
                                  const DetectorCoords& coords, double min_l1,
                                  bool same_round_only);

struct MotifHit {
  uint32_t site_a = 0, site_b = 0;  // spatial indices
  int round = 0;                    // t of the (a_t, b_t, a_{t+1}, b_{t+1}) motif
  double theta = 0, sigma = 0, z = 0;
  double l1 = 0;  // spatial l1 distance between the sites
};

struct MotifScan {
  std::vector<MotifHit> hits;  // significant motifs only
  double threshold = 0;
  size_t motifs_scanned = 0;
};

/// Builds the all-pairs correlated-measurement-error motif DEM, estimates it
/// with the parity algorithm, and keeps significant instances.
MotifScan motif_scan(const SyndromeStats& stats, const DetectorCoords& coords,
                     const RoundShape& shape);

enum class FractionGranularity { round, shot, qubit };

/// Detector-event fractions at the requested granularity, optionally
/// smoothed with a centered moving average (window 1 = identity).
Eigen::VectorXd detector_event_fraction(const SyndromeBatch& batch,
                                        const RoundShape& shape,
                                        FractionGranularity granularity,
                                        int smooth_window = 1);

struct AnomalyEvent {
  enum class Kind { high_energy, tls_like };
  Kind kind = Kind::high_energy;
  size_t sample = 0;
  size_t shot = 0;
  long round_begin = 0;
  long round_end = 0;
  double peak_fraction = 0;
  // High-energy fit diagnostics.
  double decay_tau = 0;
  double fit_r2 = 0;
  // TLS diagnostics.
  int width_rounds = 0;
  uint32_t site_a = 0, site_b = 0;
};

struct HighEnergyOptions {
  int shot_smooth_window = 10;
  int peak_shot_tolerance = 5;
  int round_smooth_window = 50;
  double min_r2 = 0.8;
  double tau_min = 5;
  double tau_max = 500;
};

/// Per contiguous sample of `shots_per_sample` shots: locate the largest
/// shot-fraction peak in raw and smoothed series, and when they coincide
/// within tolerance, fit an exponential decay to the post-peak round
/// fractions. At most one event is reported per sample.
std::vector<AnomalyEvent> detect_high_energy(const SyndromeBatch& batch,
                                             const RoundShape& shape,
                                             size_t shots_per_sample,
                                             const HighEnergyOptions& options = {});

struct TlsTemplateSpec {
  int filter_rounds = 16;         // moving-sum matched filter length
  double trigger_fraction = 0.75; // trigger when sum >= fraction * length
  int merge_gap_rounds = 50;
  int window_before = 50;   // width accumulation window around the trigger
  int window_after = 250;
  int min_run_rounds = 3;   // runs longer than two rounds count toward width
};

struct TlsScan {
  std::vector<AnomalyEvent> events;
  std::vector<int> widths;
  std::vector<double> gaps_rounds;  // inter-event separations per sample
  double mean_gap_rounds = 0;       // exponential fit (MLE) of the gaps
};

/// Matched-filter search for sustained joint flipping of adjacent detector
/// pairs (adjacency: same round, spatial l1 distance 1 from coordinates).
TlsScan detect_tls(const SyndromeBatch& batch, const RoundShape& shape,
                   const DetectorCoords& coords, size_t shots_per_sample,
                   const TlsTemplateSpec& spec = {});

}  // namespace demest
