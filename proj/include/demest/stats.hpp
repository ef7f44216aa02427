#pragma once

#include <Eigen/Core>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "demest/bits.hpp"
#include "demest/dem.hpp"
#include "demest/report.hpp"
#include "demest/syndromes.hpp"

namespace demest {

/// Posterior-mean moment estimate from a beta(1,1) prior.
struct MomentEstimate {
  DetectorSet subset;
  double mu_hat = 0;  // (1 + #{x >= s}) / (N + 2)
  double sigma = 0;   // sqrt(mu(1-mu)/N)
  size_t shots = 0;
};

struct Depolarization {
  double omega_hat = 0;
  double sigma = 0;  // sqrt((e^{2w} - 1)/N)
};

struct PairCorrelation {
  uint32_t i = 0, j = 0;
  double theta = 0;
  double sigma = 0;
  double z = 0;
};

/// Detector pairs whose estimated pairwise rate clears the most-extreme-draw
/// threshold Phi^{-1}(1 - 1/C(n,2)).
struct CorrelationGraph {
  uint32_t detector_count = 0;
  double threshold = 0;
  std::vector<PairCorrelation> pairs;

  bool has_edge(uint32_t a, uint32_t b) const;
  void build_lookup();

 private:
  std::vector<uint64_t> lookup_;  // sorted packed keys
};

/// One batch plus cached counting statistics. All estimators run off packed
/// columns; count caches are shared so repeated passes over the same subsets
/// are free. Thread-safe for concurrent readers.
class SyndromeStats {
 public:
  explicit SyndromeStats(const SyndromeBatch& batch, int threads = 0);

  const SyndromeBatch& batch() const { return batch_; }
  const DetectorColumns& columns() const { return columns_; }
  size_t shot_count() const { return batch_.shot_count(); }
  uint32_t detector_count() const { return batch_.detector_count(); }

  /// #{shots with every detector of the subset set}; cached.
  size_t moment_count(const DetectorSet& subset) const;
  /// Sum over shots of x . b; cached.
  size_t parity_count(const DetectorSet& subset) const;

  MomentEstimate moment(const DetectorSet& subset) const;

  /// omega_hat = -ln(1 - 2 (1 + sum x.b)/(N + 2)). The empty subset is 0 by
  /// convention. Throws PoleError when the smoothed parity mean reaches 1/2.
  Depolarization depolarization(const DetectorSet& subset) const;

  double polarization_hat(const DetectorSet& subset) const;

  /// Number of distinct batch passes spent counting parities.
  size_t parity_evaluations() const { return parity_evals_; }

  int threads() const { return threads_; }

 private:
  const SyndromeBatch& batch_;
  DetectorColumns columns_;
  int threads_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<DetectorSet, size_t, DetectorSetHash> moment_cache_;
  mutable std::unordered_map<DetectorSet, size_t, DetectorSetHash> parity_cache_;
  mutable size_t parity_evals_ = 0;
};

/// Pairwise excitation rate and its standard error (the p_ij analysis).
/// Throws PoleError when a marginal reaches 1/2 or the correlation
/// denominator is non-positive.
PairCorrelation pairwise_theta(const SyndromeStats& stats, uint32_t i, uint32_t j);

CorrelationGraph correlation_graph(const SyndromeStats& stats);

/// N w^2 / (e^{2w} - 1); maximized near w = 0.797.
double snr(double omega, double shots);

enum class VarianceMethod { moment, heuristic, jackknife };

struct JackknifeOptions {
  size_t replicates = 1000;
  uint64_t seed = 0;
};

/// Per-edge variance of the estimated rates for a fixed structure.
///   moment:    sigma_s^2 = mu(1-mu)/N of each edge's moment
///   heuristic: Var(theta) = 1/4 * (1/N) (1/4)^{|s|} (1-pi^2)/pi^2
///   jackknife: re-runs the parity estimator with single shots omitted
///              (without replacement; R=N is the classic leave-one-out)
Eigen::VectorXd rate_variance(const SyndromeStats& stats, const Dem& structure,
                              VarianceMethod method,
                              const JackknifeOptions& jk = {});

}  // namespace demest
