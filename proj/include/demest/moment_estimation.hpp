#pragma once

#include <Eigen/Core>
#include <vector>

#include "demest/dem.hpp"
#include "demest/report.hpp"
#include "demest/stats.hpp"

namespace demest {

/// The per-target linear system M' e' = 1 over GF(2), restricted to the
/// target's detectors and the edges that intersect them, with all valid
/// excitations of free weight <= w enumerated and stored.
struct ReducedSystem {
  DetectorSet target;
  std::vector<size_t> neighborhood;  // edge indices, inclusion-sorted
  bool consistent = true;            // false: no excitation produces the target
  int rank = 0;
  int free_count = 0;
  int max_free_weight = 0;
  // Each excitation lists the positions (into `neighborhood`) that fire.
  std::vector<std::vector<uint32_t>> excitations;
};

/// Builds the reduced system for one target subset against a structure.
/// The target need not be an edge of the structure; when no excitation of
/// the structure can produce it the system is flagged inconsistent and has
/// no excitations (its approximate moment is 0).
ReducedSystem build_reduced_system(const Dem& structure, const DetectorSet& target,
                                   int max_free_weight);

/// Low-weight approximation of the moment the structure predicts for the
/// system's target at rates theta (one entry per structure edge).
double approx_moment(const ReducedSystem& system, const Eigen::VectorXd& theta);

struct MomentFitOptions {
  int max_free_weight = 3;
  int max_iterations = 200;
  double residual_change_tol = 1e-8;
  double derivative_step = 1e-6;
  double clip_lo = 1e-9;  // iterates stay in [clip_lo, 1/2 - clip_lo]
};

/// Algorithm: rate estimation from moments. Solves
/// r_s(theta) = (mu~_s(theta) - mu^_s)/sigma_s = 0 with a damped
/// Gauss-Newton iteration started from the clipped empirical moments.
/// Non-convergence is reported in the result, not thrown.
EstimateReport estimate_from_moments(const SyndromeStats& stats,
                                     const Dem& structure,
                                     const MomentFitOptions& options = {});

struct LearnOptions {
  int w_search = 2;
  int w_fit = 3;
  int k_max = 4;
  std::vector<DetectorSet> seeds;  // empty: all singletons
};

struct LearnResult {
  Dem structure;           // learned hyperedges with fitted rates
  EstimateReport report;   // aligned with structure.edges()
  CorrelationGraph graph;  // the pairwise screen used
};

/// Algorithm: structure learning from moments. Grows candidate hyperedges
/// along cliques of the correlation graph, accepts those whose observed
/// moment exceeds the model prediction significantly, then fits at w_fit
/// and prunes insignificant rates.
LearnResult learn_from_moments(const SyndromeStats& stats,
                               const LearnOptions& options = {});

}  // namespace demest
