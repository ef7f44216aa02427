#pragma once

#include <Eigen/Core>
#include <vector>

#include "demest/dem.hpp"
#include "demest/moment_estimation.hpp"
#include "demest/report.hpp"
#include "demest/stats.hpp"

namespace demest {

/// Algorithm: rate estimation from parities. Edges are processed in order
/// of decreasing cardinality;
///   psi_S = -(2/2^{|S|}) sum_{B subset S} (-1)^{|B|} omega^_B
///           - sum_{A strict superset of S in the structure} psi_A.
/// Depolarizations are cached and shared across edges. Throws PoleError when
/// a required subset has a smoothed parity mean >= 1/2.
EstimateReport estimate_from_parities(const SyndromeStats& stats, const Dem& structure);

/// Algorithm: structure learning from parities. Frontier hyperedges grow
/// along cliques of the correlation graph; a candidate S is accepted when
/// its aggregated attenuation clears psi_{S+}/(2 sigma_S) >
/// Phi^{-1}(1 - 1/C(n,k+1)). Fits the final structure with
/// estimate_from_parities and prunes insignificant rates.
LearnResult learn_from_parities(const SyndromeStats& stats, const LearnOptions& options);

/// Detector subsets to query and the real-lifted GF(2) design A = Y^T M.
struct ParityQueryMatrix {
  std::vector<DetectorSet> queries;
  Eigen::MatrixXd design;  // queries x edges, entries in {0, 1}
  int rank = 0;
};

ParityQueryMatrix make_query_matrix(const Dem& structure,
                                    std::vector<DetectorSet> queries);

/// Algorithm: least-squares rate estimation from chosen parity queries.
/// Solves A psi = omega^ with a rank-revealing QR. Throws RankError (listing
/// the unresolvable edges) when rank(A) < E. The report carries residual and
/// SNR diagnostics instead of per-edge standard errors.
EstimateReport estimate_lsqr(const SyndromeStats& stats, const Dem& structure,
                             const ParityQueryMatrix& queries);

/// Greedy query design: grows queries whose odd-overlap count approaches
/// 0.797/psi_bar (the depolarization SNR peak) while the design rank climbs
/// toward E. Best effort; inspect the returned rank.
ParityQueryMatrix suggest_queries(const Dem& structure, double psi_bar);

}  // namespace demest
