#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "demest/bits.hpp"

namespace demest {

/// Per-hyperedge estimation result: rate, standard error, attenuation and
/// the provenance of the estimating algorithm.
struct EstimateReport {
  std::vector<DetectorSet> edges;
  Eigen::VectorXd theta;  // estimated excitation rates
  Eigen::VectorXd sigma;  // moment-based standard errors (empty when unavailable)
  Eigen::VectorXd psi;    // estimated attenuations

  std::string algorithm;
  size_t shots = 0;

  bool converged = true;
  bool physical = true;
  int iterations = 0;
  double residual_norm = 0.0;

  // Least-squares diagnostics.
  int design_rank = -1;
  double median_query_snr = 0.0;
  bool low_snr = false;
};

/// Attenuation report from the parity algorithms; same carrier.
using AttenuationReport = EstimateReport;

/// Replaces every negative estimated rate with the estimated standard error
/// of the corresponding moment (a statistically insignificant positive
/// value). Other entries pass through.
EstimateReport floor_negative_rates(EstimateReport report);

}  // namespace demest
