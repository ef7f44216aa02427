#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "demest/dem.hpp"
#include "demest/subset_vector.hpp"
#include "demest/syndromes.hpp"

namespace demest {

/// Dense syndrome distribution of a DEM (n <= 24): every edge contributes
/// its attenuation at its subset index (duplicates merge by summation) and
/// the inverse pipeline recovers the probabilities.
SubsetVector exact_likelihood(const Dem& dem);

/// Pr(x_S = pattern): every hyperedge is projected onto `subset`, projected
/// attenuations are accumulated, and the |subset|-dimensional inverse
/// pipeline is applied. `pattern` bit j refers to the j-th smallest member
/// of `subset`. Cost 2^|subset|.
double marginal_prob(const Dem& dem, const DetectorSet& subset,
                     const std::vector<bool>& pattern);

struct FitScore {
  double kl = 0;             // nats; cross_entropy - entropy
  double cross_entropy = 0;  // nats
  double entropy = 0;        // plug-in empirical entropy, nats
  double stderr_ce = 0;      // standard error of the cross-entropy
  double aic = 0;            // 2 (E - total log-likelihood)
  size_t edge_count = 0;
  size_t shots = 0;
  // Set when an observed syndrome has zero model probability (kl = inf).
  std::optional<uint64_t> zero_probability_syndrome;
};

/// Scores a DEM against syndromes by exact likelihood. Throws on an empty
/// batch; a zero-probability observation yields an infinite-KL report with
/// the offending syndrome recorded.
FitScore kl_score(const SyndromeBatch& eval, const Dem& dem, int threads = 0);

struct ModelSpec {
  enum class Mode { fixed, fit_rates, learn_structure };
  std::string name;
  Dem dem;  // structure (and rates, when fixed)
  Mode mode = Mode::fixed;
  int k_max = 4;  // for learn_structure
};

struct ComparisonRow {
  std::string name;
  FitScore score;
  double delta_aic = 0;
  size_t fitted_edges = 0;
};

/// Fits each model on the training batch as its mode requires (rate fitting
/// and structure learning use the parity algorithms), scores all of them on
/// the evaluation batch, and reports delta-AIC against the best.
std::vector<ComparisonRow> compare_models(const SyndromeBatch& train,
                                          const SyndromeBatch& eval,
                                          const std::vector<ModelSpec>& models,
                                          int threads = 0);

}  // namespace demest
