#include "demest/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "demest/numerics.hpp"
#include "demest/parallel.hpp"
#include "demest/parity_estimation.hpp"
#include "demest/transforms.hpp"

namespace demest {

namespace {

/// Dense attenuation vector of a DEM, entries indexed by subset integer.
Eigen::VectorXd densify_attenuations(const Dem& dem) {
  const uint32_t n = dem.detector_count();
  if (n > static_cast<uint32_t>(kMaxDenseDetectors))
    throw DimensionError("exact likelihood capped at n <= " +
                         std::to_string(kMaxDenseDetectors) + ", got n=" +
                         std::to_string(n));
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
  for (size_t e = 0; e < dem.edge_count(); ++e) {
    const double theta = dem.rate(e);
    if (theta >= 0.5)
      throw DomainError("edge " + dem.edge(e).str() + " has rate >= 1/2");
    psi[static_cast<Eigen::Index>(dem.edge(e).subset_index())] +=
        -std::log1p(-2.0 * theta);
  }
  return psi;
}

}  // namespace

SubsetVector exact_likelihood(const Dem& dem) {
  Eigen::VectorXd p = probs_from_attenuations(densify_attenuations(dem));
  // Tiny negative round-off from the Hadamard pipeline is clamped before
  // the probability-kind validation.
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] < 0 && p[i] > -1e-12) p[i] = 0.0;
  return SubsetVector(std::move(p), SubsetKind::probability);
}

double marginal_prob(const Dem& dem, const DetectorSet& subset,
                     const std::vector<bool>& pattern) {
  const uint32_t m = subset.size();
  if (pattern.size() != m)
    throw DimensionError("pattern length must equal the subset size");
  if (m > static_cast<uint32_t>(kMaxDenseDetectors))
    throw DimensionError("marginal subsets capped at " +
                         std::to_string(kMaxDenseDetectors) + " detectors");

  // Position of each subset member for projecting edges.
  std::unordered_map<uint32_t, uint32_t> position;
  for (uint32_t j = 0; j < m; ++j) position.emplace(subset.indices()[j], j);

  Eigen::VectorXd psi_star = Eigen::VectorXd::Zero(Eigen::Index{1} << m);
  for (size_t e = 0; e < dem.edge_count(); ++e) {
    const double theta = dem.rate(e);
    if (theta >= 0.5)
      throw DomainError("edge " + dem.edge(e).str() + " has rate >= 1/2");
    uint64_t projected = 0;
    for (uint32_t d : dem.edge(e).indices()) {
      auto it = position.find(d);
      if (it != position.end()) projected |= uint64_t{1} << it->second;
    }
    if (projected != 0)
      psi_star[static_cast<Eigen::Index>(projected)] += -std::log1p(-2.0 * theta);
  }

  Eigen::VectorXd p = probs_from_attenuations(std::move(psi_star));
  uint64_t index = 0;
  for (uint32_t j = 0; j < m; ++j)
    if (pattern[j]) index |= uint64_t{1} << j;
  return p[static_cast<Eigen::Index>(index)];
}

FitScore kl_score(const SyndromeBatch& eval, const Dem& dem, int threads) {
  if (eval.shot_count() == 0)
    throw DomainError("kl_score needs a non-empty batch (entropy undefined)");
  if (eval.detector_count() != dem.detector_count())
    throw DimensionError("batch and DEM detector counts differ");

  const SubsetVector likelihood = exact_likelihood(dem);
  const Eigen::VectorXd& p = likelihood.values;
  const size_t N = eval.shot_count();

  FitScore score;
  score.shots = N;
  score.edge_count = dem.edge_count();

  // One table lookup per shot; per-block partials keep float sums
  // independent of the thread partitioning.
  const size_t block_size = 1 << 16;
  const size_t blocks = (N + block_size - 1) / block_size;
  std::vector<double> block_sum(blocks, 0.0), block_sumsq(blocks, 0.0);
  std::vector<uint64_t> block_zero(blocks, std::numeric_limits<uint64_t>::max());
  parallel_for(blocks, threads, [&](size_t b) {
    const size_t begin = b * block_size;
    const size_t end = std::min(N, begin + block_size);
    double acc = 0, acc2 = 0;
    for (size_t s = begin; s < end; ++s) {
      const uint64_t idx = eval.shot_index(s);
      const double prob = p[static_cast<Eigen::Index>(idx)];
      if (prob <= 0.0) {
        block_zero[b] = std::min(block_zero[b], idx);
        continue;
      }
      const double ll = std::log(prob);
      acc += ll;
      acc2 += ll * ll;
    }
    block_sum[b] = acc;
    block_sumsq[b] = acc2;
  });

  for (size_t b = 0; b < blocks; ++b)
    if (block_zero[b] != std::numeric_limits<uint64_t>::max()) {
      score.zero_probability_syndrome = block_zero[b];
      score.kl = std::numeric_limits<double>::infinity();
      score.cross_entropy = std::numeric_limits<double>::infinity();
      score.aic = std::numeric_limits<double>::infinity();
      return score;
    }

  const double total_ll = pairwise_sum(block_sum.data(), blocks);
  const double total_ll2 = pairwise_sum(block_sumsq.data(), blocks);
  const double n_shots = static_cast<double>(N);
  score.cross_entropy = -total_ll / n_shots;
  const double var_ll =
      std::max(0.0, total_ll2 / n_shots - (total_ll / n_shots) * (total_ll / n_shots));
  score.stderr_ce = std::sqrt(var_ll / n_shots);

  // Plug-in empirical entropy from syndrome frequencies.
  std::unordered_map<uint64_t, size_t> freq;
  for (size_t s = 0; s < N; ++s) ++freq[eval.shot_index(s)];
  double entropy = 0;
  for (const auto& [idx, count] : freq) {
    const double f = static_cast<double>(count) / n_shots;
    entropy -= f * std::log(f);
  }
  score.entropy = entropy;
  score.kl = score.cross_entropy - entropy;
  score.aic = 2.0 * (static_cast<double>(dem.edge_count()) - total_ll);
  return score;
}

std::vector<ComparisonRow> compare_models(const SyndromeBatch& train,
                                          const SyndromeBatch& eval,
                                          const std::vector<ModelSpec>& models,
                                          int threads) {
  std::vector<ComparisonRow> rows;
  std::optional<SyndromeStats> train_stats;
  auto stats = [&]() -> SyndromeStats& {
    if (!train_stats) train_stats.emplace(train, threads);
    return *train_stats;
  };

  for (const auto& model : models) {
    ComparisonRow row;
    row.name = model.name;
    Dem scored = model.dem;
    switch (model.mode) {
      case ModelSpec::Mode::fixed:
        break;
      case ModelSpec::Mode::fit_rates: {
        EstimateReport fit =
            floor_negative_rates(estimate_from_parities(stats(), model.dem));
        Dem refit(model.dem.detector_count());
        refit.coords = model.dem.coords;
        for (size_t e = 0; e < fit.edges.size(); ++e)
          refit.add_edge(fit.edges[e], fit.theta[static_cast<Eigen::Index>(e)]);
        scored = std::move(refit);
        break;
      }
      case ModelSpec::Mode::learn_structure: {
        LearnOptions opt;
        opt.k_max = model.k_max;
        LearnResult learned = learn_from_parities(stats(), opt);
        scored = std::move(learned.structure);
        break;
      }
    }
    row.fitted_edges = scored.edge_count();
    row.score = kl_score(eval, scored, threads);
    rows.push_back(std::move(row));
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) best = std::min(best, r.score.aic);
  for (auto& r : rows) r.delta_aic = r.score.aic - best;
  return rows;
}

}  // namespace demest
