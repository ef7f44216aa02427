#include "demest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "demest/numerics.hpp"
#include "demest/parallel.hpp"

namespace demest {

bool CorrelationGraph::has_edge(uint32_t a, uint32_t b) const {
  if (a > b) std::swap(a, b);
  const uint64_t key = (uint64_t{a} << 32) | b;
  return std::binary_search(lookup_.begin(), lookup_.end(), key);
}

void CorrelationGraph::build_lookup() {
  lookup_.clear();
  lookup_.reserve(pairs.size());
  for (const auto& p : pairs) {
    uint32_t a = p.i, b = p.j;
    if (a > b) std::swap(a, b);
    lookup_.push_back((uint64_t{a} << 32) | b);
  }
  std::sort(lookup_.begin(), lookup_.end());
}

SyndromeStats::SyndromeStats(const SyndromeBatch& batch, int threads)
    : batch_(batch),
      columns_(batch, threads),
      threads_(resolve_threads(threads)) {}

size_t SyndromeStats::moment_count(const DetectorSet& subset) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = moment_cache_.find(subset);
    if (it != moment_cache_.end()) return it->second;
  }
  const size_t count = columns_.count_all_set(subset.indices());
  std::lock_guard<std::mutex> lock(mutex_);
  moment_cache_.emplace(subset, count);
  return count;
}

size_t SyndromeStats::parity_count(const DetectorSet& subset) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = parity_cache_.find(subset);
    if (it != parity_cache_.end()) return it->second;
  }
  const size_t count = columns_.count_odd_parity(subset.indices());
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = parity_cache_.emplace(subset, count);
  if (inserted) ++parity_evals_;
  return count;
}

MomentEstimate SyndromeStats::moment(const DetectorSet& subset) const {
  if (subset.empty()) throw DomainError("moment of the empty subset is not defined");
  MomentEstimate est;
  est.subset = subset;
  est.shots = shot_count();
  const double N = static_cast<double>(est.shots);
  est.mu_hat = (1.0 + static_cast<double>(moment_count(subset))) / (N + 2.0);
  est.sigma = N > 0 ? std::sqrt(est.mu_hat * (1.0 - est.mu_hat) / N)
                    : std::numeric_limits<double>::infinity();
  return est;
}

Depolarization SyndromeStats::depolarization(const DetectorSet& subset) const {
  if (subset.empty()) return {0.0, 0.0};
  const double N = static_cast<double>(shot_count());
  const double q = (1.0 + static_cast<double>(parity_count(subset))) / (N + 2.0);
  if (q >= 0.5)
    throw PoleError("smoothed parity mean of subset " + subset.str() +
                        " is >= 1/2; depolarization undefined",
                    subset.size() <= 63 ? static_cast<long long>(subset.subset_index())
                                        : -1);
  Depolarization d;
  d.omega_hat = -std::log1p(-2.0 * q);
  d.sigma = N > 0 ? std::sqrt(std::expm1(2.0 * d.omega_hat) / N)
                  : std::numeric_limits<double>::infinity();
  return d;
}

double SyndromeStats::polarization_hat(const DetectorSet& subset) const {
  if (subset.empty()) return 1.0;
  const double N = static_cast<double>(shot_count());
  return 1.0 - 2.0 * (1.0 + static_cast<double>(parity_count(subset))) / (N + 2.0);
}

PairCorrelation pairwise_theta(const SyndromeStats& stats, uint32_t i, uint32_t j) {
  if (i == j) throw DomainError("pairwise_theta needs two distinct detectors");
  const uint32_t n = stats.detector_count();
  const double N = static_cast<double>(stats.shot_count());
  const double mu_i = stats.moment(DetectorSet({i}, n)).mu_hat;
  const double mu_j = stats.moment(DetectorSet({j}, n)).mu_hat;
  const long long pair_index =
      (i < 63 && j < 63)
          ? static_cast<long long>((uint64_t{1} << i) | (uint64_t{1} << j))
          : -1;
  if (mu_i >= 0.5 || mu_j >= 0.5)
    throw PoleError("pairwise rate undefined: a marginal moment of (" +
                        std::to_string(i) + "," + std::to_string(j) +
                        ") reaches 1/2",
                    pair_index);
  const double mu_ij = stats.moment(DetectorSet({i, j}, n)).mu_hat;
  const double denom = 1.0 - 2.0 * (mu_i + mu_j - 2.0 * mu_ij);
  if (denom <= 0.0)
    throw PoleError("pairwise rate undefined: correlation denominator <= 0 for (" +
                        std::to_string(i) + "," + std::to_string(j) + ")",
                    pair_index);

  PairCorrelation pc;
  pc.i = i;
  pc.j = j;
  pc.theta = 0.5 - 0.5 * std::sqrt((1.0 - 2.0 * mu_i) * (1.0 - 2.0 * mu_j) / denom);
  const double q = mu_i * mu_j * (1.0 - mu_i) * (1.0 - mu_j) /
                   ((1.0 - 2.0 * mu_i) * (1.0 - 2.0 * mu_i) * (1.0 - 2.0 * mu_j) *
                    (1.0 - 2.0 * mu_j));
  pc.sigma = std::sqrt((pc.theta * (1.0 - pc.theta) + q) / N);
  pc.z = pc.theta / pc.sigma;
  return pc;
}

CorrelationGraph correlation_graph(const SyndromeStats& stats) {
  const uint32_t n = stats.detector_count();
  CorrelationGraph graph;
  graph.detector_count = n;
  const double npairs = 0.5 * static_cast<double>(n) * (n - 1);
  graph.threshold = npairs >= 2.0
                        ? normal_quantile(1.0 - 1.0 / npairs)
                        : -std::numeric_limits<double>::infinity();

  std::vector<std::vector<PairCorrelation>> per_row(n);
  parallel_for(n, stats.threads(), [&](size_t i) {
    for (uint32_t j = static_cast<uint32_t>(i) + 1; j < n; ++j) {
      PairCorrelation pc;
      try {
        pc = pairwise_theta(stats, static_cast<uint32_t>(i), j);
      } catch (const PoleError&) {
        continue;  // a pole means no usable significance statement
      }
      if (pc.z > graph.threshold) per_row[i].push_back(pc);
    }
  });
  for (auto& row : per_row)
    graph.pairs.insert(graph.pairs.end(), row.begin(), row.end());
  graph.build_lookup();
  return graph;
}

double snr(double omega, double shots) {
  if (omega <= 0.0) throw DomainError("snr needs omega > 0");
  return shots * omega * omega / std::expm1(2.0 * omega);
}

}  // namespace demest
