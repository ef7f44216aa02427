#include "demest/parity_estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <set>

#include "demest/numerics.hpp"
#include "demest/parallel.hpp"

namespace demest {

namespace {

double binomial(double n, double k) {
  if (k < 0 || k > n) return 0;
  return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

double acceptance_threshold(double comparisons) {
  if (comparisons < 2.0) return -std::numeric_limits<double>::infinity();
  return normal_quantile(1.0 - 1.0 / comparisons);
}

/// Fixed processing order and subset bookkeeping for the parity recursion,
/// reusable across replicates and windows.
struct ParityPlan {
  std::vector<size_t> order;  // plan position -> input edge index, |S| decreasing
  std::vector<DetectorSet> subsets;  // distinct non-empty subsets of all edges
  // Per planned edge: (subset id, sign) terms and strict supersets (plan pos).
  std::vector<std::vector<std::pair<size_t, double>>> terms;
  std::vector<std::vector<size_t>> supersets;
  std::vector<double> scale;  // -2 / 2^{|S|}
};

ParityPlan build_parity_plan(const Dem& structure) {
  const size_t E = structure.edge_count();
  ParityPlan plan;
  plan.order.resize(E);
  std::iota(plan.order.begin(), plan.order.end(), 0);
  std::sort(plan.order.begin(), plan.order.end(), [&](size_t a, size_t b) {
    if (structure.edge(a).size() != structure.edge(b).size())
      return structure.edge(a).size() > structure.edge(b).size();
    return linear_extension_less(structure.edge(a), structure.edge(b));
  });

  const int k = structure.max_edge_cardinality();
  if (k > 20)
    throw DimensionError("parity estimation needs 2^k subset sums; max edge "
                         "cardinality " + std::to_string(k) + " is too large");

  std::unordered_map<DetectorSet, size_t, DetectorSetHash> subset_ids;
  plan.terms.resize(E);
  plan.scale.resize(E);
  const uint32_t n = structure.detector_count();
  for (size_t pos = 0; pos < E; ++pos) {
    const DetectorSet& edge = structure.edge(plan.order[pos]);
    const auto& ids = edge.indices();
    const uint32_t m = edge.size();
    plan.scale[pos] = -2.0 / static_cast<double>(uint64_t{1} << m);
    for (uint64_t mask = 1; mask < (uint64_t{1} << m); ++mask) {
      std::vector<uint32_t> members;
      for (uint32_t b = 0; b < m; ++b)
        if ((mask >> b) & 1) members.push_back(ids[b]);
      const double sign = (std::popcount(mask) % 2) ? -1.0 : 1.0;
      DetectorSet subset(std::move(members), n);
      auto [it, inserted] = subset_ids.emplace(subset, plan.subsets.size());
      if (inserted) plan.subsets.push_back(subset);
      plan.terms[pos].push_back({it->second, sign});
    }
  }

  // Strict supersets sit earlier in the plan (greater cardinality).
  std::vector<std::vector<size_t>> incident(n);
  for (size_t pos = 0; pos < E; ++pos)
    for (uint32_t d : structure.edge(plan.order[pos]).indices())
      incident[d].push_back(pos);
  plan.supersets.resize(E);
  for (size_t pos = 0; pos < E; ++pos) {
    const DetectorSet& edge = structure.edge(plan.order[pos]);
    for (size_t other : incident[edge.indices()[0]]) {
      if (other == pos) continue;
      const DetectorSet& cand = structure.edge(plan.order[other]);
      if (cand.size() > edge.size() && edge.is_subset_of(cand))
        plan.supersets[pos].push_back(other);
    }
  }
  return plan;
}

/// psi per planned edge given depolarizations per plan subset.
Eigen::VectorXd run_parity_recursion(const ParityPlan& plan,
                                     const Eigen::VectorXd& omega) {
  Eigen::VectorXd psi(static_cast<Eigen::Index>(plan.order.size()));
  for (size_t pos = 0; pos < plan.order.size(); ++pos) {
    double acc = 0;
    for (const auto& [subset_id, sign] : plan.terms[pos])
      acc += sign * omega[static_cast<Eigen::Index>(subset_id)];
    acc *= plan.scale[pos];
    for (size_t sup : plan.supersets[pos]) acc -= psi[static_cast<Eigen::Index>(sup)];
    psi[static_cast<Eigen::Index>(pos)] = acc;
  }
  return psi;
}

Eigen::VectorXd moment_sigmas(const SyndromeStats& stats, const Dem& structure) {
  Eigen::VectorXd sigma(static_cast<Eigen::Index>(structure.edge_count()));
  for (size_t e = 0; e < structure.edge_count(); ++e)
    sigma[static_cast<Eigen::Index>(e)] = stats.moment(structure.edge(e)).sigma;
  return sigma;
}

}  // namespace

EstimateReport estimate_from_parities(const SyndromeStats& stats, const Dem& structure) {
  const size_t E = structure.edge_count();
  EstimateReport report;
  report.algorithm = "parities";
  report.shots = stats.shot_count();
  report.edges = structure.edges();
  if (E == 0) return report;

  ParityPlan plan = build_parity_plan(structure);
  Eigen::VectorXd omega(static_cast<Eigen::Index>(plan.subsets.size()));
  // Parallel warm-up of the shared parity-count cache; counts are integers,
  // so the result does not depend on scheduling.
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(plan.subsets.size(), stats.threads(), [&](size_t i) {
    try {
      omega[static_cast<Eigen::Index>(i)] =
          stats.depolarization(plan.subsets[i]).omega_hat;
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  Eigen::VectorXd psi_planned = run_parity_recursion(plan, omega);

  report.theta.resize(static_cast<Eigen::Index>(E));
  report.psi.resize(static_cast<Eigen::Index>(E));
  for (size_t pos = 0; pos < E; ++pos) {
    const auto dst = static_cast<Eigen::Index>(plan.order[pos]);
    report.psi[dst] = psi_planned[static_cast<Eigen::Index>(pos)];
    report.theta[dst] = 0.5 * (1.0 - std::exp(-report.psi[dst]));
  }
  report.sigma = moment_sigmas(stats, structure);
  report.physical = true;
  for (Eigen::Index i = 0; i < report.theta.size(); ++i)
    if (report.theta[i] < 0.0 || report.theta[i] >= 0.5) report.physical = false;
  return report;
}

LearnResult learn_from_parities(const SyndromeStats& stats, const LearnOptions& options) {
  const uint32_t n = stats.detector_count();
  std::vector<DetectorSet> seeds = options.seeds;
  if (seeds.empty())
    for (uint32_t i = 0; i < n; ++i) seeds.emplace_back(DetectorSet({i}, n));
  for (const auto& s : seeds)
    if (s.size() != seeds.front().size())
      throw DomainError("seed hyperedges must share one cardinality");

  LearnResult result;
  result.graph = correlation_graph(stats);

  auto set_order = [](const DetectorSet& a, const DetectorSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.indices() < b.indices();
  };
  std::set<DetectorSet, decltype(set_order)> working(set_order);
  working.insert(seeds.begin(), seeds.end());
  std::vector<DetectorSet> frontier = seeds;
  int k = static_cast<int>(seeds.front().size());

  while (k < options.k_max) {
    std::set<DetectorSet, decltype(set_order)> candidates(set_order);
    for (const auto& s : frontier) {
      for (uint32_t i = 0; i < n; ++i) {
        if (s.contains(i)) continue;
        bool clique = true;
        for (uint32_t j : s.indices())
          if (!result.graph.has_edge(i, j)) {
            clique = false;
            break;
          }
        if (clique) candidates.insert(set_union(s, DetectorSet({i}, n)));
      }
    }
    if (candidates.empty()) break;

    const double threshold = acceptance_threshold(binomial(n, k + 1));
    std::vector<DetectorSet> candidate_list(candidates.begin(), candidates.end());
    std::vector<char> keep(candidate_list.size(), 0);
    parallel_for(candidate_list.size(), stats.threads(), [&](size_t c) {
      const DetectorSet& cand = candidate_list[c];
      const auto& ids = cand.indices();
      const uint32_t m = cand.size();
      double acc = 0;
      try {
        for (uint64_t mask = 1; mask < (uint64_t{1} << m); ++mask) {
          std::vector<uint32_t> members;
          for (uint32_t b = 0; b < m; ++b)
            if ((mask >> b) & 1) members.push_back(ids[b]);
          const double sign = (std::popcount(mask) % 2) ? -1.0 : 1.0;
          acc += sign * stats.depolarization(DetectorSet(std::move(members), n)).omega_hat;
        }
      } catch (const PoleError&) {
        return;  // no usable significance statement for this candidate
      }
      const double psi_plus = acc * (-2.0 / static_cast<double>(uint64_t{1} << m));
      const double sigma = stats.moment(cand).sigma;
      keep[c] = psi_plus / (2.0 * sigma) > threshold ? 1 : 0;
    });
    std::vector<DetectorSet> accepted;
    for (size_t c = 0; c < candidate_list.size(); ++c)
      if (keep[c]) accepted.push_back(candidate_list[c]);
    if (accepted.empty()) break;

    for (const auto& e : accepted) working.insert(e);
    frontier = std::move(accepted);
    ++k;
  }

  Dem model(n);
  for (const auto& e : working) model.add_edge(e, 0.0);
  EstimateReport fitted = estimate_from_parities(stats, model);

  const double prune = acceptance_threshold(static_cast<double>(fitted.edges.size()));
  Dem pruned(n);
  EstimateReport final_report;
  final_report.algorithm = fitted.algorithm;
  final_report.shots = fitted.shots;
  std::vector<Eigen::Index> kept;
  for (size_t e = 0; e < fitted.edges.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    if (fitted.theta[i] / fitted.sigma[i] >= prune) {
      pruned.add_edge(fitted.edges[e], std::max(fitted.theta[i], 0.0));
      kept.push_back(i);
    }
  }
  final_report.edges.reserve(kept.size());
  final_report.theta.resize(static_cast<Eigen::Index>(kept.size()));
  final_report.sigma.resize(static_cast<Eigen::Index>(kept.size()));
  final_report.psi.resize(static_cast<Eigen::Index>(kept.size()));
  for (size_t out = 0; out < kept.size(); ++out) {
    final_report.edges.push_back(fitted.edges[static_cast<size_t>(kept[out])]);
    final_report.theta[static_cast<Eigen::Index>(out)] = fitted.theta[kept[out]];
    final_report.sigma[static_cast<Eigen::Index>(out)] = fitted.sigma[kept[out]];
    final_report.psi[static_cast<Eigen::Index>(out)] = fitted.psi[kept[out]];
  }
  final_report.physical = true;
  for (Eigen::Index i = 0; i < final_report.theta.size(); ++i)
    if (final_report.theta[i] < 0.0 || final_report.theta[i] >= 0.5)
      final_report.physical = false;

  result.structure = std::move(pruned);
  result.report = std::move(final_report);
  return result;
}

ParityQueryMatrix make_query_matrix(const Dem& structure,
                                    std::vector<DetectorSet> queries) {
  ParityQueryMatrix qm;
  qm.design.resize(static_cast<Eigen::Index>(queries.size()),
                   static_cast<Eigen::Index>(structure.edge_count()));
  for (size_t q = 0; q < queries.size(); ++q)
    for (size_t e = 0; e < structure.edge_count(); ++e)
      qm.design(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(e)) =
          bitdot(queries[q], structure.edge(e));
  qm.queries = std::move(queries);
  qm.rank = qm.design.size() == 0
                ? 0
                : static_cast<int>(
                      Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(qm.design).rank());
  return qm;
}

EstimateReport estimate_lsqr(const SyndromeStats& stats, const Dem& structure,
                             const ParityQueryMatrix& queries) {
  const size_t E = structure.edge_count();
  EstimateReport report;
  report.algorithm = "lsqr";
  report.shots = stats.shot_count();
  report.edges = structure.edges();
  if (E == 0) return report;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(queries.design);
  const int rank = static_cast<int>(qr.rank());
  if (rank < static_cast<int>(E)) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(queries.design);
    Eigen::MatrixXd kernel = lu.kernel();
    std::string edges_text;
    for (size_t e = 0; e < E; ++e) {
      if (kernel.row(static_cast<Eigen::Index>(e)).norm() > 1e-9) {
        if (!edges_text.empty()) edges_text += ", ";
        edges_text += structure.edge(e).str();
      }
    }
    throw RankError("query design has rank " + std::to_string(rank) + " < " +
                    std::to_string(E) + "; unresolvable edge directions: " +
                    edges_text);
  }

  Eigen::VectorXd omega(static_cast<Eigen::Index>(queries.queries.size()));
  Eigen::VectorXd query_snr(omega.size());
  for (size_t q = 0; q < queries.queries.size(); ++q) {
    const auto i = static_cast<Eigen::Index>(q);
    omega[i] = stats.depolarization(queries.queries[q]).omega_hat;
    query_snr[i] = omega[i] > 0
                       ? snr(omega[i], static_cast<double>(stats.shot_count()))
                       : 0.0;
  }

  Eigen::VectorXd psi = qr.solve(omega);
  report.psi = psi;
  report.theta = 0.5 * (1.0 - (-psi.array()).exp());
  report.design_rank = rank;
  report.residual_norm = (queries.design * psi - omega).norm();
  std::vector<double> snrs(query_snr.data(), query_snr.data() + query_snr.size());
  std::nth_element(snrs.begin(), snrs.begin() + snrs.size() / 2, snrs.end());
  report.median_query_snr = snrs[snrs.size() / 2];
  report.low_snr = report.median_query_snr < 10.0;
  report.physical = true;
  for (Eigen::Index i = 0; i < report.theta.size(); ++i)
    if (report.theta[i] < 0.0 || report.theta[i] >= 0.5) report.physical = false;
  return report;
}

namespace {

int odd_overlap_count(const Dem& structure, const DetectorSet& query) {
  int u = 0;
  for (size_t e = 0; e < structure.edge_count(); ++e)
    u += bitdot(query, structure.edge(e));
  return u;
}

}  // namespace

ParityQueryMatrix suggest_queries(const Dem& structure, double psi_bar) {
  if (psi_bar <= 0) throw DomainError("suggest_queries needs psi_bar > 0");
  const uint32_t n = structure.detector_count();
  const size_t E = structure.edge_count();
  const int target =
      std::max(1, static_cast<int>(std::lround(0.797 / psi_bar)));

  // Candidate pool: grow one query from each detector of each edge, adding
  // detectors while that moves the odd-overlap count toward the target.
  std::vector<DetectorSet> pool;
  std::set<std::vector<uint32_t>> seen;
  for (size_t e = 0; e < E; ++e) {
    for (uint32_t d0 : structure.edge(e).indices()) {
      DetectorSet query({d0}, n);
      int u = odd_overlap_count(structure, query);
      while (u < target) {
        int best_u = u;
        uint32_t best_d = n;
        for (uint32_t d = 0; d < n; ++d) {
          if (query.contains(d)) continue;
          const int cand_u =
              odd_overlap_count(structure, set_union(query, DetectorSet({d}, n)));
          if (cand_u > best_u && cand_u <= target) {
            best_u = cand_u;
            best_d = d;
          }
        }
        if (best_d == n) break;
        query = set_union(query, DetectorSet({best_d}, n));
        u = best_u;
      }
      if (seen.insert(query.indices()).second) pool.push_back(std::move(query));
    }
  }

  // Greedy rank growth: append any candidate that raises the design rank.
  ParityQueryMatrix qm;
  qm.design.resize(0, static_cast<Eigen::Index>(E));
  Eigen::MatrixXd rows(pool.size(), E);
  std::vector<DetectorSet> chosen;
  int rank = 0;
  for (const auto& query : pool) {
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(E));
    for (size_t e = 0; e < E; ++e)
      row[static_cast<Eigen::Index>(e)] = bitdot(query, structure.edge(e));
    Eigen::MatrixXd trial(chosen.size() + 1, E);
    for (size_t i = 0; i < chosen.size(); ++i)
      trial.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(i));
    trial.row(static_cast<Eigen::Index>(chosen.size())) = row;
    const int new_rank = static_cast<int>(
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(trial).rank());
    if (new_rank > rank) {
      rows.row(static_cast<Eigen::Index>(chosen.size())) = row;
      chosen.push_back(query);
      rank = new_rank;
      if (rank == static_cast<int>(E)) break;
    }
  }
  qm.queries = std::move(chosen);
  qm.design = rows.topRows(static_cast<Eigen::Index>(qm.queries.size()));
  qm.rank = rank;
  return qm;
}

Eigen::VectorXd rate_variance(const SyndromeStats& stats, const Dem& structure,
                              VarianceMethod method, const JackknifeOptions& jk) {
  const size_t E = structure.edge_count();
  Eigen::VectorXd var(static_cast<Eigen::Index>(E));
  const double N = static_cast<double>(stats.shot_count());

  switch (method) {
    case VarianceMethod::moment: {
      for (size_t e = 0; e < E; ++e) {
        const double s = stats.moment(structure.edge(e)).sigma;
        var[static_cast<Eigen::Index>(e)] = s * s;
      }
      return var;
    }
    case VarianceMethod::heuristic: {
      for (size_t e = 0; e < E; ++e) {
        const DetectorSet& edge = structure.edge(e);
        const double pi = stats.polarization_hat(edge);
        if (pi <= 0)
          throw PoleError("heuristic variance needs positive polarization for " +
                              edge.str(),
                          edge.size() <= 63
                              ? static_cast<long long>(edge.subset_index())
                              : -1);
        const double var_omega = (1.0 - pi * pi) / (pi * pi);
        const double var_psi =
            var_omega / N / std::pow(4.0, static_cast<double>(edge.size()));
        var[static_cast<Eigen::Index>(e)] = 0.25 * var_psi;
      }
      return var;
    }
    case VarianceMethod::jackknife: {
      if (jk.replicates > stats.shot_count())
        throw DomainError("jackknife replicates exceed the shot count");
      ParityPlan plan = build_parity_plan(structure);
      const size_t S = plan.subsets.size();
      Eigen::VectorXd base_counts(static_cast<Eigen::Index>(S));
      for (size_t i = 0; i < S; ++i)
        base_counts[static_cast<Eigen::Index>(i)] =
            static_cast<double>(stats.parity_count(plan.subsets[i]));

      // Replicate shots drawn without replacement; R = N visits every shot.
      const size_t total = stats.shot_count();
      std::vector<size_t> shot_ids(total);
      std::iota(shot_ids.begin(), shot_ids.end(), 0);
      std::mt19937_64 rng(jk.seed);
      for (size_t i = 0; i < jk.replicates; ++i) {
        std::uniform_int_distribution<size_t> pick(i, total - 1);
        std::swap(shot_ids[i], shot_ids[pick(rng)]);
      }

      Eigen::MatrixXd replicate_theta(static_cast<Eigen::Index>(jk.replicates),
                                      static_cast<Eigen::Index>(E));
      const SyndromeBatch& batch = stats.batch();
      std::exception_ptr failure;
      std::mutex failure_mutex;
      parallel_for(jk.replicates, stats.threads(), [&](size_t r) {
        try {
          const size_t omit = shot_ids[r];
          Eigen::VectorXd omega(static_cast<Eigen::Index>(S));
          for (size_t i = 0; i < S; ++i) {
            int parity = 0;
            for (uint32_t d : plan.subsets[i].indices())
              parity ^= batch.bit(omit, d) ? 1 : 0;
            const double count = base_counts[static_cast<Eigen::Index>(i)] - parity;
            const double q = (1.0 + count) / (N - 1.0 + 2.0);
            if (q >= 0.5)
              throw PoleError("jackknife replicate hit a parity pole", -1);
            omega[static_cast<Eigen::Index>(i)] = -std::log1p(-2.0 * q);
          }
          Eigen::VectorXd psi = run_parity_recursion(plan, omega);
          for (size_t pos = 0; pos < E; ++pos)
            replicate_theta(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(plan.order[pos])) =
                0.5 * (1.0 - std::exp(-psi[static_cast<Eigen::Index>(pos)]));
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
      if (failure) std::rethrow_exception(failure);

      const Eigen::RowVectorXd mean = replicate_theta.colwise().mean();
      for (Eigen::Index e = 0; e < static_cast<Eigen::Index>(E); ++e) {
        const double ss = (replicate_theta.col(e).array() - mean[e]).square().sum();
        var[e] = (N - 1.0) / static_cast<double>(jk.replicates) * ss;
      }
      return var;
    }
  }
  throw DomainError("unknown variance method");
}

}  // namespace demest
