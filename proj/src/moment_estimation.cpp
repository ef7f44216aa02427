#include "demest/moment_estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "demest/gf2.hpp"
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

void enumerate_combinations(int total, int max_size,
                            const std::function<void(const std::vector<uint32_t>&)>& emit) {
  std::vector<uint32_t> combo;
  emit(combo);  // the empty selection
  std::function<void(int, int)> rec = [&](int start, int remaining) {
    if (remaining == 0) return;
    for (int c = start; c < total; ++c) {
      combo.push_back(static_cast<uint32_t>(c));
      emit(combo);
      rec(c + 1, remaining - 1);
      combo.pop_back();
    }
  };
  rec(0, max_size);
}

}  // namespace

ReducedSystem build_reduced_system(const Dem& structure, const DetectorSet& target,
                                   int max_free_weight) {
  if (target.empty()) throw DomainError("reduced system needs a non-empty target");
  if (target.size() > 63)
    throw DimensionError("reduced systems support targets up to 63 detectors");

  ReducedSystem sys;
  sys.target = target;
  sys.max_free_weight = max_free_weight;
  for (size_t e = 0; e < structure.edge_count(); ++e)
    if (intersects(structure.edge(e), target)) sys.neighborhood.push_back(e);
  std::sort(sys.neighborhood.begin(), sys.neighborhood.end(), [&](size_t a, size_t b) {
    return linear_extension_less(structure.edge(a), structure.edge(b));
  });

  const size_t rows = target.size();
  const size_t cols = sys.neighborhood.size();
  if (cols == 0) {
    sys.consistent = false;
    return sys;
  }

  BitMatrix m(rows, cols + 1);
  for (size_t r = 0; r < rows; ++r) {
    const uint32_t det = target.indices()[r];
    for (size_t c = 0; c < cols; ++c)
      if (structure.edge(sys.neighborhood[c]).contains(det)) m.set(r, c);
    m.set(r, cols);  // the all-ones right-hand side
  }
  Gf2Reduction red = gf2_row_reduce(m);
  sys.rank = static_cast<int>(red.pivot_cols.size());
  sys.free_count = static_cast<int>(red.free_cols.size());
  sys.consistent = red.consistent;
  if (!sys.consistent) return sys;

  // Dependent bits as masks over pivot rows: e_d = F e_f + y.
  std::vector<uint64_t> free_masks(red.free_cols.size(), 0);
  uint64_t particular = 0;
  for (size_t r = 0; r < red.pivot_cols.size(); ++r) {
    if (m.get(r, cols)) particular |= uint64_t{1} << r;
    for (size_t f = 0; f < red.free_cols.size(); ++f)
      if (m.get(r, red.free_cols[f])) free_masks[f] |= uint64_t{1} << r;
  }

  enumerate_combinations(
      static_cast<int>(red.free_cols.size()), max_free_weight,
      [&](const std::vector<uint32_t>& combo) {
        uint64_t dependent = particular;
        for (uint32_t f : combo) dependent ^= free_masks[f];
        std::vector<uint32_t> fired;
        for (size_t r = 0; r < red.pivot_cols.size(); ++r)
          if ((dependent >> r) & 1)
            fired.push_back(static_cast<uint32_t>(red.pivot_cols[r]));
        for (uint32_t f : combo)
          fired.push_back(static_cast<uint32_t>(red.free_cols[f]));
        std::sort(fired.begin(), fired.end());
        sys.excitations.push_back(std::move(fired));
      });
  return sys;
}

double approx_moment(const ReducedSystem& sys, const Eigen::VectorXd& theta) {
  if (!sys.consistent || sys.excitations.empty()) return 0.0;
  double base = 1.0;
  for (size_t c = 0; c < sys.neighborhood.size(); ++c)
    base *= 1.0 - theta[static_cast<Eigen::Index>(sys.neighborhood[c])];
  double total = 0.0;
  for (const auto& exc : sys.excitations) {
    double term = base;
    for (uint32_t pos : exc) {
      const double t = theta[static_cast<Eigen::Index>(sys.neighborhood[pos])];
      term *= t / (1.0 - t);
    }
    total += term;
  }
  return total;
}

namespace {

struct MomentFitWorkspace {
  std::vector<ReducedSystem> systems;          // one per edge
  std::vector<std::vector<uint32_t>> affected; // parameter -> targets it enters
  Eigen::VectorXd mu_hat, sigma;
};

MomentFitWorkspace prepare_moment_fit(const SyndromeStats& stats,
                                      const Dem& structure, int w) {
  MomentFitWorkspace ws;
  const size_t E = structure.edge_count();
  ws.systems.resize(E);
  ws.mu_hat.resize(static_cast<Eigen::Index>(E));
  ws.sigma.resize(static_cast<Eigen::Index>(E));
  // Counting passes go through the shared cache; do those serially first so
  // the parallel system builds stay pure.
  for (size_t e = 0; e < E; ++e) {
    MomentEstimate est = stats.moment(structure.edge(e));
    ws.mu_hat[static_cast<Eigen::Index>(e)] = est.mu_hat;
    ws.sigma[static_cast<Eigen::Index>(e)] = est.sigma;
  }
  parallel_for(E, stats.threads(), [&](size_t e) {
    ws.systems[e] = build_reduced_system(structure, structure.edge(e), w);
  });
  ws.affected.resize(E);
  for (size_t s = 0; s < E; ++s)
    for (size_t param : ws.systems[s].neighborhood)
      ws.affected[param].push_back(static_cast<uint32_t>(s));
  return ws;
}

Eigen::VectorXd residuals(const MomentFitWorkspace& ws, const Eigen::VectorXd& theta,
                          int threads) {
  Eigen::VectorXd r(ws.mu_hat.size());
  parallel_for(static_cast<size_t>(r.size()), threads, [&](size_t e) {
    const auto i = static_cast<Eigen::Index>(e);
    r[i] = (approx_moment(ws.systems[e], theta) - ws.mu_hat[i]) / ws.sigma[i];
  });
  return r;
}

}  // namespace

EstimateReport estimate_from_moments(const SyndromeStats& stats,
                                     const Dem& structure,
                                     const MomentFitOptions& options) {
  const size_t E = structure.edge_count();
  EstimateReport report;
  report.algorithm = "moments(w=" + std::to_string(options.max_free_weight) + ")";
  report.shots = stats.shot_count();
  report.edges = structure.edges();
  if (E == 0) return report;

  MomentFitWorkspace ws =
      prepare_moment_fit(stats, structure, options.max_free_weight);

  const double lo = options.clip_lo;
  const double hi = 0.5 - options.clip_lo;
  auto clip = [&](Eigen::VectorXd v) {
    return v.cwiseMax(lo).cwiseMin(hi).eval();
  };

  Eigen::VectorXd theta = clip(ws.mu_hat);
  Eigen::VectorXd unclipped = theta;
  Eigen::VectorXd r = residuals(ws, theta, stats.threads());
  double rnorm = r.norm();
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(E), static_cast<Eigen::Index>(E));
  for (; iter < options.max_iterations; ++iter) {
    // Forward-difference Jacobian, column by column; each parameter only
    // moves the targets whose neighborhood contains it.
    jac.setZero();
    parallel_for(E, stats.threads(), [&](size_t j) {
      const auto col = static_cast<Eigen::Index>(j);
      double h = options.derivative_step;
      Eigen::VectorXd bumped = theta;
      if (theta[col] + h > hi) h = -h;
      bumped[col] += h;
      for (uint32_t s : ws.affected[j]) {
        const auto row = static_cast<Eigen::Index>(s);
        const double rs =
            (approx_moment(ws.systems[s], bumped) - ws.mu_hat[row]) / ws.sigma[row];
        jac(row, col) = (rs - r[row]) / h;
      }
    });

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += lambda;
      Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      Eigen::VectorXd candidate_raw = theta + step;
      Eigen::VectorXd candidate = clip(candidate_raw);
      Eigen::VectorXd r_new = residuals(ws, candidate, stats.threads());
      if (r_new.norm() < rnorm) {
        const double change = rnorm - r_new.norm();
        unclipped = std::move(candidate_raw);
        theta = std::move(candidate);
        r = std::move(r_new);
        rnorm = r.norm();
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (change < options.residual_change_tol) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || converged || rnorm < 1e-12) {
      converged = converged || rnorm < 1e-12 || !accepted;
      break;
    }
  }

  report.theta = unclipped;
  report.sigma = ws.sigma;
  report.converged = converged;
  report.iterations = iter;
  report.residual_norm = rnorm;
  report.physical = true;
  report.psi.resize(report.theta.size());
  for (Eigen::Index i = 0; i < report.theta.size(); ++i) {
    if (report.theta[i] < 0.0 || report.theta[i] >= 0.5) report.physical = false;
    report.psi[i] = report.theta[i] < 0.5
                        ? -std::log1p(-2.0 * report.theta[i])
                        : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

namespace {

std::vector<DetectorSet> default_singleton_seeds(uint32_t n) {
  std::vector<DetectorSet> seeds;
  seeds.reserve(n);
  for (uint32_t i = 0; i < n; ++i) seeds.emplace_back(DetectorSet({i}, n));
  return seeds;
}

struct SetOrder {
  bool operator()(const DetectorSet& a, const DetectorSet& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.indices() < b.indices();
  }
};

}  // namespace

LearnResult learn_from_moments(const SyndromeStats& stats, const LearnOptions& options) {
  const uint32_t n = stats.detector_count();
  std::vector<DetectorSet> seeds =
      options.seeds.empty() ? default_singleton_seeds(n) : options.seeds;
  for (const auto& s : seeds)
    if (s.size() != seeds.front().size())
      throw DomainError("seed hyperedges must share one cardinality");

  LearnResult result;
  result.graph = correlation_graph(stats);

  std::set<DetectorSet, SetOrder> working(seeds.begin(), seeds.end());
  std::vector<DetectorSet> frontier = seeds;
  int k = static_cast<int>(seeds.front().size());

  while (k < options.k_max) {
    std::set<DetectorSet, SetOrder> candidates;
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

    Dem model(n);
    for (const auto& e : working) model.add_edge(e, 0.0);
    MomentFitOptions search_fit;
    search_fit.max_free_weight = options.w_search;
    EstimateReport fitted = estimate_from_moments(stats, model, search_fit);
    std::unordered_map<DetectorSet, size_t, DetectorSetHash> fitted_index;
    for (size_t i = 0; i < fitted.edges.size(); ++i)
      fitted_index.emplace(fitted.edges[i], i);
    Eigen::VectorXd theta(model.edge_count());
    for (size_t i = 0; i < model.edge_count(); ++i)
      theta[static_cast<Eigen::Index>(i)] =
          fitted.theta[static_cast<Eigen::Index>(fitted_index.at(model.edge(i)))];

    const double threshold = acceptance_threshold(binomial(n, k + 1));
    std::vector<DetectorSet> accepted;
    std::vector<DetectorSet> candidate_list(candidates.begin(), candidates.end());
    std::vector<char> keep(candidate_list.size(), 0);
    parallel_for(candidate_list.size(), stats.threads(), [&](size_t c) {
      const DetectorSet& cand = candidate_list[c];
      ReducedSystem sys = build_reduced_system(model, cand, options.w_search);
      const double predicted = approx_moment(sys, theta);
      MomentEstimate est = stats.moment(cand);
      const double residual = (est.mu_hat - predicted) / est.sigma;
      keep[c] = residual > threshold ? 1 : 0;
    });
    for (size_t c = 0; c < candidate_list.size(); ++c)
      if (keep[c]) accepted.push_back(candidate_list[c]);
    if (accepted.empty()) break;

    for (const auto& e : accepted) working.insert(e);
    frontier = std::move(accepted);
    ++k;
  }

  Dem model(n);
  for (const auto& e : working) model.add_edge(e, 0.0);
  MomentFitOptions final_fit;
  final_fit.max_free_weight = options.w_fit;
  EstimateReport fitted = estimate_from_moments(stats, model, final_fit);

  const double prune =
      acceptance_threshold(static_cast<double>(fitted.edges.size()));
  Dem pruned(n);
  std::vector<Eigen::Index> kept;
  for (size_t e = 0; e < fitted.edges.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    if (fitted.theta[i] / fitted.sigma[i] >= prune) {
      pruned.add_edge(fitted.edges[e], fitted.theta[i]);
      kept.push_back(i);
    }
  }
  EstimateReport final_report;
  final_report.algorithm = fitted.algorithm;
  final_report.shots = fitted.shots;
  final_report.converged = fitted.converged;
  final_report.iterations = fitted.iterations;
  final_report.residual_norm = fitted.residual_norm;
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

}  // namespace demest
