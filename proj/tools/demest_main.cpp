// demest: decoder-free detector-error-model estimation toolkit.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "demest/dem_io.hpp"
#include "demest/dem_ops.hpp"
#include "demest/parallel.hpp"
#include "demest/diagnostics.hpp"
#include "demest/likelihood.hpp"
#include "demest/matrices.hpp"
#include "demest/moment_estimation.hpp"
#include "demest/numerics.hpp"
#include "demest/parity_estimation.hpp"
#include "demest/transforms.hpp"
#include "demest/version.hpp"

using namespace demest;
using nlohmann::json;

namespace {

struct CommonOptions {
  int threads = 0;
  std::string manifest;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--threads", common.threads,
                  "Worker threads (0: DEMEST_THREADS or hardware)");
  cmd->add_option("--manifest", common.manifest,
                  "Manifest path (default: derived from --out)");
}

void write_manifest(const CommonOptions& common, const std::string& subcommand,
                    const json& config, const std::string& default_stem) {
  json manifest;
  manifest["tool"] = "demest";
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["threads"] = resolve_threads(common.threads);
  manifest["config"] = config;
  std::string path = common.manifest.empty()
                         ? default_stem + ".manifest.json"
                         : common.manifest;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write manifest " + path);
  out << manifest.dump(2) << "\n";
}

SyndromeBatch load_syndromes(const std::string& path, const std::string& format,
                             uint32_t n) {
  return read_syndromes(path, syndrome_format_from_name(format), n);
}

std::string tsv_line(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += '\t';
    line += c;
  }
  return line + "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_report_tsv(const std::string& path, const EstimateReport& report) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << tsv_line({"edge", "theta", "sigma", "psi"});
  for (size_t e = 0; e < report.edges.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    out << tsv_line({report.edges[e].str(), fmt(report.theta[i]),
                     report.sigma.size() ? fmt(report.sigma[i]) : "nan",
                     report.psi.size() ? fmt(report.psi[i]) : "nan"});
  }
}

Dem dem_from_report(uint32_t n, const EstimateReport& report,
                    const DetectorCoords& coords) {
  Dem out(n);
  out.coords = coords;
  for (size_t e = 0; e < report.edges.size(); ++e)
    out.add_edge(report.edges[e],
                 std::max(0.0, report.theta[static_cast<Eigen::Index>(e)]));
  return out;
}

int run_identities(int n) {
  bool ok = true;
  auto check = [&](const std::string& name, bool passed) {
    std::cout << (passed ? "ok   " : "FAIL ") << name << "\n";
    ok = ok && passed;
  };
  using Mat = Eigen::MatrixXd;
  const Mat L = subset_matrix(SubsetMatrix::L, n);
  const Mat G = subset_matrix(SubsetMatrix::G, n);
  const Mat Z = subset_matrix(SubsetMatrix::Z, n);
  const Mat H = subset_matrix(SubsetMatrix::H, n);
  const Mat W = subset_matrix(SubsetMatrix::W, n);
  const auto size = L.rows();
  check("L*L = I (n=" + std::to_string(n) + ")",
        (L * L - Mat::Identity(size, size)).cwiseAbs().maxCoeff() < 1e-10);
  check("-2*L*G*Z = H", ((-2.0 * L * G * Z) - H).cwiseAbs().maxCoeff() < 1e-10);
  for (auto [m, name] : {std::pair{SubsetMatrix::G, "G"}, {SubsetMatrix::Z, "Z"},
                         {SubsetMatrix::L, "L"}, {SubsetMatrix::H, "H"},
                         {SubsetMatrix::W, "W"}}) {
    check(std::string("entry formula = recursion for ") + name,
          (subset_matrix(m, n) - subset_matrix_recursive(m, n))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
  }
  // Aggregated-attenuation identity on a random non-negative attenuation
  // vector with the dependent zero entry.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uniform(0.0, 0.2);
  Eigen::VectorXd psi(size);
  for (Eigen::Index i = 1; i < size; ++i) psi[i] = uniform(rng);
  psi[0] = -psi.tail(size - 1).sum();
  const Eigen::VectorXd omega = W * psi;
  double worst = 0;
  for (Eigen::Index s = 0; s < size; ++s) {
    double lhs = 0, rhs = 0;
    for (Eigen::Index a = 0; a < size; ++a)
      if ((a & s) == s) lhs += psi[a];
    lhs *= static_cast<double>(uint64_t{1} << std::popcount(static_cast<uint64_t>(s))) / -2.0;
    for (Eigen::Index b = 0; b < size; ++b)
      if ((b & s) == b) rhs += (std::popcount(static_cast<uint64_t>(b)) % 2 ? -1.0 : 1.0) * omega[b];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  check("aggregated-attenuation sums (theorem identity)", worst < 1e-10);
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"demest: estimate, score and diagnose detector error models from syndromes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Sample syndromes from a DEM");
  struct {
    std::string dem, out, format = "b8";
    size_t shots = 0;
    uint64_t seed = 0;
    CommonOptions common;
  } sample_opt;
  sample_cmd->add_option("--dem", sample_opt.dem, "DEM file")->required();
  sample_cmd->add_option("--shots", sample_opt.shots, "Shot count")->required();
  sample_cmd->add_option("--seed", sample_opt.seed, "RNG seed");
  sample_cmd->add_option("--out", sample_opt.out, "Output syndrome file")->required();
  sample_cmd->add_option("--format", sample_opt.format, "b8 or 01");
  add_common(sample_cmd, sample_opt.common);
  sample_cmd->callback([&] {
    Dem dem = read_dem_file(sample_opt.dem);
    SyndromeBatch batch =
        sample(dem, sample_opt.shots, sample_opt.seed, sample_opt.common.threads);
    write_syndromes(sample_opt.out, batch,
                    syndrome_format_from_name(sample_opt.format));
    write_manifest(sample_opt.common, "sample",
                   json{{"dem", sample_opt.dem},
                        {"shots", sample_opt.shots},
                        {"seed", sample_opt.seed},
                        {"out", sample_opt.out},
                        {"format", sample_opt.format}},
                   sample_opt.out);
  });

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "Estimate rates for a fixed structure");
  struct {
    std::string method = "parities", dem, syndromes, format = "b8", out, report;
    int w = 3;
    bool time_avg = false, floor_negative = false;
    double psi_bar = 0.1;
    std::string queries;
    CommonOptions common;
  } est_opt;
  est_cmd->add_option("--method", est_opt.method, "moments, parities or lsqr");
  est_cmd->add_option("--dem", est_opt.dem, "Structure DEM file")->required();
  est_cmd->add_option("--syndromes", est_opt.syndromes, "Syndrome file")->required();
  est_cmd->add_option("--format", est_opt.format, "b8 or 01");
  est_cmd->add_option("--w", est_opt.w, "Max free-excitation weight (moments)");
  est_cmd->add_flag("--time-average", est_opt.time_avg,
                    "Average rates over round-translation classes");
  est_cmd->add_flag("--floor-negative", est_opt.floor_negative,
                    "Replace negative rates with their standard errors");
  est_cmd->add_option("--psi-bar", est_opt.psi_bar,
                      "Typical attenuation for lsqr query design");
  est_cmd->add_option("--queries", est_opt.queries,
                      "Query file for lsqr (lines of D<i> targets)");
  est_cmd->add_option("--out", est_opt.out, "Output DEM file")->required();
  est_cmd->add_option("--report", est_opt.report, "Optional TSV report");
  add_common(est_cmd, est_opt.common);
  est_cmd->callback([&] {
    Dem structure = read_dem_file(est_opt.dem);
    SyndromeBatch batch =
        load_syndromes(est_opt.syndromes, est_opt.format, structure.detector_count());
    SyndromeStats stats(batch, est_opt.common.threads);
    EstimateReport report;
    if (est_opt.method == "moments") {
      MomentFitOptions options;
      options.max_free_weight = est_opt.w;
      report = estimate_from_moments(stats, structure, options);
    } else if (est_opt.method == "parities") {
      report = estimate_from_parities(stats, structure);
    } else if (est_opt.method == "lsqr") {
      ParityQueryMatrix queries;
      if (est_opt.queries.empty()) {
        queries = suggest_queries(structure, est_opt.psi_bar);
      } else {
        std::ifstream in(est_opt.queries);
        if (!in) throw FormatError("cannot open " + est_opt.queries);
        std::vector<DetectorSet> sets;
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          if (line.empty() || line[0] == '#') continue;
          std::istringstream ls(line);
          std::string tok;
          std::vector<uint32_t> ids;
          while (ls >> tok) {
            if (tok[0] != 'D') throw ParseError("expected D<i> target", lineno);
            ids.push_back(static_cast<uint32_t>(std::stoul(tok.substr(1))));
          }
          sets.emplace_back(std::move(ids), structure.detector_count());
        }
        queries = make_query_matrix(structure, std::move(sets));
      }
      report = estimate_lsqr(stats, structure, queries);
    } else {
      throw CLI::ValidationError("--method must be moments, parities or lsqr");
    }
    if (est_opt.floor_negative) report = floor_negative_rates(report);
    Dem fitted = dem_from_report(structure.detector_count(), report, structure.coords);
    if (est_opt.time_avg) fitted = time_average(fitted, report);
    write_dem_file(est_opt.out, fitted);
    if (!est_opt.report.empty()) write_report_tsv(est_opt.report, report);
    write_manifest(est_opt.common, "estimate",
                   json{{"method", est_opt.method},
                        {"dem", est_opt.dem},
                        {"syndromes", est_opt.syndromes},
                        {"format", est_opt.format},
                        {"w", est_opt.w},
                        {"time_average", est_opt.time_avg},
                        {"floor_negative", est_opt.floor_negative},
                        {"out", est_opt.out},
                        {"converged", report.converged},
                        {"physical", report.physical}},
                   est_opt.out);
  });

  // learn
  auto* learn_cmd = app.add_subcommand("learn", "Learn structure and rates");
  struct {
    std::string method = "parities", syndromes, format = "b8", out, seed_edges;
    uint32_t detectors = 0;
    int k_max = 4, w_search = 2, w_fit = 3;
    CommonOptions common;
  } learn_opt;
  learn_cmd->add_option("--method", learn_opt.method, "moments or parities");
  learn_cmd->add_option("--syndromes", learn_opt.syndromes, "Syndrome file")->required();
  learn_cmd->add_option("--detectors", learn_opt.detectors, "Detector count")->required();
  learn_cmd->add_option("--format", learn_opt.format, "b8 or 01");
  learn_cmd->add_option("--k-max", learn_opt.k_max, "Maximum hyperedge cardinality");
  learn_cmd->add_option("--seed-edges", learn_opt.seed_edges,
                        "DEM file whose edges seed the search");
  learn_cmd->add_option("--w-search", learn_opt.w_search, "Moment weight during search");
  learn_cmd->add_option("--w-fit", learn_opt.w_fit, "Moment weight for the final fit");
  learn_cmd->add_option("--out", learn_opt.out, "Output DEM file")->required();
  add_common(learn_cmd, learn_opt.common);
  learn_cmd->callback([&] {
    SyndromeBatch batch =
        load_syndromes(learn_opt.syndromes, learn_opt.format, learn_opt.detectors);
    SyndromeStats stats(batch, learn_opt.common.threads);
    LearnOptions options;
    options.k_max = learn_opt.k_max;
    options.w_search = learn_opt.w_search;
    options.w_fit = learn_opt.w_fit;
    if (!learn_opt.seed_edges.empty()) {
      Dem seeds = read_dem_file(learn_opt.seed_edges, learn_opt.detectors);
      options.seeds = seeds.edges();
    }
    LearnResult result;
    if (learn_opt.method == "moments")
      result = learn_from_moments(stats, options);
    else if (learn_opt.method == "parities")
      result = learn_from_parities(stats, options);
    else
      throw CLI::ValidationError("--method must be moments or parities");
    write_dem_file(learn_opt.out, result.structure);
    write_manifest(learn_opt.common, "learn",
                   json{{"method", learn_opt.method},
                        {"syndromes", learn_opt.syndromes},
                        {"detectors", learn_opt.detectors},
                        {"k_max", learn_opt.k_max},
                        {"seed_edges", learn_opt.seed_edges},
                        {"edges_learned", result.structure.edge_count()},
                        {"out", learn_opt.out}},
                   learn_opt.out);
  });

  // likelihood
  auto* like_cmd = app.add_subcommand("likelihood", "Exact syndrome likelihoods");
  struct {
    std::string dem, syndromes, format = "b8", out;
    CommonOptions common;
  } like_opt;
  like_cmd->add_option("--dem", like_opt.dem, "DEM file")->required();
  like_cmd->add_option("--syndromes", like_opt.syndromes,
                       "Optional syndromes; without them the full table is written");
  like_cmd->add_option("--format", like_opt.format, "b8 or 01");
  like_cmd->add_option("--out", like_opt.out, "Output TSV")->required();
  add_common(like_cmd, like_opt.common);
  like_cmd->callback([&] {
    Dem dem = read_dem_file(like_opt.dem);
    std::ofstream out(like_opt.out);
    if (!out) throw FormatError("cannot write " + like_opt.out);
    json config{{"dem", like_opt.dem}, {"out", like_opt.out}};
    if (like_opt.syndromes.empty()) {
      SubsetVector p = exact_likelihood(dem);
      out << tsv_line({"syndrome", "probability"});
      for (Eigen::Index i = 0; i < p.values.size(); ++i)
        out << tsv_line({std::to_string(i), fmt(p.values[i])});
    } else {
      SyndromeBatch batch =
          load_syndromes(like_opt.syndromes, like_opt.format, dem.detector_count());
      FitScore score = kl_score(batch, dem, like_opt.common.threads);
      out << tsv_line({"cross_entropy", "entropy", "kl", "stderr", "shots"});
      out << tsv_line({fmt(score.cross_entropy), fmt(score.entropy), fmt(score.kl),
                       fmt(score.stderr_ce), std::to_string(score.shots)});
      config["syndromes"] = like_opt.syndromes;
    }
    write_manifest(like_opt.common, "likelihood", config, like_opt.out);
  });

  // score
  auto* score_cmd = app.add_subcommand("score", "KL/AIC model comparison");
  struct {
    std::vector<std::string> dems;
    std::string train, eval, format = "b8", fit = "fixed", out;
    int k_max = 4;
    bool learn = false;
    CommonOptions common;
  } score_opt;
  score_cmd->add_option("--dem", score_opt.dems, "Model DEM files (repeatable, NAME=PATH)")
      ->required();
  score_cmd->add_option("--train", score_opt.train, "Training syndromes (for --fit rates)");
  score_cmd->add_option("--eval", score_opt.eval, "Evaluation syndromes")->required();
  score_cmd->add_option("--format", score_opt.format, "b8 or 01");
  score_cmd->add_option("--fit", score_opt.fit, "fixed or rates (applies to all models)");
  score_cmd->add_flag("--learn", score_opt.learn,
                      "Also score a structure learned from the training set");
  score_cmd->add_option("--k-max", score_opt.k_max, "k_max for --learn");
  score_cmd->add_option("--out", score_opt.out, "Output TSV")->required();
  add_common(score_cmd, score_opt.common);
  score_cmd->callback([&] {
    std::vector<ModelSpec> models;
    uint32_t n = 0;
    for (const auto& entry : score_opt.dems) {
      ModelSpec spec;
      std::string path = entry;
      if (auto eq = entry.find('='); eq != std::string::npos) {
        spec.name = entry.substr(0, eq);
        path = entry.substr(eq + 1);
      } else {
        spec.name = path;
      }
      spec.dem = read_dem_file(path);
      n = std::max(n, spec.dem.detector_count());
      if (score_opt.fit == "rates")
        spec.mode = ModelSpec::Mode::fit_rates;
      else if (score_opt.fit != "fixed")
        throw CLI::ValidationError("--fit must be fixed or rates");
      models.push_back(std::move(spec));
    }
    if (score_opt.learn) {
      ModelSpec spec;
      spec.name = "learned";
      spec.dem = Dem(n);
      spec.mode = ModelSpec::Mode::learn_structure;
      spec.k_max = score_opt.k_max;
      models.push_back(std::move(spec));
    }
    SyndromeBatch eval = load_syndromes(score_opt.eval, score_opt.format, n);
    SyndromeBatch train = score_opt.train.empty()
                              ? eval
                              : load_syndromes(score_opt.train, score_opt.format, n);
    auto rows = compare_models(train, eval, models, score_opt.common.threads);
    std::ofstream out(score_opt.out);
    if (!out) throw FormatError("cannot write " + score_opt.out);
    out << tsv_line({"model", "kl", "cross_entropy", "entropy", "stderr", "edges",
                     "aic", "delta_aic"});
    for (const auto& row : rows)
      out << tsv_line({row.name, fmt(row.score.kl), fmt(row.score.cross_entropy),
                       fmt(row.score.entropy), fmt(row.score.stderr_ce),
                       std::to_string(row.fitted_edges), fmt(row.score.aic),
                       fmt(row.delta_aic)});
    write_manifest(score_opt.common, "score",
                   json{{"dems", score_opt.dems},
                        {"train", score_opt.train},
                        {"eval", score_opt.eval},
                        {"fit", score_opt.fit},
                        {"learn", score_opt.learn},
                        {"out", score_opt.out}},
                   score_opt.out);
  });

  // track
  auto* track_cmd = app.add_subcommand("track", "Windowed noise tracking");
  struct {
    std::string dem, syndromes, format = "b8", out;
    size_t window_shots = 100000;
    CommonOptions common;
  } track_opt;
  track_cmd->add_option("--dem", track_opt.dem, "Structure DEM file")->required();
  track_cmd->add_option("--syndromes", track_opt.syndromes, "Syndrome file")->required();
  track_cmd->add_option("--format", track_opt.format, "b8 or 01");
  track_cmd->add_option("--window-shots", track_opt.window_shots, "Shots per window");
  track_cmd->add_option("--out", track_opt.out, "Output TSV")->required();
  add_common(track_cmd, track_opt.common);
  track_cmd->callback([&] {
    Dem structure = read_dem_file(track_opt.dem);
    SyndromeBatch batch =
        load_syndromes(track_opt.syndromes, track_opt.format, structure.detector_count());
    AttenuationTrace trace =
        track_windows(batch, structure, track_opt.window_shots, track_opt.common.threads);
    std::ofstream out(track_opt.out);
    if (!out) throw FormatError("cannot write " + track_opt.out);
    out << tsv_line({"window", "first_shot", "shots", "weighted_total_attenuation",
                     "mean_hamming_weight"});
    for (const auto& w : trace.windows)
      out << tsv_line({std::to_string(w.index), std::to_string(w.first_shot),
                       std::to_string(w.shot_count),
                       fmt(w.weighted_total_attenuation),
                       fmt(w.mean_hamming_weight)});
    out << "\n" << tsv_line({"edge", "stability_variance"});
    for (size_t e = 0; e < trace.edges.size(); ++e)
      out << tsv_line({trace.edges[e].str(),
                       fmt(trace.stability[static_cast<Eigen::Index>(e)])});
    write_manifest(track_opt.common, "track",
                   json{{"dem", track_opt.dem},
                        {"syndromes", track_opt.syndromes},
                        {"window_shots", track_opt.window_shots},
                        {"out", track_opt.out}},
                   track_opt.out);
  });

  // pairs
  auto* pairs_cmd = app.add_subcommand("pairs", "Long-range pairwise correlations");
  struct {
    std::string dem, syndromes, format = "b8", out;
    double min_l1 = 0;
    bool same_round = false;
    CommonOptions common;
  } pairs_opt;
  pairs_cmd->add_option("--dem", pairs_opt.dem, "DEM file supplying coordinates")->required();
  pairs_cmd->add_option("--syndromes", pairs_opt.syndromes, "Syndrome file")->required();
  pairs_cmd->add_option("--format", pairs_opt.format, "b8 or 01");
  pairs_cmd->add_option("--min-l1", pairs_opt.min_l1, "Minimum l1 distance");
  pairs_cmd->add_flag("--same-round", pairs_opt.same_round, "Same-round pairs only");
  pairs_cmd->add_option("--out", pairs_opt.out, "Output TSV")->required();
  add_common(pairs_cmd, pairs_opt.common);
  pairs_cmd->callback([&] {
    Dem dem = read_dem_file(pairs_opt.dem);
    SyndromeBatch batch =
        load_syndromes(pairs_opt.syndromes, pairs_opt.format, dem.detector_count());
    SyndromeStats stats(batch, pairs_opt.common.threads);
    CorrelationGraph graph = long_range_pairs(stats, dem.coords, pairs_opt.min_l1,
                                              pairs_opt.same_round);
    std::ofstream out(pairs_opt.out);
    if (!out) throw FormatError("cannot write " + pairs_opt.out);
    out << tsv_line({"i", "j", "theta", "sigma", "z", "threshold"});
    for (const auto& p : graph.pairs)
      out << tsv_line({std::to_string(p.i), std::to_string(p.j), fmt(p.theta),
                       fmt(p.sigma), fmt(p.z), fmt(graph.threshold)});
    write_manifest(pairs_opt.common, "pairs",
                   json{{"dem", pairs_opt.dem},
                        {"syndromes", pairs_opt.syndromes},
                        {"min_l1", pairs_opt.min_l1},
                        {"same_round", pairs_opt.same_round},
                        {"out", pairs_opt.out}},
                   pairs_opt.out);
  });

  // motif
  auto* motif_cmd = app.add_subcommand("motif", "Correlated-measurement-error motif scan");
  struct {
    std::string dem, syndromes, format = "b8", out, motif = "corr-meas";
    int rounds = 0, per_round = 0;
    CommonOptions common;
  } motif_opt;
  motif_cmd->add_option("--dem", motif_opt.dem, "DEM file supplying coordinates")->required();
  motif_cmd->add_option("--syndromes", motif_opt.syndromes, "Syndrome file")->required();
  motif_cmd->add_option("--format", motif_opt.format, "b8 or 01");
  motif_cmd->add_option("--motif", motif_opt.motif, "Motif name (corr-meas)");
  motif_cmd->add_option("--rounds", motif_opt.rounds, "Rounds per shot")->required();
  motif_cmd->add_option("--per-round", motif_opt.per_round, "Detectors per round")->required();
  motif_cmd->add_option("--out", motif_opt.out, "Output TSV")->required();
  add_common(motif_cmd, motif_opt.common);
  motif_cmd->callback([&] {
    if (motif_opt.motif != "corr-meas")
      throw CLI::ValidationError("only the corr-meas motif is supported");
    Dem dem = read_dem_file(motif_opt.dem);
    RoundShape shape{motif_opt.rounds, motif_opt.per_round};
    SyndromeBatch batch =
        load_syndromes(motif_opt.syndromes, motif_opt.format, shape.detector_count());
    SyndromeStats stats(batch, motif_opt.common.threads);
    MotifScan scan = motif_scan(stats, dem.coords, shape);
    std::ofstream out(motif_opt.out);
    if (!out) throw FormatError("cannot write " + motif_opt.out);
    out << tsv_line({"site_a", "site_b", "round", "theta", "sigma", "z", "l1",
                     "threshold"});
    for (const auto& hit : scan.hits)
      out << tsv_line({std::to_string(hit.site_a), std::to_string(hit.site_b),
                       std::to_string(hit.round), fmt(hit.theta), fmt(hit.sigma),
                       fmt(hit.z), fmt(hit.l1), fmt(scan.threshold)});
    write_manifest(motif_opt.common, "motif",
                   json{{"dem", motif_opt.dem},
                        {"syndromes", motif_opt.syndromes},
                        {"rounds", motif_opt.rounds},
                        {"per_round", motif_opt.per_round},
                        {"motifs_scanned", scan.motifs_scanned},
                        {"out", motif_opt.out}},
                   motif_opt.out);
  });

  // anomalies
  auto* anom_cmd = app.add_subcommand("anomalies", "High-energy and TLS-like event scans");
  struct {
    std::string kind = "he", dem, syndromes, format = "b8", out;
    int rounds = 0, per_round = 0;
    size_t shots_per_sample = 0;
    CommonOptions common;
  } anom_opt;
  anom_cmd->add_option("--kind", anom_opt.kind, "he or tls");
  anom_cmd->add_option("--dem", anom_opt.dem, "DEM file supplying coordinates (tls)");
  anom_cmd->add_option("--syndromes", anom_opt.syndromes, "Syndrome file")->required();
  anom_cmd->add_option("--format", anom_opt.format, "b8 or 01");
  anom_cmd->add_option("--rounds", anom_opt.rounds, "Rounds per shot")->required();
  anom_cmd->add_option("--per-round", anom_opt.per_round, "Detectors per round")->required();
  anom_cmd->add_option("--shots-per-sample", anom_opt.shots_per_sample,
                       "Shots per contiguous sample")->required();
  anom_cmd->add_option("--out", anom_opt.out, "Output TSV")->required();
  add_common(anom_cmd, anom_opt.common);
  anom_cmd->callback([&] {
    RoundShape shape{anom_opt.rounds, anom_opt.per_round};
    SyndromeBatch batch =
        load_syndromes(anom_opt.syndromes, anom_opt.format, shape.detector_count());
    std::ofstream out(anom_opt.out);
    if (!out) throw FormatError("cannot write " + anom_opt.out);
    json config{{"kind", anom_opt.kind},
                {"syndromes", anom_opt.syndromes},
                {"rounds", anom_opt.rounds},
                {"per_round", anom_opt.per_round},
                {"shots_per_sample", anom_opt.shots_per_sample},
                {"out", anom_opt.out}};
    if (anom_opt.kind == "he") {
      auto events = detect_high_energy(batch, shape, anom_opt.shots_per_sample);
      out << tsv_line({"sample", "shot", "peak_round", "peak_fraction", "tau", "r2"});
      for (const auto& e : events)
        out << tsv_line({std::to_string(e.sample), std::to_string(e.shot),
                         std::to_string(e.round_begin), fmt(e.peak_fraction),
                         fmt(e.decay_tau), fmt(e.fit_r2)});
      config["events"] = events.size();
    } else if (anom_opt.kind == "tls") {
      if (anom_opt.dem.empty())
        throw CLI::ValidationError("--kind tls needs --dem for coordinates");
      Dem dem = read_dem_file(anom_opt.dem);
      TlsScan scan = detect_tls(batch, shape, dem.coords, anom_opt.shots_per_sample);
      out << tsv_line({"sample", "shot", "start_round", "width_rounds", "site_a",
                       "site_b"});
      for (const auto& e : scan.events)
        out << tsv_line({std::to_string(e.sample), std::to_string(e.shot),
                         std::to_string(e.round_begin),
                         std::to_string(e.width_rounds), std::to_string(e.site_a),
                         std::to_string(e.site_b)});
      config["events"] = scan.events.size();
      config["mean_gap_rounds"] = scan.mean_gap_rounds;
    } else {
      throw CLI::ValidationError("--kind must be he or tls");
    }
    write_manifest(anom_opt.common, "anomalies", config, anom_opt.out);
  });

  // pool
  auto* pool_cmd = app.add_subcommand("pool", "Pool shots into fixed-round frames");
  struct {
    std::vector<std::string> syndromes;
    std::vector<std::string> basis;
    std::string format = "b8", out;
    int rounds = 1, per_round = 0, head = 1, tail = 1;
    uint32_t detectors = 0;
    CommonOptions common;
  } pool_opt;
  pool_cmd->add_option("--syndromes", pool_opt.syndromes, "Syndrome files (repeatable)")
      ->required();
  pool_cmd->add_option("--basis", pool_opt.basis, "Optional basis label per input");
  pool_cmd->add_option("--format", pool_opt.format, "b8 or 01");
  pool_cmd->add_option("--detectors", pool_opt.detectors, "Detectors per shot")->required();
  pool_cmd->add_option("--rounds", pool_opt.rounds, "Rounds per frame")->required();
  pool_cmd->add_option("--per-round", pool_opt.per_round, "Detectors per round")->required();
  pool_cmd->add_option("--discard-head", pool_opt.head, "Head rounds to discard");
  pool_cmd->add_option("--discard-tail", pool_opt.tail, "Tail rounds to discard");
  pool_cmd->add_option("--out", pool_opt.out, "Output b8 file")->required();
  add_common(pool_cmd, pool_opt.common);
  pool_cmd->callback([&] {
    if (!pool_opt.basis.empty()) {
      std::set<std::string> labels(pool_opt.basis.begin(), pool_opt.basis.end());
      if (labels.size() > 1)
        std::cerr << "warning: pooling syndromes from different bases ("
                  << pool_opt.basis.size() << " labels); detector indexing "
                  << "compatibility is assumed, not checked\n";
    }
    FrameSpec spec{pool_opt.rounds, pool_opt.per_round, pool_opt.head, pool_opt.tail};
    SyndromeBatch pooled;
    bool first = true;
    bool warned_empty = false;
    for (const auto& path : pool_opt.syndromes) {
      SyndromeBatch batch = load_syndromes(path, pool_opt.format, pool_opt.detectors);
      PoolResult result = pool_frames(batch, spec);
      warned_empty = warned_empty || result.empty_output_warning;
      pooled = first ? std::move(result.frames)
                     : SyndromeBatch::concat(pooled, result.frames);
      first = false;
    }
    if (warned_empty)
      std::cerr << "warning: some inputs had fewer bulk rounds than a frame; "
                << "they contributed no frames\n";
    write_syndromes(pool_opt.out, pooled, SyndromeFormat::b8);
    write_manifest(pool_opt.common, "pool",
                   json{{"syndromes", pool_opt.syndromes},
                        {"detectors", pool_opt.detectors},
                        {"rounds", pool_opt.rounds},
                        {"per_round", pool_opt.per_round},
                        {"discard_head", pool_opt.head},
                        {"discard_tail", pool_opt.tail},
                        {"frames", pooled.shot_count()},
                        {"out", pool_opt.out}},
                   pool_opt.out);
  });

  // identities
  auto* id_cmd = app.add_subcommand("identities", "Run the subset-matrix self-tests");
  struct {
    int n = 8;
    CommonOptions common;
  } id_opt;
  id_cmd->add_option("--n", id_opt.n, "Detector count for the dense matrices");
  add_common(id_cmd, id_opt.common);
  int identities_rc = 0;
  id_cmd->callback([&] { identities_rc = run_identities(id_opt.n); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PoleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return identities_rc;
}
