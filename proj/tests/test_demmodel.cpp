#include <doctest.h>

#include <random>

#include "demest/dem_ops.hpp"
#include "demest/likelihood.hpp"
#include "demest/numerics.hpp"
#include "demest/parity_estimation.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace demest;

TEST_CASE("sampling determinism and zero-rate batches") {
  std::mt19937_64 rng(41);
  Dem dem = testing::random_dem(12, 10, 0.0, 0.3, rng);
  SyndromeBatch a = sample(dem, 10000, 99, 1);
  SyndromeBatch b = sample(dem, 10000, 99, 2);
  bool equal = a.shot_count() == b.shot_count();
  for (size_t s = 0; equal && s < a.shot_count(); ++s)
    for (uint32_t d = 0; d < 12; ++d) equal = equal && a.bit(s, d) == b.bit(s, d);
  CHECK(equal);

  Dem silent(4);
  silent.add_edge(DetectorSet({0, 2}, 4), 0.0);
  SyndromeBatch zeros = sample(silent, 1000, 1, 0);
  for (size_t s = 0; s < zeros.shot_count(); ++s)
    CHECK(zeros.hamming_weight(s) == 0);

  Dem bad(2);
  bad.add_edge(DetectorSet({0}, 2), 0.6);
  CHECK_THROWS_AS(sample(bad, 10, 0, 0), DomainError);
}

TEST_CASE("sampled frequencies match the edge rate") {
  Dem dem(2);
  dem.add_edge(DetectorSet({0, 1}, 2), 0.3);
  const size_t shots = 1 << 20;
  SyndromeBatch batch = sample(dem, shots, 7, 0);
  size_t fired = 0;
  for (size_t s = 0; s < shots; ++s)
    if (batch.bit(s, 0) && batch.bit(s, 1)) ++fired;
  const double phat = static_cast<double>(fired) / shots;
  const double sigma = std::sqrt(0.3 * 0.7 / shots);
  CHECK(std::abs(phat - 0.3) < 5 * sigma);
}

TEST_CASE("sampled distribution passes a chi-square test against the exact one") {
  std::mt19937_64 rng(43);
  Dem dem = testing::random_dem(6, 10, 0.02, 0.2, rng);
  Eigen::VectorXd expected = testing::brute_force_probs(dem);
  const size_t shots = 200000;
  SyndromeBatch batch = sample(dem, shots, 11, 0);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(expected.size());
  for (size_t s = 0; s < shots; ++s)
    counts[static_cast<Eigen::Index>(batch.shot_index(s))] += 1;
  CHECK(chi2_gof_pvalue(counts, expected) > 1e-3);
}

TEST_CASE("hyperedge classification") {
  Dem dem(6);
  // Sites a=0, b=1 at rounds 0..2; detector = round*2 + site.
  for (int r = 0; r < 3; ++r) {
    dem.coords.set(2 * r, {0, 0, static_cast<double>(r)});
    dem.coords.set(2 * r + 1, {1, 0, static_cast<double>(r)});
  }
  dem.add_edge(DetectorSet({0, 2}, 6), 0.01);        // a_0, a_1: timelike
  dem.add_edge(DetectorSet({0, 1}, 6), 0.01);        // a_0, b_0: spacelike
  dem.add_edge(DetectorSet({0, 3}, 6), 0.01);        // a_0, b_1: spacetimelike
  dem.add_edge(DetectorSet({0, 4}, 6), 0.01);        // a_0, a_2: two rounds apart
  dem.add_edge(DetectorSet({2}, 6), 0.01);           // point
  dem.add_edge(DetectorSet({0, 1, 2}, 6), 0.01);     // order 3
  dem.add_edge(DetectorSet({0, 1, 2, 3}, 6), 0.01);  // order 4
  auto classes = classify(dem);
  CHECK(classes[0] == HyperedgeClass::timelike);
  CHECK(classes[1] == HyperedgeClass::spacelike);
  CHECK(classes[2] == HyperedgeClass::spacetimelike);
  CHECK(classes[3] == HyperedgeClass::spacetimelike);
  CHECK(classes[4] == HyperedgeClass::point);
  CHECK(classes[5] == HyperedgeClass::order3);
  CHECK(classes[6] == HyperedgeClass::order4plus);
}

TEST_CASE("floor_negative_rates replaces only negatives") {
  EstimateReport report;
  report.edges = {DetectorSet({0}, 2), DetectorSet({1}, 2)};
  report.theta.resize(2);
  report.theta << -0.001, 0.02;
  report.sigma.resize(2);
  report.sigma << 0.0004, 0.0005;
  report.psi = report.theta;
  EstimateReport floored = floor_negative_rates(report);
  CHECK(floored.theta[0] == doctest::Approx(0.0004));
  CHECK(floored.theta[1] == doctest::Approx(0.02));
  CHECK(floored.physical);

  EstimateReport all_positive = floor_negative_rates(floored);
  CHECK(all_positive.theta.isApprox(floored.theta));
}

TEST_CASE("time averaging groups round-translated bulk edges") {
  Dem dem(8);  // 1 site x ... actually 2 sites x 4 rounds
  for (int r = 0; r < 4; ++r) {
    dem.coords.set(2 * r, {0, 0, static_cast<double>(r)});
    dem.coords.set(2 * r + 1, {1, 0, static_cast<double>(r)});
  }
  // Two timelike edges on site 0 in the bulk: rounds (1,2) and (2,3)... round 3
  // is the last round, so use rounds (1,2) only plus a second site.
  dem.add_edge(DetectorSet({2, 4}, 8), 0.01);  // site0 rounds 1-2, bulk
  dem.add_edge(DetectorSet({3, 5}, 8), 0.03);  // site1 rounds 1-2, bulk, other class
  dem.add_edge(DetectorSet({0, 2}, 8), 0.05);  // touches round 0: boundary
  EstimateReport report;
  report.edges = dem.edges();
  report.theta.resize(3);
  report.theta << 0.01, 0.03, 0.05;
  report.sigma = Eigen::VectorXd::Constant(3, 1e-3);
  report.psi = report.theta;

  Dem averaged = time_average(dem, report);
  CHECK(averaged.rate(0) == doctest::Approx(0.01));  // singleton class
  CHECK(averaged.rate(2) == doctest::Approx(0.05));  // boundary untouched

  // Same spatial shape, translated by one round: the two rates average.
  Dem dem2(10);
  for (int r = 0; r < 5; ++r) {
    dem2.coords.set(2 * r, {0, 0, static_cast<double>(r)});
    dem2.coords.set(2 * r + 1, {1, 0, static_cast<double>(r)});
  }
  dem2.add_edge(DetectorSet({2, 4}, 10), 0.01);
  dem2.add_edge(DetectorSet({4, 6}, 10), 0.03);
  EstimateReport report2;
  report2.edges = dem2.edges();
  report2.theta.resize(2);
  report2.theta << 0.01, 0.03;
  Dem averaged2 = time_average(dem2, report2);
  CHECK(averaged2.rate(0) == doctest::Approx(0.02));
  CHECK(averaged2.rate(1) == doctest::Approx(0.02));
}

TEST_CASE("tiling to the source round count is the identity") {
  std::mt19937_64 rng(47);
  Dem dem = testing::repetition_grid_dem(4, 5, 0.005, 0.02, rng);
  EstimateReport report;
  report.edges = dem.edges();
  report.theta = dem.rates();
  Dem averaged = time_average(dem, report);
  Dem tiled = tile_rounds(averaged, 5);
  REQUIRE(tiled.edge_count() == averaged.edge_count());
  for (size_t e = 0; e < averaged.edge_count(); ++e) {
    long idx = tiled.find_edge(averaged.edge(e));
    REQUIRE(idx >= 0);
    CHECK(tiled.rate(static_cast<size_t>(idx)) ==
          doctest::Approx(averaged.rate(e)).epsilon(1e-12));
  }
}

TEST_CASE("tiling preserves bulk class counts per round") {
  std::mt19937_64 rng(53);
  Dem dem = testing::repetition_grid_dem(3, 5, 0.004, 0.02, rng);
  EstimateReport report;
  report.edges = dem.edges();
  report.theta = dem.rates();
  Dem averaged = time_average(dem, report);
  Dem tiled = tile_rounds(averaged, 9);
  CHECK(tiled.detector_count() == 3 * 9);

  // Timelike class on site 0 exists at every valid bulk anchor round.
  for (int r = 1; r + 1 <= 9 - 2; ++r) {
    DetectorSet edge({static_cast<uint32_t>(3 * r),
                      static_cast<uint32_t>(3 * (r + 1))},
                     27);
    CHECK(tiled.find_edge(edge) >= 0);
  }
}

TEST_CASE("tiled DEM has round-invariant bulk moments") {
  std::mt19937_64 rng(59);
  Dem dem = testing::repetition_grid_dem(3, 5, 0.01, 0.03, rng);
  EstimateReport report;
  report.edges = dem.edges();
  report.theta = dem.rates();
  Dem tiled = tile_rounds(time_average(dem, report), 8);

  const size_t shots = 400000;
  SyndromeBatch batch = sample(tiled, shots, 3, 0);
  // Detector moments for the same site in different deep-bulk rounds agree
  // within 5 combined sigma.
  for (uint32_t site = 0; site < 3; ++site) {
    double mu3 = 0, mu4 = 0;
    for (size_t s = 0; s < shots; ++s) {
      mu3 += batch.bit(s, 3 * 3 + site) ? 1 : 0;
      mu4 += batch.bit(s, 4 * 3 + site) ? 1 : 0;
    }
    mu3 /= shots;
    mu4 /= shots;
    const double sigma = std::sqrt(2 * std::max(mu3, mu4) / shots);
    CHECK(std::abs(mu3 - mu4) < 5 * sigma);
  }
}

TEST_CASE("restrict_rounds clips, merges and reindexes") {
  Dem dem(8);  // 2 sites x 4 rounds
  for (int r = 0; r < 4; ++r) {
    dem.coords.set(2 * r, {0, 0, static_cast<double>(r)});
    dem.coords.set(2 * r + 1, {1, 0, static_cast<double>(r)});
  }
  dem.add_edge(DetectorSet({2, 4}, 8), 0.01);   // rounds 1-2: kept whole
  dem.add_edge(DetectorSet({4, 6}, 8), 0.02);   // rounds 2-3: clips to {4}
  dem.add_edge(DetectorSet({4}, 8), 0.03);      // collides with the clip
  dem.add_edge(DetectorSet({6, 7}, 8), 0.5e-2); // outside: dropped

  Dem window = restrict_rounds(dem, 1, 2);
  CHECK(window.detector_count() == 4);
  REQUIRE(window.edge_count() == 2);
  // New indices: old 2,3,4,5 -> 0,1,2,3.
  long whole = window.find_edge(DetectorSet({0, 2}, 4));
  long merged = window.find_edge(DetectorSet({2}, 4));
  REQUIRE(whole >= 0);
  REQUIRE(merged >= 0);
  CHECK(window.rate(static_cast<size_t>(whole)) == doctest::Approx(0.01));
  // Attenuations sum: 1 - 2t = (1 - 0.04)(1 - 0.06).
  CHECK(window.rate(static_cast<size_t>(merged)) ==
        doctest::Approx(0.5 * (1 - 0.96 * 0.94)));

  CHECK_THROWS_AS(restrict_rounds(dem, 3, 2), DomainError);
}

TEST_CASE("restricted likelihood equals the marginal of the full DEM") {
  std::mt19937_64 rng(61);
  Dem dem = testing::repetition_grid_dem(3, 4, 0.01, 0.05, rng);
  Dem window = restrict_rounds(dem, 1, 2);
  REQUIRE(window.detector_count() == 6);

  //

  SubsetVector window_probs = exact_likelihood(window);
  // The window detectors are old indices 3..8 in order.
  DetectorSet subset({3, 4, 5, 6, 7, 8}, 12);
  for (uint64_t pattern = 0; pattern < 64; ++pattern) {
    std::vector<bool> bits(6);
    for (int j = 0; j < 6; ++j) bits[j] = (pattern >> j) & 1;
    const double direct = marginal_prob(dem, subset, bits);
    CHECK(std::abs(direct -
                   window_probs.values[static_cast<Eigen::Index>(pattern)]) < 1e-9);
  }
}
