#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "demest/matrices.hpp"
#include "demest/transforms.hpp"
#include "support/oracles.hpp"

using namespace demest;

TEST_CASE("fwht matches the direct double sum") {
  Eigen::VectorXd v(2);
  v << 1, 0;
  hadamard_transform<double>(v);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 1.0);

  Eigen::VectorXd p(4);
  p << 0.8, 0.1, 0.1, 0.0;
  Eigen::VectorXd expect = testing::slow_hadamard(p);
  hadamard_transform<double>(p);
  CHECK(p.isApprox(expect, 1e-14));
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.8));
  CHECK(p[2] == doctest::Approx(0.8));
  CHECK(p[3] == doctest::Approx(0.6));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uniform(-1, 1);
  Eigen::VectorXd r(64);
  for (auto& x : r.reshaped()) x = uniform(rng);
  Eigen::VectorXd twice = r;
  hadamard_transform<double>(twice);
  CHECK(twice.isApprox(testing::slow_hadamard(r), 1e-12));
  hadamard_transform<double>(twice);
  CHECK(twice.isApprox(64.0 * r, 1e-12));
}

TEST_CASE("fwht rejects non-power-of-two lengths") {
  Eigen::VectorXd v(3);
  v.setZero();
  CHECK_THROWS_AS(hadamard_transform<double>(v), DimensionError);
}

TEST_CASE("probs_to_rates reproduces the nonphysical-rate example") {
  Eigen::VectorXd p(4);
  p << 0.8, 0.1, 0.1, 0.0;
  SubsetVector rates = probs_to_rates(SubsetVector(p, SubsetKind::probability));
  // Exact values; the analytic forms are theta_0 = 1/2 - 1/(1.6 sqrt(0.6))
  // and theta_1 = theta_2 = (1 - sqrt(0.6))/2.
  CHECK(rates.values[0] == doctest::Approx(-0.30687153).epsilon(1e-6));
  CHECK(rates.values[1] == doctest::Approx(0.5 * (1 - std::sqrt(0.6))).epsilon(1e-12));
  CHECK(rates.values[2] == doctest::Approx(0.5 * (1 - std::sqrt(0.6))).epsilon(1e-12));
  CHECK(rates.values[3] == doctest::Approx(-0.01639778).epsilon(1e-6));
  CHECK(rates.values[3] < 0);  // the example's point: a nonphysical rate
}

TEST_CASE("probs_to_rates depolarizing closed form") {
  const double q = 0.13;
  Eigen::VectorXd p(4);
  p << 1 - q, q / 3, q / 3, q / 3;
  SubsetVector rates = probs_to_rates(SubsetVector(p, SubsetKind::probability));
  const double expect = 0.5 - 0.5 * std::sqrt(1 - 4 * q / 3);
  CHECK(rates.values[1] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rates.values[2] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rates.values[3] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rates.values[0] ==
        doctest::Approx(0.5 - 0.5 * std::pow(1 - 4 * q / 3, -1.5)).epsilon(1e-12));
}

TEST_CASE("noiseless distribution maps to all-zero rates, no pole") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
  p[0] = 1.0;
  SubsetVector rates = probs_to_rates(SubsetVector(p, SubsetKind::probability));
  CHECK(rates.values.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("probs_to_rates pole error names the subset") {
  // Polarization of {0,1} is 2(p0 + p3) - 1 = 0 for this distribution.
  Eigen::VectorXd p(4);
  p << 0.25, 0.25, 0.25, 0.25;
  p[0] += 0.0;  // pi_3 = 0 exactly
  try {
    probs_to_rates(SubsetVector(p, SubsetKind::probability));
    FAIL("expected PoleError");
  } catch (const PoleError& e) {
    CHECK(e.subset_index() >= 1);
  }
}

TEST_CASE("rates_to_probs basics") {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(8);
  SubsetVector p = rates_to_probs(SubsetVector(theta, SubsetKind::rate));
  CHECK(p.values[0] == doctest::Approx(1.0));
  CHECK(p.values.tail(7).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::VectorXd single(2);
  single << 0.0, 0.1;
  SubsetVector bern = rates_to_probs(SubsetVector(single, SubsetKind::rate));
  CHECK(bern.values[0] == doctest::Approx(0.9));
  CHECK(bern.values[1] == doctest::Approx(0.1));

  Eigen::VectorXd bad(4);
  bad << 0, 0.1, 0.5, 0.1;
  CHECK_THROWS_AS(rates_to_probs(SubsetVector(bad, SubsetKind::rate)), DomainError);
}

TEST_CASE("roundtrip rates -> probs -> rates is the identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uniform(0.0, 0.45);
  for (int n = 1; n <= 6; ++n) {
    const Eigen::Index size = Eigen::Index{1} << n;
    Eigen::VectorXd theta(size);
    for (Eigen::Index i = 1; i < size; ++i) theta[i] = uniform(rng);
    theta[0] = 0;  // recomputed by the pipeline regardless
    SubsetVector p = rates_to_probs(SubsetVector(theta, SubsetKind::rate));
    SubsetVector back = probs_to_rates(p);
    CHECK((back.values.tail(size - 1) - theta.tail(size - 1)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("dense pipeline agrees with excitation enumeration") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    Dem dem = testing::random_dem(5, 9, 0.01, 0.3, rng);
    Eigen::VectorXd brute = testing::brute_force_probs(dem);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(32);
    for (size_t e = 0; e < dem.edge_count(); ++e)
      theta[static_cast<Eigen::Index>(dem.edge(e).subset_index())] = dem.rate(e);
    SubsetVector p = rates_to_probs(SubsetVector(theta, SubsetKind::rate));
    CHECK((p.values - brute).cwiseAbs().maxCoeff() < 1e-12);

    // Product-form polarizations equal H applied to the brute-force
    // distribution.
    Eigen::VectorXd pi = testing::product_form_polarizations(dem);
    CHECK((pi - testing::slow_hadamard(brute)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("physical DEMs cannot anti-correlate detector pairs") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uniform(0.0, 0.499);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = 2 + static_cast<int>(rng() % 3);  // n in {2,3,4}
    const Eigen::Index size = Eigen::Index{1} << n;
    Eigen::VectorXd theta(size);
    for (Eigen::Index i = 1; i < size; ++i) theta[i] = uniform(rng);
    theta[0] = 0;
    Eigen::VectorXd p = rates_to_probs(SubsetVector(theta, SubsetKind::rate)).values;
    const uint64_t mi = 1, mj = 2;
    double mu_i = 0, mu_j = 0, mu_ij = 0;
    for (Eigen::Index x = 0; x < size; ++x) {
      const auto ux = static_cast<uint64_t>(x);
      if (ux & mi) mu_i += p[x];
      if (ux & mj) mu_j += p[x];
      if ((ux & (mi | mj)) == (mi | mj)) mu_ij += p[x];
    }
    const double cov = mu_ij - mu_i * mu_j;
    CHECK(cov >= -1e-12);
    CHECK(cov <= 0.25 + 1e-12);
  }
}

TEST_CASE("aggregated attenuation identity and the omega conventions") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uniform(0.0, 0.3);
  for (int n = 1; n <= 8; ++n) {
    const Eigen::Index size = Eigen::Index{1} << n;
    Eigen::VectorXd psi(size);
    for (Eigen::Index i = 1; i < size; ++i) psi[i] = uniform(rng);
    psi[0] = -psi.tail(size - 1).sum();

    // omega = W psi and omega = -H psi / 2 agree under the dependent-psi0
    // convention.
    const Eigen::MatrixXd W = subset_matrix(SubsetMatrix::W, n);
    const Eigen::VectorXd omega = W * psi;
    Eigen::VectorXd via_h = psi;
    hadamard_transform<double>(via_h);
    CHECK((omega + 0.5 * via_h).cwiseAbs().maxCoeff() < 1e-10);

    // (2^{|S|}/-2) sum_{S subset A} psi_A = sum_{B subset S} (-1)^{|B|} omega_B.
    for (Eigen::Index s = 0; s < size; ++s) {
      double lhs = 0, rhs = 0;
      for (Eigen::Index a = 0; a < size; ++a)
        if ((a & s) == s) lhs += psi[a];
      lhs *= static_cast<double>(uint64_t{1} << std::popcount(static_cast<uint64_t>(s))) /
             -2.0;
      for (Eigen::Index b = 0; b < size; ++b)
        if ((b & s) == b)
          rhs += (std::popcount(static_cast<uint64_t>(b)) % 2 ? -1.0 : 1.0) * omega[b];
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("even and odd subsets balance except for the empty set") {
  for (uint64_t u = 0; u < (uint64_t{1} << 16); u += 4097) {
    // Count even- minus odd-sized subsets of the set with |u| popcount bits.
    const int bits = std::popcount(u);
    // sum_{A subset U} (-1)^{|A|} = [U = empty]; binomial alternating sum.
    double acc = 0;
    for (int k = 0; k <= bits; ++k) {
      double binom = 1;
      for (int i = 0; i < k; ++i) binom = binom * (bits - i) / (i + 1);
      acc += (k % 2 ? -1.0 : 1.0) * binom;
    }
    CHECK(acc == doctest::Approx(bits == 0 ? 1.0 : 0.0));
  }
  // And exhaustively for a 16-element set by direct enumeration.
  long diff = 0;
  for (uint64_t a = 0; a < (uint64_t{1} << 16); ++a)
    diff += (std::popcount(a) % 2) ? -1 : 1;
  CHECK(diff == 0);
}
