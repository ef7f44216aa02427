#include <doctest.h>

#include <random>

#include "demest/numerics.hpp"

using namespace demest;

TEST_CASE("normal quantile matches reference values") {
  // Reference values computed with scipy.stats.norm.ppf.
  CHECK(normal_quantile(1e-9) == doctest::Approx(-5.9978070150076865).epsilon(1e-10));
  CHECK(normal_quantile(1e-5) == doctest::Approx(-4.264890793922825).epsilon(1e-10));
  CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-10));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-10));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-10));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.99999) == doctest::Approx(4.264890793923841).epsilon(1e-10));
}

TEST_CASE("chi-square tail matches reference values") {
  // scipy.stats.chi2.sf references.
  CHECK(chi2_sf(7.814727903251179, 3) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi2_sf(29.588, 10) == doctest::Approx(0.0010001119410634836).epsilon(1e-9));
  CHECK(chi2_sf(1200.0, 1023) == doctest::Approx(9.870605956167375e-05).epsilon(1e-8));
  CHECK(chi2_sf(1.1455, 5) == doctest::Approx(0.9499978140700627).epsilon(1e-9));
}

TEST_CASE("chi-square goodness of fit behaves on simple draws") {
  std::mt19937_64 rng(5);
  Eigen::VectorXd expected(4);
  expected << 0.4, 0.3, 0.2, 0.1;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
  std::discrete_distribution<int> draw({0.4, 0.3, 0.2, 0.1});
  for (int i = 0; i < 20000; ++i) counts[draw(rng)] += 1;
  CHECK(chi2_gof_pvalue(counts, expected) > 1e-3);

  Eigen::VectorXd wrong(4);
  wrong << 0.1, 0.2, 0.3, 0.4;
  CHECK(chi2_gof_pvalue(counts, wrong) < 1e-6);
}

TEST_CASE("anderson-darling screen separates normal from shifted data") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0, 1);
  Eigen::VectorXd good(2000), bad(2000);
  for (int i = 0; i < 2000; ++i) {
    good[i] = normal(rng);
    bad[i] = normal(rng) * 1.6 + 0.4;
  }
  CHECK(anderson_darling_normal(good) < 6.0);   // alpha = 1e-3 critical value
  CHECK(anderson_darling_normal(bad) > 6.0);
}

TEST_CASE("sample moments match hand values") {
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  SampleMoments m = sample_moments(v);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.variance == doctest::Approx(5.0 / 3));
  CHECK(m.skewness == doctest::Approx(0.0));
}

TEST_CASE("pairwise sum is exact on integers and order-stable") {
  std::vector<double> data(1000);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(i);
  CHECK(pairwise_sum(data.data(), data.size()) == doctest::Approx(499500.0));
}
