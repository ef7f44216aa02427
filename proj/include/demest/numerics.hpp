#pragma once

#include <Eigen/Core>
#include <cstddef>

namespace demest {

/// Standard normal quantile function, Wichura's AS241 rational
/// approximation (double precision, relative error well below 1e-9).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Upper tail of the chi-square distribution with df degrees of freedom.
double chi2_sf(double x, double df);

/// Chi-square goodness-of-fit p-value of observed counts against expected
/// probabilities. Cells with expected count below `min_expected` are pooled
/// into one cell; degrees of freedom are adjusted accordingly.
double chi2_gof_pvalue(const Eigen::VectorXd& observed_counts,
                       const Eigen::VectorXd& expected_probs,
                       double min_expected = 5.0);

/// Anderson-Darling A^2 statistic against the standard normal (fully
/// specified case). The alpha=1e-3 critical value is about 6.0.
double anderson_darling_normal(Eigen::VectorXd samples);

struct SampleMoments {
  double mean = 0, variance = 0, skewness = 0, excess_kurtosis = 0;
  size_t count = 0;
};
SampleMoments sample_moments(const Eigen::VectorXd& v);

/// Deterministic pairwise (tree) summation; result is independent of any
/// thread partitioning the caller used to fill the vector.
double pairwise_sum(const double* data, size_t count);

}  // namespace demest
