#include "demest/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "demest/errors.hpp"

namespace demest {

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  // Wichura (1988), algorithm AS241, PPND16.
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e0) *
                  r +
              3.64784832476320460504e0) *
                 r +
             5.76949722146069140550e0) *
                r +
            4.63033784615654529590e0) *
               r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e0) *
                r +
            2.05319162663775882187e0) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e0) *
                r +
            5.46378491116411436990e0) *
               r +
           6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
  }
  return (q < 0.0) ? -val : val;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  // Lentz's continued fraction for Q(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("gamma_p needs a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return 1.0 - gamma_p(df / 2.0, x / 2.0);
}

double chi2_gof_pvalue(const Eigen::VectorXd& observed_counts,
                       const Eigen::VectorXd& expected_probs,
                       double min_expected) {
  if (observed_counts.size() != expected_probs.size())
    throw DimensionError("chi2: observed/expected size mismatch");
  const double total = observed_counts.sum();
  double stat = 0.0;
  long cells = 0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (Eigen::Index i = 0; i < observed_counts.size(); ++i) {
    double e = expected_probs[i] * total;
    if (e < min_expected) {
      pooled_obs += observed_counts[i];
      pooled_exp += e;
      continue;
    }
    double d = observed_counts[i] - e;
    stat += d * d / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    double d = pooled_obs - pooled_exp;
    stat += d * d / pooled_exp;
    ++cells;
  }
  long df = cells - 1;
  if (df < 1) return 1.0;
  return chi2_sf(stat, static_cast<double>(df));
}

double anderson_darling_normal(Eigen::VectorXd samples) {
  const auto n = samples.size();
  if (n < 2) throw DomainError("anderson_darling needs at least 2 samples");
  std::sort(samples.data(), samples.data() + n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = normal_cdf(samples[i]);
    double v = normal_cdf(samples[n - 1 - i]);
    u = std::clamp(u, 1e-300, 1.0 - 1e-16);
    v = std::clamp(v, 0.0, 1.0 - 1e-300);
    acc += (2.0 * (i + 1) - 1.0) * (std::log(u) + std::log1p(-v));
  }
  return -static_cast<double>(n) - acc / static_cast<double>(n);
}

SampleMoments sample_moments(const Eigen::VectorXd& v) {
  SampleMoments m;
  m.count = static_cast<size_t>(v.size());
  if (m.count == 0) return m;
  m.mean = v.mean();
  Eigen::ArrayXd c = v.array() - m.mean;
  const double n = static_cast<double>(m.count);
  double m2 = c.square().sum() / n;
  double m3 = c.cube().sum() / n;
  double m4 = c.pow(4).sum() / n;
  m.variance = m.count > 1 ? c.square().sum() / (n - 1.0) : 0.0;
  m.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  m.excess_kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return m;
}

double pairwise_sum(const double* data, size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < count; ++i) s += data[i];
    return s;
  }
  size_t half = count / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

}  // namespace demest
