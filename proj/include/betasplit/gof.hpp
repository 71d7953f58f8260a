#pragma once

#include <functional>
#include <vector>

namespace betasplit {

struct TestResult {
  double statistic = 0.0;  // KS distance or Pearson X^2
  double p_value = 1.0;
  double df = 0.0;         // chi-square degrees of freedom (0 for KS)
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  long long reps = 0;
  double ci_lo = 0.0;  // value - 1.96 * stderr
  double ci_hi = 0.0;  // value + 1.96 * stderr
};

// Bundle a Monte Carlo mean with its standard error and 95% interval.
Estimate make_estimate(double value, double stderr_, long long reps);

// Mean / standard error / CI of a sample vector.
Estimate estimate_from_samples(const std::vector<double>& samples);

// Standard normal CDF.
double normal_cdf(double x);

// Survival function of the Kolmogorov distribution, Q(lambda) =
// 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), evaluated by whichever of
// the two classical series converges fastest.
double kolmogorov_q(double lambda);

// Regularized upper incomplete gamma Q(a, x) (series / continued fraction).
double gamma_q(double a, double x);

// One-sample Kolmogorov-Smirnov test of `samples` against the CDF `cdf`.
// The p-value uses the asymptotic Kolmogorov law with the usual small-sample
// effective-size correction.  `samples` need not be sorted.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov test.
TestResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson chi-square test of observed counts against expected probabilities
// (renormalized to sum to the observed total).  df = bins - 1.
TestResult chi_square(const std::vector<long long>& observed, const std::vector<double>& expected_probs);

// Chi-square homogeneity test of two count vectors over the same bins
// (2 x k contingency table, df = k - 1).  Bins empty in both rows are dropped.
TestResult chi_square_two_sample(const std::vector<long long>& a, const std::vector<long long>& b);

}  // namespace betasplit
