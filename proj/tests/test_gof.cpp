#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "betasplit/gof.hpp"
#include "betasplit/rng.hpp"
#include "doctest.h"

using namespace betasplit;

namespace {

// Independent O(m^2) empirical-process oracle: max deviation between the
// empirical CDF (evaluated by explicit counting at each sample point, from
// both sides) and the model CDF.
double brute_force_ks(const std::vector<double>& xs,
                      const std::function<double(double)>& cdf) {
  const double m = double(xs.size());
  double d = 0.0;
  for (double x : xs) {
    int at_or_below = 0;
    int strictly_below = 0;
    for (double y : xs) {
      at_or_below += (y <= x);
      strictly_below += (y < x);
    }
    const double f = cdf(x);
    d = std::max(d, std::fabs(at_or_below / m - f));
    d = std::max(d, std::fabs(strictly_below / m - f));
  }
  return d;
}

}  // namespace

TEST_SUITE("gof") {
  TEST_CASE("normal cdf fixed points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(normal_cdf(8.0) > 1.0 - 1e-14);
    CHECK(normal_cdf(-8.0) < 1e-14);
  }

  TEST_CASE("kolmogorov survival: series cross-check, bounds, monotonicity") {
    // direct alternating series, accurate for lambda >= 0.9
    for (double lam : {0.9, 1.0, 1.1, 1.2, 1.5, 2.0}) {
      long double s = 0.0L;
      for (int k = 60; k >= 1; --k) {
        const long double term = std::exp(-2.0L * k * k * lam * lam);
        s += (k % 2 == 1) ? term : -term;
      }
      CHECK(kolmogorov_q(lam) == doctest::Approx(double(2.0L * s)).epsilon(1e-10));
    }
    // the small-lambda branch must glue smoothly onto the large-lambda one
    CHECK(kolmogorov_q(0.3) > 0.99999);
    CHECK(kolmogorov_q(1e-9) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 1.0;
    for (double lam = 0.05; lam < 2.5; lam += 0.05) {
      const double q = kolmogorov_q(lam);
      CHECK(q <= prev + 1e-14);
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
      prev = q;
    }
  }

  TEST_CASE("upper incomplete gamma: closed forms for half-integer shapes") {
    // a = 1: Q(1, x) = e^{-x}
    for (double x : {0.1, 0.5, 2.0, 10.0}) {
      CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-13));
    }
    // a = 1/2: Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.1, 1.0, 4.0}) {
      CHECK(gamma_q(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    }
    // a = 3/2: Q(3/2, x) = erfc(sqrt(x)) + 2 sqrt(x/pi) e^{-x}; hits both the
    // series branch (x < a+1) and the continued-fraction branch (x > a+1)
    for (double x : {0.25, 1.0, 8.0}) {
      const double expected =
          std::erfc(std::sqrt(x)) +
          2.0 * std::sqrt(x / 3.141592653589793) * std::exp(-x);
      CHECK(gamma_q(1.5, x) == doctest::Approx(expected).epsilon(1e-12));
    }
    // a = 2: Q(2, x) = (1+x) e^{-x}
    for (double x : {0.5, 3.0, 12.0}) {
      CHECK(gamma_q(2.0, x) == doctest::Approx((1.0 + x) * std::exp(-x)).epsilon(1e-12));
    }
    CHECK(gamma_q(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("ks statistic: midpoint grid and single-point laws") {
    // samples at quantile midpoints of Uniform(0,1): D = 1/(2m) exactly
    const int m = 10;
    std::vector<double> xs(m);
    for (int i = 0; i < m; ++i) xs[i] = (i + 0.5) / m;
    const auto unif = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    const TestResult tr = ks_test(xs, unif);
    CHECK(tr.statistic == doctest::Approx(1.0 / (2.0 * m)).epsilon(1e-12));
    CHECK(tr.df == 0.0);
    // one sample exactly at the median: D = 1/2
    const TestResult one = ks_test({0.5}, unif);
    CHECK(one.statistic == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("ks statistic equals the counting oracle on fixed data") {
    const std::vector<double> xs = {
        0.9511, 0.0496, 0.4394, 0.7610, 0.1162, 0.9336, 0.2706, 0.8378,
        0.3910, 0.0620, 0.7715, 0.4343, 0.5705, 0.9620, 0.2272, 0.1931,
        0.3481, 0.0130, 0.6521, 0.4343};  // includes a tie
    const auto unif = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    const auto expcdf = [](double x) { return -std::expm1(-x); };
    CHECK(ks_test(xs, unif).statistic ==
          doctest::Approx(brute_force_ks(xs, unif)).epsilon(1e-12));
    CHECK(ks_test(xs, expcdf).statistic ==
          doctest::Approx(brute_force_ks(xs, expcdf)).epsilon(1e-12));
  }

  TEST_CASE("ks p-values: calibrated on uniforms, tiny under a wrong model") {
    Rng rng(1, 0);
    std::vector<double> xs(5000);
    for (double& x : xs) x = rng.uniform01();
    const auto unif = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    const TestResult ok = ks_test(xs, unif);
    CHECK(ok.p_value > 1e-3);
    // same data against Exp(1): grossly wrong, p collapses
    const TestResult bad = ks_test(xs, [](double x) { return -std::expm1(-x); });
    CHECK(bad.p_value < 1e-12);
    CHECK_THROWS_AS((void)ks_test({}, unif), std::domain_error);
  }

  TEST_CASE("ks p-values are roughly uniform under the null") {
    Rng rng(2, 0);
    int below_half = 0;
    int below_tenth = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
      std::vector<double> xs(200);
      for (double& x : xs) x = rng.exponential(1.0);
      const double p = ks_test(xs, [](double x) { return -std::expm1(-x); }).p_value;
      below_half += (p < 0.5);
      below_tenth += (p < 0.1);
    }
    CHECK(below_half > trials / 2 - 60);
    CHECK(below_half < trials / 2 + 60);
    CHECK(below_tenth < trials / 4);
  }

  TEST_CASE("two-sample ks separates only genuinely different samples") {
    Rng rng(3, 0);
    std::vector<double> a(3000), b(3000), c(3000);
    for (double& x : a) x = rng.exponential(1.0);
    for (double& x : b) x = rng.exponential(1.0);
    for (double& x : c) x = rng.exponential(2.0);
    CHECK(ks_test_two_sample(a, b).p_value > 1e-3);
    CHECK(ks_test_two_sample(a, c).p_value < 1e-8);
    // disjoint supports: D = 1
    std::vector<double> lo(50, 0.0), hi(50, 0.0);
    for (int i = 0; i < 50; ++i) {
      lo[i] = i;
      hi[i] = 1000.0 + i;
    }
    CHECK(ks_test_two_sample(lo, hi).statistic == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("chi-square: exact match, known statistic, throws on impossible cells") {
    // proportional counts: statistic 0, p = 1
    const TestResult perfect = chi_square({100, 200, 300}, {1.0 / 6, 2.0 / 6, 3.0 / 6});
    CHECK(perfect.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(perfect.p_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perfect.df == 2.0);
    // two cells: X^2 = z^2 of the binomial normal approximation, and the
    // chi-square(1) p-value equals the two-sided normal p-value exactly
    const TestResult two = chi_square({510, 490}, {0.5, 0.5});
    CHECK(two.statistic == doctest::Approx(0.4).epsilon(1e-12));
    const double z = 10.0 / std::sqrt(1000.0 * 0.25);
    CHECK(two.p_value ==
          doctest::Approx(2.0 * (1.0 - normal_cdf(z))).epsilon(1e-10));
    // expected probabilities renormalize
    const TestResult scaled = chi_square({510, 490}, {5.0, 5.0});
    CHECK(scaled.statistic == doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS((void)chi_square({10, 5, 10}, {0.5, 0.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS((void)chi_square({10, 5}, {1.0, 0.0}), std::domain_error);
    // a zero-probability bin with zero observations is dropped from the df
    CHECK(chi_square({10, 0, 10}, {0.5, 0.0, 0.5}).df == 1.0);
  }

  TEST_CASE("chi-square homogeneity: identical rows pass, shifted rows fail") {
    Rng rng(4, 0);
    std::vector<long long> a(6, 0), b(6, 0), c(6, 0);
    for (int i = 0; i < 60000; ++i) {
      ++a[int(rng.below(6))];
      ++b[int(rng.below(6))];
      ++c[int(rng.below(3))];  // concentrated on half the bins
    }
    CHECK(chi_square_two_sample(a, b).p_value > 1e-3);
    CHECK(chi_square_two_sample(a, c).p_value < 1e-10);
    const TestResult tr = chi_square_two_sample(a, b);
    CHECK(tr.df == 5.0);
    // bins empty in both rows are dropped from df
    std::vector<long long> a2 = {100, 200, 0, 300};
    std::vector<long long> b2 = {110, 190, 0, 290};
    CHECK(chi_square_two_sample(a2, b2).df == 2.0);
  }

  TEST_CASE("estimates carry the sample mean, stderr, and a 95% interval") {
    const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    const Estimate e = estimate_from_samples(xs);
    CHECK(e.value == doctest::Approx(2.5).epsilon(1e-14));
    // sample variance 5/3, se = sqrt(5/3/4)
    const double se = std::sqrt(5.0 / 3.0 / 4.0);
    CHECK(e.stderr_ == doctest::Approx(se).epsilon(1e-12));
    CHECK(e.reps == 4);
    CHECK(e.ci_lo == doctest::Approx(2.5 - 1.96 * se).epsilon(1e-12));
    CHECK(e.ci_hi == doctest::Approx(2.5 + 1.96 * se).epsilon(1e-12));
    const Estimate m = make_estimate(7.0, 0.25, 100);
    CHECK(m.ci_lo == doctest::Approx(7.0 - 0.49).epsilon(1e-12));
    CHECK(m.ci_hi == doctest::Approx(7.0 + 0.49).epsilon(1e-12));
  }
}
