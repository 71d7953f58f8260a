#include "betasplit/gof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace betasplit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Estimate make_estimate(double value, double stderr_, long long reps) {
  Estimate e;
  e.value = value;
  e.stderr_ = stderr_;
  e.reps = reps;
  e.ci_lo = value - 1.96 * stderr_;
  e.ci_hi = value + 1.96 * stderr_;
  return e;
}

Estimate estimate_from_samples(const std::vector<double>& samples) {
  const long long n = static_cast<long long>(samples.size());
  if (n == 0) throw std::domain_error("estimate_from_samples: empty sample");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double var = (n > 1) ? ss / static_cast<double>(n - 1) : 0.0;
  return make_estimate(mean, std::sqrt(var / static_cast<double>(n)), n);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form of the CDF, accurate for small arguments.
    const double y = std::exp(-kPi * kPi / (8.0 * lambda * lambda));
    const double p = std::sqrt(2.0 * kPi) / lambda *
                     (y + std::pow(y, 9.0) + std::pow(y, 25.0) + std::pow(y, 49.0));
    return 1.0 - p;
  }
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::max(0.0, std::min(1.0, 2.0 * q));
}

namespace {

// Lower regularized incomplete gamma by power series (for x < a + 1).
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k <= 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by modified Lentz continued fraction
// (for x >= a + 1).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 10000; ++k) {
    const double an = -static_cast<double>(k) * (static_cast<double>(k) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::domain_error("gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::domain_error("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(samples[i]);
    const double lo = f - static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n - f;
    d = std::max({d, lo, hi});
  }
  const double rn = std::sqrt(static_cast<double>(n));
  TestResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

TestResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::domain_error("ks_test_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  TestResult r;
  r.statistic = d;
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

TestResult chi_square(const std::vector<long long>& observed, const std::vector<double>& expected_probs) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw std::domain_error("chi_square: need matching non-empty bins");
  }
  long long total = 0;
  for (long long o : observed) total += o;
  double psum = 0.0;
  for (double p : expected_probs) {
    if (p < 0.0) throw std::domain_error("chi_square: negative expected probability");
    psum += p;
  }
  if (total <= 0 || psum <= 0.0) throw std::domain_error("chi_square: empty table");
  double x2 = 0.0;
  int df = -1;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = expected_probs[k] / psum * static_cast<double>(total);
    if (e == 0.0) {
      if (observed[k] != 0) {
        throw std::domain_error("chi_square: observed count in a zero-probability bin");
      }
      continue;
    }
    const double diff = static_cast<double>(observed[k]) - e;
    x2 += diff * diff / e;
    ++df;
  }
  TestResult r;
  r.statistic = x2;
  r.df = df;
  r.p_value = (df <= 0) ? 1.0 : gamma_q(0.5 * df, 0.5 * x2);
  return r;
}

TestResult chi_square_two_sample(const std::vector<long long>& a, const std::vector<long long>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::domain_error("chi_square_two_sample: need matching non-empty bins");
  }
  double na = 0.0, nb = 0.0;
  for (long long x : a) na += static_cast<double>(x);
  for (long long x : b) nb += static_cast<double>(x);
  if (na <= 0.0 || nb <= 0.0) throw std::domain_error("chi_square_two_sample: empty row");
  const double total = na + nb;
  double x2 = 0.0;
  int df = -1;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double col = static_cast<double>(a[k] + b[k]);
    if (col == 0.0) continue;
    const double ea = col * na / total;
    const double eb = col * nb / total;
    const double da = static_cast<double>(a[k]) - ea;
    const double db = static_cast<double>(b[k]) - eb;
    x2 += da * da / ea + db * db / eb;
    ++df;
  }
  TestResult r;
  r.statistic = x2;
  r.df = df;
  r.p_value = (df <= 0) ? 1.0 : gamma_q(0.5 * df, 0.5 * x2);
  return r;
}

}  // namespace betasplit
