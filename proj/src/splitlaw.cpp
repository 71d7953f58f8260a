#include "betasplit/splitlaw.hpp"

#include <cmath>
#include <stdexcept>

namespace betasplit {

double split_pmf(int n, int i, const HarmonicTable& ht) {
  if (n < 2) throw std::domain_error("split_pmf: need n >= 2");
  if (i < 1 || i > n - 1) throw std::domain_error("split_pmf: need 1 <= i <= n-1");
  const double di = static_cast<double>(i);
  const double dn = static_cast<double>(n);
  return dn / (2.0 * ht.h(n - 1)) / (di * (dn - di));
}

int sample_split(int n, const HarmonicTable& ht, Rng& rng) {
  if (n < 2) throw std::domain_error("sample_split: need n >= 2");
  const int j = ht.sample_one_over_j(n - 1, rng);
  return rng.coin() ? j : n - j;
}

double sizebias_pmf(int m, int i, const HarmonicTable& ht) {
  if (m < 2) throw std::domain_error("sizebias_pmf: need m >= 2");
  if (i < 1 || i > m - 1) throw std::domain_error("sizebias_pmf: need 1 <= i <= m-1");
  return 1.0 / (ht.h(m - 1) * static_cast<double>(m - i));
}

int sample_sizebias(int m, const HarmonicTable& ht, Rng& rng) {
  if (m < 2) throw std::domain_error("sample_sizebias: need m >= 2");
  return m - ht.sample_one_over_j(m - 1, rng);
}

double levy_tail(double a) {
  if (!(a > 0.0)) throw std::domain_error("levy_tail: need a > 0");
  // 1 - e^{-a} loses digits for small a; e^{-a} underflows gracefully for
  // large a. Split at ln 2 where both branches are exact to rounding.
  constexpr double kLn2 = 0.6931471805599453;
  if (a < kLn2) return -std::log(-std::expm1(-a));
  return -std::log1p(-std::exp(-a));
}

}  // namespace betasplit
