#include "betasplit/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace betasplit {

HarmonicTable::HarmonicTable(int n_max) {
  if (n_max < 1) throw std::domain_error("HarmonicTable: n_max must be >= 1");
  h_.resize(static_cast<std::size_t>(n_max) + 1);
  h_[0] = 0.0;
  double sum = 0.0, comp = 0.0;  // Neumaier running compensation
  for (int k = 1; k <= n_max; ++k) {
    const double term = 1.0 / k;
    const double next = sum + term;
    comp += (std::abs(sum) >= term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
    h_[static_cast<std::size_t>(k)] = sum + comp;
  }
}

int HarmonicTable::sample_one_over_j(int k, Rng& rng) const {
  if (k < 1 || k > n_max())
    throw std::domain_error("sample_one_over_j: k out of table range");
  if (k == 1) return 1;
  // u in (0,1) strictly, so x in (0, h[k]) and the search never falls off
  // either end: result j satisfies h[j-1] < x <= h[j].
  const double x = rng.uniform01() * h_[static_cast<std::size_t>(k)];
  const auto first = h_.begin() + 1;
  const auto last = h_.begin() + 1 + k;
  return static_cast<int>(std::lower_bound(first, last, x) - h_.begin());
}

}  // namespace betasplit
