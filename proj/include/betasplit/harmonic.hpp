#pragma once

#include <cstdint>
#include <vector>

#include "betasplit/rng.hpp"

namespace betasplit {

// Prefix table of harmonic numbers h[k] = 1 + 1/2 + ... + 1/k, built once with
// compensated (Neumaier) summation.  The table doubles as the inverse-CDF
// structure for sampling J on {1..k} with P(J=j) proportional to 1/j, which is
// the kernel both split samplers decompose into.
class HarmonicTable {
 public:
  static constexpr int kDefaultMax = 200000;

  explicit HarmonicTable(int n_max = kDefaultMax);

  int n_max() const { return static_cast<int>(h_.size()) - 1; }

  double h(int k) const { return h_[static_cast<std::size_t>(k)]; }

  // J in {1..k} with P(J=j) = (1/j)/h[k], by binary search in the prefix
  // table: O(log k) per draw, exact law.
  int sample_one_over_j(int k, Rng& rng) const;

  const std::vector<double>& data() const { return h_; }

 private:
  std::vector<double> h_;
};

}  // namespace betasplit
