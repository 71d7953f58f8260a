#pragma once

#include "betasplit/harmonic.hpp"
#include "betasplit/rng.hpp"

namespace betasplit {

// Split law of the critical beta-splitting tree: a clade of n leaves splits
// into left/right parts (i, n-i) with probability
//     q(n,i) = n / (2 h[n-1]) * 1/(i (n-i)),   1 <= i <= n-1.
double split_pmf(int n, int i, const HarmonicTable& ht);

// Draws from q(n,.) by the exact mixture decomposition
//     1/(i(n-i)) = (1/i + 1/(n-i)) / n :
// sample J ~ 1/j on {1..n-1} via the harmonic table, then return J or n-J
// with probability 1/2 each.
int sample_split(int n, const HarmonicTable& ht, Rng& rng);

// Size-biased split law: the clade-size chain along the path to a uniform
// random leaf jumps from m to i with probability
//     q*(m,i) = (2i/m) q(m,i) = 1/(h[m-1] (m-i)).
double sizebias_pmf(int m, int i, const HarmonicTable& ht);

// Draws i = m - J with J ~ 1/j on {1..m-1}: P(i) = (1/(m-i))/h[m-1] exactly.
int sample_sizebias(int m, const HarmonicTable& ht, Rng& rng);

// Tail of the limiting Levy measure: psi[a, inf) = -log(1 - e^{-a}), a > 0.
// Evaluated in expm1/log1p form so both the small-a (log-singular) and
// large-a (e^{-a}) regimes keep full relative precision.
double levy_tail(double a);

}  // namespace betasplit
