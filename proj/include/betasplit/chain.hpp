#pragma once

#include <vector>

#include "betasplit/clade_tree.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/rng.hpp"

namespace betasplit {

// ---------------------------------------------------------------------------
// Size-bias absorption chain: the clade sizes along the root path to a
// uniform random leaf form a decreasing Markov chain from n to 1, jumping
// m -> i with probability 1/(h[m-1] (m-i)) and (in continuous time) holding
// Exponential(h[m-1]) in state m. Its absorption time is the leaf height and
// its jump count the leaf's edge depth.
// ---------------------------------------------------------------------------

enum class ChainMode { discrete, continuous };

struct ChainPath {
  std::vector<int> states;    // n = s0 > s1 > ... > 1
  std::vector<double> holds;  // continuous mode: one hold per non-absorbing state

  int hops() const { return static_cast<int>(states.size()) - 1; }
  double total_hold() const {
    double s = 0.0;
    for (double h : holds) s += h;
    return s;
  }
};

ChainPath simulate_chain(int n, const HarmonicTable& ht, Rng& rng, ChainMode mode);

// Total hold from state m down to absorption, without recording the path.
double chain_absorption_time(int m, const HarmonicTable& ht, Rng& rng);

// ---------------------------------------------------------------------------
// Exact recurrences, O(N^2) with compensated summation.
// ---------------------------------------------------------------------------

struct NumericTable {
  std::vector<double> t;     // mean absorption time, t[1] = 0
  std::vector<double> m2;    // second moment of absorption time
  std::vector<double> var;   // m2 - t^2
  std::vector<double> thop;  // mean jump count, thop[1] = 0

  int n_max() const { return static_cast<int>(t.size()) - 1; }
};

// All tables up to N in one pass:
//   t[n]    = (1/h[n-1]) (1 + sum_{i<n} t[i]/(n-i))
//   m2[n]   = (1/h[n-1]) (2 t[n] + sum_{i<n} m2[i]/(n-i))
//   thop[n] = 1 + (1/h[n-1]) sum_{i<n} thop[i]/(n-i)
// The m2 recurrence conditions on the first jump: the hold H and the rest R
// are independent, so E (H+R)^2 = 2/h^2 + 2 E R / h + E R^2, which rearranges
// to the form above.
NumericTable depth_tables(int N, const HarmonicTable& ht);

// Continues an existing table up to a larger N (the recurrences only look
// backward, so a prefix stays valid).
void extend_depth_tables(NumericTable& table, int N, const HarmonicTable& ht);

std::vector<double> depth_mean_recurrence(int N, const HarmonicTable& ht);
std::vector<double> hop_mean_recurrence(int N, const HarmonicTable& ht);

// Same recurrences evaluated with an extended-precision accumulator, used to
// check the double-precision pass (slow; intended for N <= 1e4).
NumericTable depth_tables_extended_precision(int N, const HarmonicTable& ht);

// ---------------------------------------------------------------------------
// Occupation probabilities: a(n, i) = P(chain from n ever visits i).
// ---------------------------------------------------------------------------

// Backward DP, O(n^2) reference: a[n] = 1, a[m] = sum_{j>m} (a[j]/h[j-1])/(j-m).
std::vector<double> occupancy(int n, const HarmonicTable& ht);

// Divide-and-conquer online convolution (FFT over the 1/(j-m) kernel),
// O(n log^2 n); must agree with the reference to 1e-8 (tested on n <= 1e4).
std::vector<double> occupancy_fast(int n, const HarmonicTable& ht);

// ---------------------------------------------------------------------------
// Length constant and fringe chain.
// ---------------------------------------------------------------------------

// lhat(n) = sum_{m=2..n} a(n,m)/(m h[m-1]), the truncated mean-length-per-leaf
// series with a(n,.) standing in for the limiting occupation probabilities.
double length_constant(const std::vector<double>& occ, const HarmonicTable& ht);

// First-order estimate of the mass the truncation at n discards, from the
// a_m ~ (6/pi^2) (log m)/m asymptotic: integrates to (6/pi^2)/n.
double length_constant_tail_estimate(int n);

struct FringePmf {
  int from = 0;                  // state i
  std::vector<double> pmf;      // renormalized over j in (i, n]; index = j
  double raw_mass = 0.0;        // sum before renormalization
  double truncation_mass = 0.0; // 1 - raw_mass
  bool truncation_warning = false;  // raw mass lost > 5%
};

// Upward fringe transition row from state i with horizon n = occ.size()-1:
//   q_up(i,j) = (i a(n,j))/(j a(n,i)) (q(j,i) + q(j,j-i)).
FringePmf fringe_up_pmf(int i, const std::vector<double>& occ, const HarmonicTable& ht);

// Upward walk from a leaf: `levels` size jumps (ended early, with the flag
// set, when a jump would overshoot the horizon), each jump dressed with an
// independent shape-only subtree for the sibling clade and a fair side flag.
struct FringeSample {
  std::vector<int> sizes;            // 1 = s0 < s1 < ... (strictly increasing)
  std::vector<CladeTree> siblings;   // step s_{j-1} -> s_j carries a sibling shape on s_j - s_{j-1} leaves
  std::vector<int> sibling_on_left;  // 1 if the sibling clade sits left of the path
  bool truncated = false;
};

FringeSample sample_fringe(int levels, const std::vector<double>& occ,
                           const HarmonicTable& ht, Rng& rng);

// Assemble a fringe walk into one shape-only clade tree: the largest sampled
// size becomes the root, each sibling hangs on its recorded side, and the
// starting leaf sits at the bottom of the path.
CladeTree fringe_to_clade_tree(const FringeSample& sample);

// ---------------------------------------------------------------------------
// Drift/variance sums of the logarithmic chain and the penultimate-clade
// trend diagnostics.
// ---------------------------------------------------------------------------

struct DriftVariance {
  double a = 0.0;  // sum_{i<j} (log i - log j)/(j-i)   -> -pi^2/6
  double b = 0.0;  // sum_{i<j} (log i - log j)^2/(j-i) -> 2 zeta(3)
};

DriftVariance drift_variance(int j);

// Tail of the limiting jump measure: psi[a, inf) = -log(1 - e^{-a}).
// (Defined in splitlaw.hpp as levy_tail.)

// b_j = (pi^2/6) j a(n,j) - log j evaluated on a grid of j values.
std::vector<double> c1_trend(const std::vector<double>& occ, const std::vector<int>& grid);

// Log-spaced grid 10 = j0 < ... <= max_j with about `points` entries.
std::vector<int> log_grid(int lo, int hi, int points);

// ---------------------------------------------------------------------------
// Lazy two-leaf sampler: the joint law of (height of leaf A, height of leaf
// B, their branchpoint height) for two distinct uniform leaves of the timed
// tree on n leaves, generated by following only the clade that contains both
// leaves and then two independent absorption chains. Exact, O(log^2 n).
// ---------------------------------------------------------------------------

struct TwoLeafSample {
  double h1 = 0.0;
  double h2 = 0.0;
  double branchpoint = 0.0;
};

TwoLeafSample sample_two_leaf(int n, const HarmonicTable& ht, Rng& rng);

}  // namespace betasplit
