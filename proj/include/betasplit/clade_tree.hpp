#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "betasplit/harmonic.hpp"
#include "betasplit/rng.hpp"

namespace betasplit {

// Binary tree of nested clades stored as parallel preorder arrays.
//
// Node v covers size[v] leaves; left[v] is the leaf count of its left child
// (0 iff v is a leaf). In preorder the left child of an internal v is v+1 and
// the right child is v + 2*left[v] (a subtree on k leaves occupies 2k-1
// consecutive slots). hold[v] is the waiting time between the birth of clade
// v and its split; leaves hold forever and store 0. Untimed (shape-only)
// trees store 0 everywhere and set timed = false.
struct CladeTree {
  std::vector<std::int32_t> size;
  std::vector<std::int32_t> left;
  std::vector<double> hold;
  bool timed = false;

  int n_nodes() const { return static_cast<int>(size.size()); }
  int n_leaves() const { return size.empty() ? 0 : size[0]; }
  bool is_leaf(int v) const { return left[v] == 0; }
  int left_child(int v) const { return v + 1; }
  int right_child(int v) const { return v + 2 * left[v]; }
};

// Shape-only sampler: recursively splits every clade of m >= 2 leaves by the
// 1/(i(m-i)) split law until all clades are singletons.
CladeTree sample_dtcs(int n, const HarmonicTable& ht, Rng& rng);

// Timed sampler: same shapes, and every clade of m >= 2 leaves additionally
// waits an independent Exponential(h[m-1]) time before splitting.
CladeTree sample_ctcs(int n, const HarmonicTable& ht, Rng& rng);

// Sizes of the clades alive at time t >= 0 in a timed tree: clade v is alive
// on [birth(v), birth(v) + hold[v]) and singletons stay alive forever after
// birth. Throws std::logic_error on untimed trees.
std::vector<int> clades_at(const CladeTree& tree, double t);

// Deterministic shape builders (untimed, every hold 0), mostly for tests and
// comparisons: the caterpillar splits one leaf off at every level; the
// balanced tree halves each clade (floor/ceil on odd sizes).
CladeTree caterpillar_tree(int n);
CladeTree balanced_tree(int n);

// Checks structural invariants (index bounds, size bookkeeping, nonnegative
// waiting times); throws std::runtime_error describing the first violation.
void validate_tree(const CladeTree& tree);

// CSV round trip, one preorder node per row. Timed trees write
// "size,left_size,hold_time" rows; untimed trees omit the third column.
// Doubles are written with 17 significant digits so the round trip is exact.
void write_tree_csv(const CladeTree& tree, std::ostream& out);
CladeTree read_tree_csv(std::istream& in);

}  // namespace betasplit
