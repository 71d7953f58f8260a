#pragma once

#include <string>
#include <vector>

#include "betasplit/clade_tree.hpp"

namespace betasplit {

// Heights of all leaves in left-to-right order: each leaf's height is the sum
// of the hold times of its proper ancestors (the time at which the leaf's
// singleton clade is born).  On an untimed tree every height is 0.
std::vector<double> leaf_heights(const CladeTree& tree);

// Hop depth of all leaves in left-to-right order: the number of splits on the
// root path, i.e. the leaf's depth in the binary tree.
std::vector<int> leaf_hops(const CladeTree& tree);

// Height at which leaves u and v (0-based, left-to-right) stop sharing a
// clade: the split time of the last clade containing both.
// Throws std::domain_error if u == v or either index is out of range.
double branchpoint_height(const CladeTree& tree, int u, int v);

// Sum of the squared sizes of the clades alive at time t.  A clade of size
// >= 2 is alive on [birth, birth + hold); a singleton is alive from its birth
// onward.  Right-continuous and decreasing in t, from n^2 at t = 0 down to n.
double sum_squares_at(const CladeTree& tree, double t);

// Total branch length: the sum of hold times over clades of size >= 2 (each
// such clade persists for its hold and contributes one edge of that length).
double total_length(const CladeTree& tree);

// Power sum over internal clades: sum of size^p over every clade of size >= 2.
// p = 1 recovers the sum of all leaf hop depths exactly.
double power_sum(const CladeTree& tree, double p);

struct HopExtremes {
  int max_hops = 0;     // deepest leaf's hop count
  int greedy_hops = 0;  // hop count of the path that always enters the larger sub-clade
  int greedy_ties = 0;  // number of equal-size splits met on that path (tie -> left)
};

// Extremal hop paths: the deepest leaf, and the path following the larger
// sub-clade at every split (ties break left and are counted).
HopExtremes hop_extremes(const CladeTree& tree);

// Drawing level of every clade, indexed by arena position: 0 for a leaf,
// otherwise 1 + max over the two children.  The root's value equals the
// deepest leaf's hop count.
std::vector<int> draw_heights(const CladeTree& tree);

struct WidthProfile {
  std::vector<long long> w;     // w[h] = number of parent->child edges with dh(child) <= h < dh(parent), h in [0, root_dh)
  long long drawn_length = 0;   // sum of w[h] = total vertical ink in the cladogram layout
  int root_dh = 0;              // drawing level of the root
};

// Width profile of the cladogram layout implied by draw_heights: how many
// vertical lines cross each integer level.  w[0] equals the leaf count when
// n >= 2; levels at or above the root's own dh have width 0 and are omitted.
WidthProfile width_profile(const CladeTree& tree);

struct TreeStats {
  int n = 0;
  double max_height = 0.0;            // deepest leaf height
  double mean_height = 0.0;           // average leaf height
  double total_length = 0.0;          // sum of internal holds
  double mean_hops = 0.0;             // average leaf hop depth
  HopExtremes hops;                   // max / greedy hop paths
  std::vector<double> power_sums;     // aligned with the requested exponents
  int root_dh = 0;
  long long drawn_length = 0;
};

// One pass over the tree collecting the scalar summaries above; `powers`
// selects which power sums to evaluate.
TreeStats compute_tree_stats(const CladeTree& tree, const std::vector<double>& powers);

// CSV header/row for per-replicate TreeStats emission; the header names the
// power-sum columns after their exponents (e.g. "s_2" for p = 2).
std::string stats_csv_header(const std::vector<double>& powers);
std::string stats_csv_row(const TreeStats& s);

}  // namespace betasplit
