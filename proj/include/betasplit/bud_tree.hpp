#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "betasplit/clade_tree.hpp"

namespace betasplit {

enum class Side : std::uint8_t { left = 0, right = 1 };

// A leaf of the pruned representation that is attached to the interior of an
// edge, at `offset` from the edge's root-side end, hanging off `side`.
struct SideBud {
  double offset;
  Side side;
};

struct BudEdge {
  double length = 0.0;
  std::vector<SideBud> side_buds;  // strictly increasing offsets in (0, length)
  int child[2] = {-1, -1};         // arena indices; {-1,-1} marks a terminal bud-pair
  int bud_count = 0;               // buds carried by this edge's whole subtree
  bool is_terminal() const { return child[0] < 0; }
};

// Pruned tree: edges with positive lengths carrying side-buds, each edge
// ending in either an ordered (left, right) branch point or a terminal pair
// of buds. Left/right placement is structural; the two buds of a terminal
// pair are interchangeable. Counting every side-bud as an edge subdivision,
// a tree with k buds has exactly k-1 edges.
struct BudTree {
  std::vector<BudEdge> edges;  // edges[0] is the root edge
  int bud_total() const { return edges.empty() ? 0 : edges[0].bud_count; }
};

// Spanning tree of selected leaves inside a timed clade tree: a plain binary
// tree whose terminal edges run all the way to each selected leaf's own
// absorption height (so terminal edges may have zero length when every leaf
// is selected).
struct SpanningTree {
  struct Edge {
    double length = 0.0;
    int child[2] = {-1, -1};
    int leaf = -1;  // interval position of the selected leaf at a terminal edge
    bool is_terminal() const { return child[0] < 0; }
  };
  std::vector<Edge> edges;  // edges[0] is the root edge
};

// Exhaustive recount of the buds below each edge; the incremental counters
// kept by the growth step are checked against this in tests.
int count_buds(const BudTree& tree);
void refresh_bud_counts(BudTree& tree);

// Structural invariants: positive lengths, interior strictly sorted side-bud
// offsets, consistent bud counts, edge count = buds - 1. Throws on violation.
void validate_bud_tree(const BudTree& tree);

double total_edge_length(const BudTree& tree);
double total_edge_length(const SpanningTree& tree);

// Canonical structural key: depth-first over edges, recording each edge's
// side-bud sides in offset order ('l'/'r'), then 'p' for a terminal pair or
// the parenthesized pair of child keys. Two trees have equal keys iff they
// have the same shape with the same side flags (lengths ignored).
std::string shape_signature(const BudTree& tree);

// Lengths of the subdivided segments (between consecutive features along
// each edge) in the same depth-first order as shape_signature; for a tree
// with k buds this has exactly k-1 entries and sums to the total length.
std::vector<double> segment_lengths(const BudTree& tree);

// Root distance of every bud, in canonical bud order: depth-first over
// edges, each edge's side-buds by offset and then its terminal pair.
std::vector<double> bud_heights(const BudTree& tree);

// Height at which the root paths of two distinct buds part ways (for buds of
// one terminal pair: the pair's position).
double bud_branchpoint(const BudTree& tree, int bud_u, int bud_v);

// Cuts the subtree spanned by the selected leaves back to buds: a selected
// leaf's terminal branch is removed and replaced by a bud at the height
// where the leaf last shared a clade with another selected leaf. Keys:
// singleton-versus-rest splits become side-buds (on the singleton's side),
// singleton-versus-singleton splits become terminal pairs. Selecting all n
// leaves reproduces the tree itself in bud form. Requires a timed tree and
// k >= 2 distinct leaf positions.
BudTree prune(const CladeTree& tree, const std::vector<int>& leaves);

// Split history of the selected leaves (k >= 1), each followed to its own
// absorption height.
SpanningTree spanning_tree(const CladeTree& tree, const std::vector<int>& leaves);

// The same cut-back operation applied to an already-extracted spanning tree;
// composing spanning_tree then prune_spanning matches prune directly.
BudTree prune_spanning(const SpanningTree& tree);

// CSV round trip: one row per edge in depth-first order,
// "length,termination,side_buds" where termination is 'pair' or 'branch' and
// side_buds packs "offset:side" items with ';'. 17 significant digits.
void write_bud_csv(const BudTree& tree, std::ostream& out);
BudTree read_bud_csv(std::istream& in);

}  // namespace betasplit
