#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "betasplit/clade_tree.hpp"
#include "betasplit/rng.hpp"

namespace betasplit {

struct PhyloNode {
  std::string name;            // empty when absent
  bool has_length = false;
  double length = 0.0;         // nonnegative when present
  std::vector<int> children;   // empty = leaf; 2+ = internal (1 is rejected by the grammar)
};

// Rooted tree with named leaves and optional branch lengths.  Node 0 is the
// root and children always follow their parent in the array.
struct PhyloTree {
  std::vector<PhyloNode> nodes;
  int leaf_count() const {
    int c = 0;
    for (const PhyloNode& v : nodes) c += v.children.empty() ? 1 : 0;
    return c;
  }
};

// Parse failure with the byte offset where it was detected.
struct NewickError : std::runtime_error {
  std::size_t offset;
  NewickError(const std::string& what, std::size_t off);
};

// Parse one statement of the grammar
//   tree    := subtree ';'
//   subtree := leaf | '(' subtree (',' subtree)+ ')' label?
//   label   := name? (':' length)?
// where names are unquoted runs of [A-Za-z0-9_.\-] or single-quoted with ''
// as the escaped quote, '[...]' comments and whitespace are skipped between
// tokens, and branch lengths are nonnegative decimals.  A leaf must carry a
// name or a length.  Only whitespace/comments may follow the ';'.
// Throws NewickError with a byte offset on any malformed input.
PhyloTree parse_newick(const std::string& text);

// Serialize back to Newick text (terminated by ';'); names outside the
// unquoted alphabet are single-quoted with '' escapes, and lengths are
// written with 17 significant digits so round trips are exact.
std::string serialize_newick(const PhyloTree& tree);

// Order-insensitive structural equality: same multiset of child subtrees at
// every node, matching names and branch lengths.
bool trees_isomorphic(const PhyloTree& a, const PhyloTree& b);

// Leaves named t1..tn left to right; with_lengths attaches each clade's own
// hold time as its branch length (leaves get 0).
PhyloTree phylo_from_clade_tree(const CladeTree& tree, bool with_lengths);

struct SplitRecord {
  int m;        // leaves under the (binary) internal node
  int smaller;  // min of the two child leaf counts
};

struct SplitStats {
  std::vector<SplitRecord> splits;  // binary internal nodes only
  int leaf_count = 0;
  int binary_count = 0;
  int polytomy_count = 0;           // counted and excluded from `splits`
  int root_dh = 0;                  // drawing level of the root (leaf = 0, else 1 + max child)
  // Median smaller side per power-of-two size bucket [2^b, 2^(b+1)), with the
  // bucket's median m; buckets with no splits are omitted.
  std::vector<double> bucket_m;
  std::vector<double> bucket_median_smaller;
  double alpha = 0.0;               // log-log slope fitted through the bucket medians
};

// Per-split balance records and the fitted growth exponent of the median
// smaller side (median ~ m^alpha).
SplitStats split_stats(const PhyloTree& tree);

// Shared fit used by split_stats and the model side of compare().
double fit_alpha(const std::vector<SplitRecord>& splits);

struct CompareReport {
  int n = 0;                      // data leaf count
  int reps = 0;
  double alpha_data = 0.0;
  double alpha_model_mean = 0.0;
  double alpha_model_sd = 0.0;
  double hops_ks_stat = 0.0;      // data leaf depths vs pooled simulated leaf depths
  double hops_ks_p = 1.0;
  int root_dh_data = 0;
  double root_dh_model_mean = 0.0;
  double root_dh_model_sd = 0.0;
  double root_dh_z = 0.0;
  bool flag_imbalance = false;    // alpha_data < 0.25
  bool flag_balance = false;      // alpha_data > 0.80
  bool pass = false;              // no flags, KS p > 0.01, |root_dh_z| < 4
};

// Descriptive comparison of a data tree against `reps` simulated trees with
// the same leaf count: balance exponent, leaf hop-depth law, root drawing
// level.  Requires >= 10 leaves.
CompareReport compare_to_model(const PhyloTree& data, int reps, Rng& rng);

}  // namespace betasplit
