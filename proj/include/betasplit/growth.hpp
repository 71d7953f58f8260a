#pragma once

#include <iosfwd>

#include "betasplit/bud_tree.hpp"
#include "betasplit/rng.hpp"

namespace betasplit {

enum class GrowthKind : int {
  side_bud = 0,             // a stop on the way to the target: new bud on an edge interior
  branch_extension = 1,     // a terminal-pair bud extended by a fresh branch
  side_leaf_extension = 2,  // a side-bud extended by a fresh branch
};

struct GrowthRecord {
  GrowthKind kind;
  int target_bud;     // canonical index of the chosen bud, before the step
  int edge;           // edge where the change landed
  double offset;      // stop point (side_bud), old endpoint (branch ext.), bud offset (side-leaf ext.)
  double new_length;  // fresh branch length for the extension kinds, else 0
  Side side;          // side of the inserted side-bud, or of the fresh branch
};

// The two-bud starting tree: a single edge of Exponential(1) length ending
// in a terminal bud-pair.
BudTree start_tree(Rng& rng);

// One step of the inductive construction on a tree with k buds: pick a
// uniform bud; walk the root path toward it, stopping at rate 1/m per unit
// length where m counts the buds strictly beyond the current point; a stop
// inserts a side-bud there on a coin-flip side, and reaching the target
// extends it by a fresh Exponential(1) branch ending in a bud-pair (a
// terminal-pair target leaves its partner behind as a coin-flip side-bud; a
// side-bud target sends the new branch to its own recorded side). Every step
// adds exactly one bud and one subdivided edge.
GrowthRecord grow_step(BudTree& tree, Rng& rng);

// Runs the construction from the two-bud tree up to n buds (n >= 2). The
// result matches the timed clade-tree sampler in distribution.
BudTree grow(int n, Rng& rng);

struct KindProbabilities {
  double side_bud = 0.0;
  double branch_extension = 0.0;
  double side_leaf_extension = 0.0;
};

// Exact one-step kind probabilities for a given tree, by integrating the
// stop hazard along every bud's root path (test oracle and reporting aid).
KindProbabilities kind_probabilities_exact(const BudTree& tree);

// CSV header + row writer for streaming GrowthRecord traces.
void write_growth_trace_header(std::ostream& out);
void write_growth_trace_row(int step, const GrowthRecord& rec, std::ostream& out);

}  // namespace betasplit
