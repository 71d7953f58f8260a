#pragma once

#include <string>
#include <vector>

#include "betasplit/clade_tree.hpp"

namespace betasplit {

// Render a histogram of `samples` into a self-contained 600x400 SVG string.
// Bin count follows the Freedman-Diaconis rule (2*IQR/n^(1/3)), clamped to
// [1, 200]; bars show empirical density.  When `overlay_standard_normal` is
// set, the standard normal density is drawn on top (for standardized data).
std::string histogram_svg(const std::vector<double>& samples, const std::string& title,
                          bool overlay_standard_normal);

// Render a shape-only cladogram into a 600x400 SVG string.  Layout: each
// clade's horizontal bar sits at its drawing level (leaf = 0, parent = 1 +
// max of children), each child hangs from a vertical line at the midpoint of
// its leaf interval.  For display the larger sub-clade is put on the right;
// equal sizes keep their stored order.
std::string cladogram_svg(const CladeTree& tree, const std::string& title);

}  // namespace betasplit
