#include "betasplit/clade_tree.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "betasplit/splitlaw.hpp"

namespace betasplit {

namespace {

CladeTree sample_tree(int n, const HarmonicTable& ht, Rng& rng, bool timed) {
  if (n < 1) throw std::domain_error("tree sampler: need n >= 1");
  CladeTree tree;
  tree.timed = timed;
  const int nodes = 2 * n - 1;
  tree.size.reserve(nodes);
  tree.left.reserve(nodes);
  tree.hold.reserve(nodes);
  std::vector<std::int32_t> pending;  // clade sizes awaiting emission, preorder
  pending.push_back(n);
  while (!pending.empty()) {
    const std::int32_t m = pending.back();
    pending.pop_back();
    if (m == 1) {
      tree.size.push_back(1);
      tree.left.push_back(0);
      tree.hold.push_back(0.0);
      continue;
    }
    const std::int32_t i = static_cast<std::int32_t>(sample_split(m, ht, rng));
    tree.size.push_back(m);
    tree.left.push_back(i);
    tree.hold.push_back(timed ? rng.exponential(ht.h(m - 1)) : 0.0);
    pending.push_back(m - i);  // right subtree, emitted second
    pending.push_back(i);      // left subtree, emitted next
  }
  return tree;
}

}  // namespace

CladeTree sample_dtcs(int n, const HarmonicTable& ht, Rng& rng) {
  return sample_tree(n, ht, rng, false);
}

CladeTree sample_ctcs(int n, const HarmonicTable& ht, Rng& rng) {
  return sample_tree(n, ht, rng, true);
}

std::vector<int> clades_at(const CladeTree& tree, double t) {
  if (!tree.timed) throw std::logic_error("clades_at: tree has no waiting times");
  if (!(t >= 0.0)) throw std::domain_error("clades_at: need t >= 0");
  std::vector<int> alive;
  if (tree.n_nodes() == 0) return alive;
  struct Frame {
    int node;
    double birth;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.birth > t) continue;  // nothing below is born yet
    if (tree.is_leaf(f.node)) {
      alive.push_back(1);
      continue;
    }
    const double death = f.birth + tree.hold[f.node];
    if (t < death) {
      alive.push_back(tree.size[f.node]);
      continue;
    }
    stack.push_back({tree.right_child(f.node), death});
    stack.push_back({tree.left_child(f.node), death});
  }
  return alive;
}

namespace {

// Emit the subtree of a fixed split rule in preorder; `split` maps a clade
// size m >= 2 to its left part in [1, m-1].
void emit_fixed_shape(CladeTree& out, int m, int (*split)(int)) {
  std::vector<int> todo = {m};
  while (!todo.empty()) {
    const int s = todo.back();
    todo.pop_back();
    if (s == 1) {
      out.size.push_back(1);
      out.left.push_back(0);
      out.hold.push_back(0.0);
      continue;
    }
    const int i = split(s);
    out.size.push_back(s);
    out.left.push_back(i);
    out.hold.push_back(0.0);
    todo.push_back(s - i);
    todo.push_back(i);
  }
}

CladeTree fixed_shape(int n, int (*split)(int)) {
  if (n < 1) throw std::domain_error("shape builder: need n >= 1");
  CladeTree t;
  t.timed = false;
  t.size.reserve(2 * static_cast<std::size_t>(n) - 1);
  t.left.reserve(2 * static_cast<std::size_t>(n) - 1);
  t.hold.reserve(2 * static_cast<std::size_t>(n) - 1);
  emit_fixed_shape(t, n, split);
  return t;
}

}  // namespace

CladeTree caterpillar_tree(int n) {
  return fixed_shape(n, [](int) { return 1; });
}

CladeTree balanced_tree(int n) {
  return fixed_shape(n, [](int m) { return m / 2; });
}

void validate_tree(const CladeTree& tree) {
  const int nodes = tree.n_nodes();
  if (static_cast<int>(tree.left.size()) != nodes ||
      static_cast<int>(tree.hold.size()) != nodes) {
    throw std::runtime_error("tree: parallel arrays disagree in length");
  }
  if (nodes == 0) return;
  for (int v = 0; v < nodes; ++v) {
    if (tree.size[v] < 1) throw std::runtime_error("tree: node " + std::to_string(v) + " has size < 1");
    if (!(tree.hold[v] >= 0.0)) throw std::runtime_error("tree: node " + std::to_string(v) + " has negative waiting time");
    if (tree.left[v] == 0) {
      if (tree.size[v] != 1) throw std::runtime_error("tree: node " + std::to_string(v) + " marked leaf but has size > 1");
      if (tree.hold[v] != 0.0) throw std::runtime_error("tree: leaf " + std::to_string(v) + " has nonzero waiting time");
      continue;
    }
    if (tree.left[v] < 0 || tree.left[v] >= tree.size[v]) {
      throw std::runtime_error("tree: node " + std::to_string(v) + " has left part outside 1..size-1");
    }
    const int lc = tree.left_child(v);
    const int rc = tree.right_child(v);
    if (rc >= nodes) throw std::runtime_error("tree: node " + std::to_string(v) + " points past the end");
    if (tree.size[lc] != tree.left[v]) {
      throw std::runtime_error("tree: node " + std::to_string(v) + " disagrees with its left child size");
    }
    if (tree.size[rc] != tree.size[v] - tree.left[v]) {
      throw std::runtime_error("tree: node " + std::to_string(v) + " disagrees with its right child size");
    }
  }
  // Preorder packing: the whole array must be exactly the root's subtree.
  if (2 * tree.size[0] - 1 != nodes) {
    throw std::runtime_error("tree: node count does not match root size");
  }
}

void write_tree_csv(const CladeTree& tree, std::ostream& out) {
  if (tree.timed) {
    out << "size,left_size,hold_time\n";
    char buf[64];
    for (int v = 0; v < tree.n_nodes(); ++v) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", tree.size[v], tree.left[v], tree.hold[v]);
      out << buf;
    }
  } else {
    out << "size,left_size\n";
    for (int v = 0; v < tree.n_nodes(); ++v) {
      out << tree.size[v] << ',' << tree.left[v] << '\n';
    }
  }
}

CladeTree read_tree_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("tree csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool timed;
  if (line == "size,left_size,hold_time") {
    timed = true;
  } else if (line == "size,left_size") {
    timed = false;
  } else {
    throw std::runtime_error("tree csv: unrecognized header '" + line + "'");
  }
  CladeTree tree;
  tree.timed = timed;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long size = 0, left = 0;
    double hold = 0.0;
    int consumed = 0;
    const int want = timed ? 3 : 2;
    const int got = timed
        ? std::sscanf(line.c_str(), "%ld,%ld,%lf%n", &size, &left, &hold, &consumed)
        : std::sscanf(line.c_str(), "%ld,%ld%n", &size, &left, &consumed);
    if (got != want || line.c_str()[consumed] != '\0') {
      throw std::runtime_error("tree csv: malformed row " + std::to_string(row));
    }
    tree.size.push_back(static_cast<std::int32_t>(size));
    tree.left.push_back(static_cast<std::int32_t>(left));
    tree.hold.push_back(hold);
  }
  validate_tree(tree);
  return tree;
}

}  // namespace betasplit
