#include "betasplit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace betasplit {

namespace {

struct HeightFrame {
  int node;
  double above;  // sum of holds of proper ancestors
};

void append_number(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

}  // namespace

std::vector<double> leaf_heights(const CladeTree& tree) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(tree.n_leaves()));
  std::vector<HeightFrame> stack;
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const HeightFrame f = stack.back();
    stack.pop_back();
    if (tree.is_leaf(f.node)) {
      out.push_back(f.above);
      continue;
    }
    const double below = f.above + tree.hold[f.node];
    stack.push_back({tree.right_child(f.node), below});
    stack.push_back({tree.left_child(f.node), below});
  }
  return out;
}

std::vector<int> leaf_hops(const CladeTree& tree) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(tree.n_leaves()));
  struct Frame {
    int node;
    int depth;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (tree.is_leaf(f.node)) {
      out.push_back(f.depth);
      continue;
    }
    stack.push_back({tree.right_child(f.node), f.depth + 1});
    stack.push_back({tree.left_child(f.node), f.depth + 1});
  }
  return out;
}

double branchpoint_height(const CladeTree& tree, int u, int v) {
  const int n = tree.n_leaves();
  if (u < 0 || v < 0 || u >= n || v >= n) {
    throw std::domain_error("branchpoint_height: leaf index out of range");
  }
  if (u == v) throw std::domain_error("branchpoint_height: need two distinct leaves");
  int node = 0;
  double above = 0.0;
  for (;;) {
    const int left_size = tree.left[node];
    const bool u_left = u < left_size;
    const bool v_left = v < left_size;
    if (u_left != v_left) return above + tree.hold[node];
    above += tree.hold[node];
    if (u_left) {
      node = tree.left_child(node);
    } else {
      u -= left_size;
      v -= left_size;
      node = tree.right_child(node);
    }
  }
}

double sum_squares_at(const CladeTree& tree, double t) {
  struct Frame {
    int node;
    double birth;
  };
  double total = 0.0;
  std::vector<Frame> stack;
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.birth > t) continue;
    if (tree.is_leaf(f.node)) {
      total += 1.0;
      continue;
    }
    const double death = f.birth + tree.hold[f.node];
    if (t < death) {
      const double s = tree.size[f.node];
      total += s * s;
    } else {
      stack.push_back({tree.right_child(f.node), death});
      stack.push_back({tree.left_child(f.node), death});
    }
  }
  return total;
}

double total_length(const CladeTree& tree) {
  double sum = 0.0;
  const int m = tree.n_nodes();
  for (int v = 0; v < m; ++v) {
    if (!tree.is_leaf(v)) sum += tree.hold[v];
  }
  return sum;
}

double power_sum(const CladeTree& tree, double p) {
  double sum = 0.0;
  const int m = tree.n_nodes();
  for (int v = 0; v < m; ++v) {
    if (!tree.is_leaf(v)) sum += std::pow(static_cast<double>(tree.size[v]), p);
  }
  return sum;
}

HopExtremes hop_extremes(const CladeTree& tree) {
  HopExtremes out;
  const std::vector<int> hops = leaf_hops(tree);
  out.max_hops = *std::max_element(hops.begin(), hops.end());
  int node = 0;
  while (!tree.is_leaf(node)) {
    const int left_size = tree.left[node];
    const int right_size = tree.size[node] - left_size;
    if (left_size == right_size) ++out.greedy_ties;
    node = (left_size >= right_size) ? tree.left_child(node) : tree.right_child(node);
    ++out.greedy_hops;
  }
  return out;
}

std::vector<int> draw_heights(const CladeTree& tree) {
  const int m = tree.n_nodes();
  std::vector<int> dh(static_cast<std::size_t>(m), 0);
  // The arena is in preorder, so children sit at higher indices than their
  // parent; one reverse sweep resolves every clade after its children.
  for (int v = m - 1; v >= 0; --v) {
    if (!tree.is_leaf(v)) {
      dh[v] = 1 + std::max(dh[tree.left_child(v)], dh[tree.right_child(v)]);
    }
  }
  return dh;
}

WidthProfile width_profile(const CladeTree& tree) {
  const std::vector<int> dh = draw_heights(tree);
  WidthProfile out;
  out.root_dh = dh[0];
  if (out.root_dh == 0) return out;
  // Each parent->child edge spans drawing levels [dh(child), dh(parent));
  // accumulate the spans with a difference array and prefix-sum it.
  std::vector<long long> diff(static_cast<std::size_t>(out.root_dh) + 1, 0);
  const int m = tree.n_nodes();
  for (int v = 0; v < m; ++v) {
    if (tree.is_leaf(v)) continue;
    diff[dh[tree.left_child(v)]] += 1;
    diff[dh[tree.right_child(v)]] += 1;
    diff[dh[v]] -= 2;
  }
  out.w.resize(static_cast<std::size_t>(out.root_dh));
  long long run = 0;
  for (int h = 0; h < out.root_dh; ++h) {
    run += diff[h];
    out.w[h] = run;
    out.drawn_length += run;
  }
  return out;
}

TreeStats compute_tree_stats(const CladeTree& tree, const std::vector<double>& powers) {
  TreeStats s;
  s.n = tree.n_leaves();
  const std::vector<double> heights = leaf_heights(tree);
  const std::vector<int> hops = leaf_hops(tree);
  double hsum = 0.0;
  for (double h : heights) {
    hsum += h;
    if (h > s.max_height) s.max_height = h;
  }
  s.mean_height = hsum / s.n;
  long long hopsum = 0;
  for (int h : hops) hopsum += h;
  s.mean_hops = static_cast<double>(hopsum) / s.n;
  s.total_length = total_length(tree);
  s.hops = hop_extremes(tree);
  s.power_sums.reserve(powers.size());
  for (double p : powers) s.power_sums.push_back(power_sum(tree, p));
  const WidthProfile wp = width_profile(tree);
  s.root_dh = wp.root_dh;
  s.drawn_length = wp.drawn_length;
  return s;
}

std::string stats_csv_header(const std::vector<double>& powers) {
  std::string out =
      "n,max_height,mean_height,total_length,mean_hops,max_hops,greedy_hops,greedy_ties,"
      "root_dh,drawn_length";
  for (double p : powers) {
    out += ",s_";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p);
    out += buf;
  }
  return out;
}

std::string stats_csv_row(const TreeStats& s) {
  std::string out = std::to_string(s.n);
  out += ',';
  append_number(out, s.max_height);
  out += ',';
  append_number(out, s.mean_height);
  out += ',';
  append_number(out, s.total_length);
  out += ',';
  append_number(out, s.mean_hops);
  out += ',';
  out += std::to_string(s.hops.max_hops);
  out += ',';
  out += std::to_string(s.hops.greedy_hops);
  out += ',';
  out += std::to_string(s.hops.greedy_ties);
  out += ',';
  out += std::to_string(s.root_dh);
  out += ',';
  out += std::to_string(s.drawn_length);
  for (double v : s.power_sums) {
    out += ',';
    append_number(out, v);
  }
  return out;
}

}  // namespace betasplit
