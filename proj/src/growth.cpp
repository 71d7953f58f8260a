#include "betasplit/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace betasplit {

BudTree start_tree(Rng& rng) {
  BudTree t;
  BudEdge e;
  e.length = rng.exponential(1.0);
  e.bud_count = 2;
  t.edges.push_back(e);
  return t;
}

GrowthRecord grow_step(BudTree& tree, Rng& rng) {
  const int k = tree.bud_total();
  if (k < 2) throw std::domain_error("grow_step: need at least two buds");

  // Choose the target bud and record the root path of edges to it.
  int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  const int target_bud = r;
  std::vector<int> path;
  int target_slot = -1;  // side-bud index on the final edge, or S / S+1 for the pair
  {
    int e = 0;
    for (;;) {
      path.push_back(e);
      const BudEdge& edge = tree.edges[e];
      const int s = static_cast<int>(edge.side_buds.size());
      if (r < s) {
        target_slot = r;
        break;
      }
      r -= s;
      if (edge.is_terminal()) {
        target_slot = s + r;
        break;
      }
      const int c0 = edge.child[0];
      if (r < tree.edges[c0].bud_count) {
        e = c0;
      } else {
        r -= tree.edges[c0].bud_count;
        e = edge.child[1];
      }
    }
  }

  // Walk toward the target. On the segment beyond which m buds remain the
  // stop hazard is (segment length)/m; a fresh Exponential(1) budget is spent
  // against the accumulated hazard, giving the exact stop point by inversion.
  double budget = rng.exponential(1.0);
  int stop_edge = -1;
  double stop_offset = 0.0;
  for (std::size_t pi = 0; pi < path.size() && stop_edge < 0; ++pi) {
    const int f = path[pi];
    const BudEdge& edge = tree.edges[f];
    const bool last = (pi + 1 == path.size());
    const int s = static_cast<int>(edge.side_buds.size());
    const bool to_side_bud = last && target_slot < s;
    const int passed = to_side_bud ? target_slot : s;
    double prev = 0.0;
    int m = edge.bud_count;
    for (int j = 0; j <= passed; ++j) {
      const double seg_end = (j < passed) ? edge.side_buds[j].offset
                           : to_side_bud  ? edge.side_buds[target_slot].offset
                                          : edge.length;
      const double hazard = (seg_end - prev) / m;
      if (budget < hazard) {
        double x = prev + budget * m;
        // Keep the stop strictly inside the open segment despite rounding.
        x = std::max(x, std::nextafter(prev, seg_end));
        x = std::min(x, std::nextafter(seg_end, prev));
        stop_edge = f;
        stop_offset = x;
        break;
      }
      budget -= hazard;
      prev = seg_end;
      m -= 1;
    }
  }

  if (stop_edge >= 0) {
    const Side side = rng.coin() ? Side::right : Side::left;
    BudEdge& edge = tree.edges[stop_edge];
    const auto it = std::lower_bound(
        edge.side_buds.begin(), edge.side_buds.end(), stop_offset,
        [](const SideBud& b, double x) { return b.offset < x; });
    edge.side_buds.insert(it, SideBud{stop_offset, side});
    for (int g : path) {
      tree.edges[g].bud_count += 1;
      if (g == stop_edge) break;
    }
    return {GrowthKind::side_bud, target_bud, stop_edge, stop_offset, 0.0, side};
  }

  const int f = path.back();
  const double fresh = rng.exponential(1.0);
  if (target_slot >= static_cast<int>(tree.edges[f].side_buds.size())) {
    // The target is a terminal-pair bud: extend the edge straight through its
    // old endpoint, leaving the partner bud behind as a side-bud there.
    const Side side = rng.coin() ? Side::right : Side::left;
    BudEdge& edge = tree.edges[f];
    const double old_len = edge.length;
    edge.side_buds.push_back({old_len, side});
    edge.length = old_len + fresh;
    for (int g : path) tree.edges[g].bud_count += 1;
    return {GrowthKind::branch_extension, target_bud, f, old_len, fresh, side};
  }

  // The target is a side-bud: split its edge there into a branch point whose
  // new branch takes the bud's recorded side, the continuation the other.
  const int t = target_slot;
  const SideBud sb = tree.edges[f].side_buds[t];
  const int cont_idx = static_cast<int>(tree.edges.size());
  tree.edges.emplace_back();
  const int knob_idx = static_cast<int>(tree.edges.size());
  tree.edges.emplace_back();
  BudEdge& self = tree.edges[f];
  BudEdge& cont = tree.edges[cont_idx];
  BudEdge& knob = tree.edges[knob_idx];
  cont.length = self.length - sb.offset;
  cont.side_buds.assign(self.side_buds.begin() + t + 1, self.side_buds.end());
  for (SideBud& b : cont.side_buds) b.offset -= sb.offset;
  cont.child[0] = self.child[0];
  cont.child[1] = self.child[1];
  cont.bud_count = self.bud_count - (t + 1);
  knob.length = fresh;
  knob.bud_count = 2;
  self.length = sb.offset;
  self.side_buds.resize(static_cast<std::size_t>(t));
  if (sb.side == Side::left) {
    self.child[0] = knob_idx;
    self.child[1] = cont_idx;
  } else {
    self.child[0] = cont_idx;
    self.child[1] = knob_idx;
  }
  for (int g : path) tree.edges[g].bud_count += 1;
  return {GrowthKind::side_leaf_extension, target_bud, f, sb.offset, fresh, sb.side};
}

BudTree grow(int n, Rng& rng) {
  if (n < 2) throw std::domain_error("grow: need n >= 2");
  BudTree t = start_tree(rng);
  for (int k = 2; k < n; ++k) grow_step(t, rng);
  return t;
}

KindProbabilities kind_probabilities_exact(const BudTree& tree) {
  const int k = tree.bud_total();
  if (k < 2) throw std::domain_error("kind_probabilities_exact: need at least two buds");
  double sum_pair = 0.0;
  double sum_side = 0.0;
  std::vector<std::pair<int, double>> stack{{0, 0.0}};
  while (!stack.empty()) {
    const auto [e, h0] = stack.back();
    stack.pop_back();
    const BudEdge& edge = tree.edges[e];
    double h = h0;
    double prev = 0.0;
    int m = edge.bud_count;
    for (const SideBud& b : edge.side_buds) {
      h += (b.offset - prev) / m;
      sum_side += std::exp(-h);
      prev = b.offset;
      m -= 1;
    }
    h += (edge.length - prev) / m;
    if (edge.is_terminal()) {
      sum_pair += 2.0 * std::exp(-h);
    } else {
      stack.emplace_back(edge.child[0], h);
      stack.emplace_back(edge.child[1], h);
    }
  }
  KindProbabilities p;
  p.branch_extension = sum_pair / k;
  p.side_leaf_extension = sum_side / k;
  p.side_bud = 1.0 - p.branch_extension - p.side_leaf_extension;
  return p;
}

void write_growth_trace_header(std::ostream& out) {
  out << "step,kind,target_bud,edge,offset,new_length,side\n";
}

void write_growth_trace_row(int step, const GrowthRecord& rec, std::ostream& out) {
  static const char* const names[] = {"side_bud", "branch_extension", "side_leaf_extension"};
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%s,%d,%d,%.17g,%.17g,%c\n", step,
                names[static_cast<int>(rec.kind)], rec.target_bud, rec.edge, rec.offset,
                rec.new_length, rec.side == Side::left ? 'l' : 'r');
  out << buf;
}

}  // namespace betasplit
