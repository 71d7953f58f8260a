#include "betasplit/bud_tree.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace betasplit {

namespace {

int recount(const BudTree& tree, int e) {
  const BudEdge& edge = tree.edges[e];
  int c = static_cast<int>(edge.side_buds.size());
  if (edge.is_terminal()) return c + 2;
  return c + recount(tree, edge.child[0]) + recount(tree, edge.child[1]);
}

int refresh(BudTree& tree, int e) {
  BudEdge& edge = tree.edges[e];
  int c = static_cast<int>(edge.side_buds.size());
  if (!edge.is_terminal()) {
    c += refresh(tree, edge.child[0]) + refresh(tree, edge.child[1]);
  } else {
    c += 2;
  }
  edge.bud_count = c;
  return c;
}

// A bud is addressed by its edge and a slot: slots [0, S) are the edge's
// side-buds in offset order; slots S and S+1 are the terminal pair.
struct BudRef {
  int edge;
  int slot;
};

void enumerate_from(const BudTree& tree, int e, std::vector<BudRef>& out) {
  const BudEdge& edge = tree.edges[e];
  const int s = static_cast<int>(edge.side_buds.size());
  for (int i = 0; i < s; ++i) out.push_back({e, i});
  if (edge.is_terminal()) {
    out.push_back({e, s});
    out.push_back({e, s + 1});
  } else {
    enumerate_from(tree, edge.child[0], out);
    enumerate_from(tree, edge.child[1], out);
  }
}

std::vector<BudRef> enumerate_buds(const BudTree& tree) {
  std::vector<BudRef> out;
  out.reserve(static_cast<std::size_t>(tree.bud_total()));
  enumerate_from(tree, 0, out);
  return out;
}

// Distance from the root-side start of the bud's edge to the bud itself.
double bud_offset(const BudTree& tree, const BudRef& b) {
  const BudEdge& edge = tree.edges[b.edge];
  const int s = static_cast<int>(edge.side_buds.size());
  return b.slot < s ? edge.side_buds[b.slot].offset : edge.length;
}

}  // namespace

int count_buds(const BudTree& tree) {
  if (tree.edges.empty()) return 0;
  return recount(tree, 0);
}

void refresh_bud_counts(BudTree& tree) {
  if (!tree.edges.empty()) refresh(tree, 0);
}

void validate_bud_tree(const BudTree& tree) {
  if (tree.edges.empty()) throw std::runtime_error("bud tree: no edges");
  const int n_edges = static_cast<int>(tree.edges.size());
  std::vector<char> seen(tree.edges.size(), 0);
  std::vector<int> stack = {0};
  int visited = 0;
  int side_total = 0;
  while (!stack.empty()) {
    const int e = stack.back();
    stack.pop_back();
    if (e < 0 || e >= n_edges) throw std::runtime_error("bud tree: child index out of range");
    if (seen[e]) throw std::runtime_error("bud tree: edge " + std::to_string(e) + " reached twice");
    seen[e] = 1;
    ++visited;
    const BudEdge& edge = tree.edges[e];
    if (!(edge.length > 0.0)) throw std::runtime_error("bud tree: edge " + std::to_string(e) + " has nonpositive length");
    double prev = 0.0;
    for (const SideBud& b : edge.side_buds) {
      if (!(b.offset > prev) || !(b.offset < edge.length)) {
        throw std::runtime_error("bud tree: edge " + std::to_string(e) + " has side-buds out of order or outside the interior");
      }
      prev = b.offset;
    }
    side_total += static_cast<int>(edge.side_buds.size());
    if ((edge.child[0] < 0) != (edge.child[1] < 0)) {
      throw std::runtime_error("bud tree: edge " + std::to_string(e) + " has exactly one child");
    }
    if (!edge.is_terminal()) {
      stack.push_back(edge.child[1]);
      stack.push_back(edge.child[0]);
    }
  }
  if (visited != n_edges) throw std::runtime_error("bud tree: unreachable edges in arena");
  const int k = recount(tree, 0);
  if (k < 2) throw std::runtime_error("bud tree: fewer than two buds");
  for (int e = 0; e < n_edges; ++e) {
    if (tree.edges[e].bud_count != recount(tree, e)) {
      throw std::runtime_error("bud tree: stale bud count at edge " + std::to_string(e));
    }
  }
  if (n_edges + side_total != k - 1) {
    throw std::runtime_error("bud tree: subdivided edge count differs from buds - 1");
  }
}

double total_edge_length(const BudTree& tree) {
  double s = 0.0;
  for (const BudEdge& e : tree.edges) s += e.length;
  return s;
}

double total_edge_length(const SpanningTree& tree) {
  double s = 0.0;
  for (const SpanningTree::Edge& e : tree.edges) s += e.length;
  return s;
}

namespace {

void signature_from(const BudTree& tree, int e, std::string& out) {
  const BudEdge& edge = tree.edges[e];
  for (const SideBud& b : edge.side_buds) out += (b.side == Side::left) ? 'l' : 'r';
  if (edge.is_terminal()) {
    out += 'p';
  } else {
    out += '(';
    signature_from(tree, edge.child[0], out);
    out += ',';
    signature_from(tree, edge.child[1], out);
    out += ')';
  }
}

void segments_from(const BudTree& tree, int e, std::vector<double>& out) {
  const BudEdge& edge = tree.edges[e];
  double prev = 0.0;
  for (const SideBud& b : edge.side_buds) {
    out.push_back(b.offset - prev);
    prev = b.offset;
  }
  out.push_back(edge.length - prev);
  if (!edge.is_terminal()) {
    segments_from(tree, edge.child[0], out);
    segments_from(tree, edge.child[1], out);
  }
}

void heights_from(const BudTree& tree, int e, double base, std::vector<double>& out) {
  const BudEdge& edge = tree.edges[e];
  for (const SideBud& b : edge.side_buds) out.push_back(base + b.offset);
  const double end = base + edge.length;
  if (edge.is_terminal()) {
    out.push_back(end);
    out.push_back(end);
  } else {
    heights_from(tree, edge.child[0], end, out);
    heights_from(tree, edge.child[1], end, out);
  }
}

}  // namespace

std::string shape_signature(const BudTree& tree) {
  std::string out;
  if (!tree.edges.empty()) signature_from(tree, 0, out);
  return out;
}

std::vector<double> segment_lengths(const BudTree& tree) {
  std::vector<double> out;
  if (!tree.edges.empty()) segments_from(tree, 0, out);
  return out;
}

std::vector<double> bud_heights(const BudTree& tree) {
  std::vector<double> out;
  if (!tree.edges.empty()) heights_from(tree, 0, 0.0, out);
  return out;
}

double bud_branchpoint(const BudTree& tree, int bud_u, int bud_v) {
  const std::vector<BudRef> buds = enumerate_buds(tree);
  const int k = static_cast<int>(buds.size());
  if (bud_u < 0 || bud_u >= k || bud_v < 0 || bud_v >= k) {
    throw std::domain_error("bud_branchpoint: bud index out of range");
  }
  if (bud_u == bud_v) throw std::domain_error("bud_branchpoint: buds must be distinct");
  // Root paths (edge index sequences) of both buds' edges.
  const int n_edges = static_cast<int>(tree.edges.size());
  std::vector<int> parent(tree.edges.size(), -1);
  for (int e = 0; e < n_edges; ++e) {
    const BudEdge& edge = tree.edges[e];
    if (edge.is_terminal()) continue;
    parent[edge.child[0]] = e;
    parent[edge.child[1]] = e;
  }
  auto path_of = [&](int e) {
    std::vector<int> p;
    for (int x = e; x >= 0; x = parent[x]) p.push_back(x);
    std::reverse(p.begin(), p.end());
    return p;
  };
  const std::vector<int> pu = path_of(buds[bud_u].edge);
  const std::vector<int> pv = path_of(buds[bud_v].edge);
  std::size_t common = 0;
  while (common < pu.size() && common < pv.size() && pu[common] == pv[common]) ++common;
  double height = 0.0;
  for (std::size_t i = 0; i + 1 < common; ++i) height += tree.edges[pu[i]].length;
  const int a = pu[common - 1];  // deepest shared edge
  const double ou = (buds[bud_u].edge == a) ? bud_offset(tree, buds[bud_u]) : tree.edges[a].length;
  const double ov = (buds[bud_v].edge == a) ? bud_offset(tree, buds[bud_v]) : tree.edges[a].length;
  return height + std::min(ou, ov);
}

namespace {

struct Pruner {
  const CladeTree& tree;
  const std::vector<int>& sel;
  std::vector<BudEdge>& edges;

  // Builds the edge spanning sel[lo, hi) (hi - lo >= 2) out of the clade at
  // node v whose leaf interval starts at base; returns its arena index.
  int build(int v, int base, int lo, int hi) {
    const int idx = static_cast<int>(edges.size());
    edges.emplace_back();
    double len = 0.0;
    std::vector<SideBud> buds;
    for (;;) {
      len += tree.hold[v];
      const int cut = base + tree.left[v];
      const int lc = tree.left_child(v);
      const int rc = tree.right_child(v);
      const int mid = static_cast<int>(
          std::lower_bound(sel.begin() + lo, sel.begin() + hi, cut) - sel.begin());
      const int kl = mid - lo;
      const int kr = hi - mid;
      if (kl == 0) {
        v = rc;
        base = cut;
      } else if (kr == 0) {
        v = lc;
      } else if (kl == 1 && kr == 1) {
        edges[idx].length = len;
        edges[idx].side_buds = std::move(buds);
        return idx;
      } else if (kl == 1) {
        buds.push_back({len, Side::left});
        v = rc;
        base = cut;
        lo = mid;
      } else if (kr == 1) {
        buds.push_back({len, Side::right});
        v = lc;
        hi = mid;
      } else {
        const int c0 = build(lc, base, lo, mid);
        const int c1 = build(rc, cut, mid, hi);
        edges[idx].length = len;
        edges[idx].side_buds = std::move(buds);
        edges[idx].child[0] = c0;
        edges[idx].child[1] = c1;
        return idx;
      }
    }
  }
};

std::vector<int> checked_selection(const CladeTree& tree, const std::vector<int>& leaves,
                                   std::size_t min_k, const char* who) {
  if (!tree.timed) throw std::logic_error(std::string(who) + ": tree has no waiting times");
  std::vector<int> sel = leaves;
  std::sort(sel.begin(), sel.end());
  if (sel.size() < min_k) {
    throw std::domain_error(std::string(who) + ": too few leaves selected");
  }
  if (sel.front() < 0 || sel.back() >= tree.n_leaves()) {
    throw std::domain_error(std::string(who) + ": leaf position out of range");
  }
  if (std::adjacent_find(sel.begin(), sel.end()) != sel.end()) {
    throw std::domain_error(std::string(who) + ": leaf positions must be distinct");
  }
  return sel;
}

}  // namespace

BudTree prune(const CladeTree& tree, const std::vector<int>& leaves) {
  const std::vector<int> sel = checked_selection(tree, leaves, 2, "prune");
  BudTree out;
  Pruner p{tree, sel, out.edges};
  p.build(0, 0, 0, static_cast<int>(sel.size()));
  refresh_bud_counts(out);
  return out;
}

namespace {

struct Spanner {
  const CladeTree& tree;
  const std::vector<int>& sel;
  std::vector<SpanningTree::Edge>& edges;

  int build(int v, int base, int lo, int hi) {
    const int idx = static_cast<int>(edges.size());
    edges.emplace_back();
    double len = 0.0;
    for (;;) {
      if (hi - lo == 1) {
        // Lone selected leaf: follow it down to its absorption height.
        const int p = sel[lo];
        while (tree.left[v] != 0) {
          len += tree.hold[v];
          if (p < base + tree.left[v]) {
            v = tree.left_child(v);
          } else {
            base += tree.left[v];
            v = tree.right_child(v);
          }
        }
        edges[idx].length = len;
        edges[idx].leaf = p;
        return idx;
      }
      len += tree.hold[v];
      const int cut = base + tree.left[v];
      const int lc = tree.left_child(v);
      const int rc = tree.right_child(v);
      const int mid = static_cast<int>(
          std::lower_bound(sel.begin() + lo, sel.begin() + hi, cut) - sel.begin());
      if (mid == lo) {
        v = rc;
        base = cut;
      } else if (mid == hi) {
        v = lc;
      } else {
        const int c0 = build(lc, base, lo, mid);
        const int c1 = build(rc, cut, mid, hi);
        edges[idx].length = len;
        edges[idx].child[0] = c0;
        edges[idx].child[1] = c1;
        return idx;
      }
    }
  }
};

}  // namespace

SpanningTree spanning_tree(const CladeTree& tree, const std::vector<int>& leaves) {
  const std::vector<int> sel = checked_selection(tree, leaves, 1, "spanning_tree");
  SpanningTree out;
  Spanner s{tree, sel, out.edges};
  s.build(0, 0, 0, static_cast<int>(sel.size()));
  return out;
}

namespace {

struct SpanPruner {
  const SpanningTree& in;
  std::vector<BudEdge>& edges;

  int build(int s) {
    const int idx = static_cast<int>(edges.size());
    edges.emplace_back();
    double len = in.edges[s].length;
    std::vector<SideBud> buds;
    int cur = s;
    for (;;) {
      const int c0 = in.edges[cur].child[0];
      const int c1 = in.edges[cur].child[1];
      const bool t0 = in.edges[c0].is_terminal();
      const bool t1 = in.edges[c1].is_terminal();
      if (t0 && t1) {
        edges[idx].length = len;
        edges[idx].side_buds = std::move(buds);
        return idx;
      }
      if (t0) {
        buds.push_back({len, Side::left});
        cur = c1;
        len += in.edges[c1].length;
      } else if (t1) {
        buds.push_back({len, Side::right});
        cur = c0;
        len += in.edges[c0].length;
      } else {
        const int b0 = build(c0);
        const int b1 = build(c1);
        edges[idx].length = len;
        edges[idx].side_buds = std::move(buds);
        edges[idx].child[0] = b0;
        edges[idx].child[1] = b1;
        return idx;
      }
    }
  }
};

}  // namespace

BudTree prune_spanning(const SpanningTree& tree) {
  if (tree.edges.empty() || tree.edges[0].is_terminal()) {
    throw std::domain_error("prune_spanning: need at least two selected leaves");
  }
  BudTree out;
  SpanPruner p{tree, out.edges};
  p.build(0);
  refresh_bud_counts(out);
  return out;
}

namespace {

void write_edge(const BudTree& tree, int e, std::ostream& out) {
  const BudEdge& edge = tree.edges[e];
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", edge.length);
  out << buf << ',' << (edge.is_terminal() ? "pair" : "branch") << ',';
  bool first = true;
  for (const SideBud& b : edge.side_buds) {
    if (!first) out << ';';
    first = false;
    std::snprintf(buf, sizeof buf, "%.17g", b.offset);
    out << buf << ':' << (b.side == Side::left ? 'l' : 'r');
  }
  out << '\n';
  if (!edge.is_terminal()) {
    write_edge(tree, edge.child[0], out);
    write_edge(tree, edge.child[1], out);
  }
}

struct BudRow {
  double length;
  bool pair;
  std::vector<SideBud> buds;
};

BudRow parse_bud_row(const std::string& line, int row) {
  const auto fail = [row](const std::string& why) {
    throw std::runtime_error("bud csv: row " + std::to_string(row) + ": " + why);
  };
  const std::size_t c1 = line.find(',');
  const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : line.find(',', c1 + 1);
  if (c2 == std::string::npos) fail("expected three fields");
  BudRow r;
  try {
    std::size_t used = 0;
    r.length = std::stod(line.substr(0, c1), &used);
    if (used != c1) fail("bad length");
  } catch (const std::logic_error&) {
    fail("bad length");
  }
  const std::string term = line.substr(c1 + 1, c2 - c1 - 1);
  if (term == "pair") {
    r.pair = true;
  } else if (term == "branch") {
    r.pair = false;
  } else {
    fail("termination must be 'pair' or 'branch'");
  }
  std::size_t pos = c2 + 1;
  while (pos < line.size()) {
    std::size_t item_end = line.find(';', pos);
    if (item_end == std::string::npos) item_end = line.size();
    const std::size_t colon = line.find(':', pos);
    if (colon == std::string::npos || colon >= item_end) fail("side-bud item needs offset:side");
    double off = 0.0;
    try {
      std::size_t used = 0;
      off = std::stod(line.substr(pos, colon - pos), &used);
      if (used != colon - pos) fail("bad side-bud offset");
    } catch (const std::logic_error&) {
      fail("bad side-bud offset");
    }
    if (colon + 2 != item_end) fail("side must be a single character");
    const char sc = line[colon + 1];
    if (sc != 'l' && sc != 'r') fail("side must be 'l' or 'r'");
    r.buds.push_back({off, sc == 'l' ? Side::left : Side::right});
    pos = item_end + 1;
  }
  return r;
}

struct BudReader {
  const std::vector<BudRow>& rows;
  std::vector<BudEdge>& edges;
  std::size_t pos = 0;

  int build() {
    if (pos >= rows.size()) throw std::runtime_error("bud csv: truncated input");
    const int idx = static_cast<int>(edges.size());
    edges.emplace_back();
    const BudRow& r = rows[pos++];
    edges[idx].length = r.length;
    edges[idx].side_buds = r.buds;
    if (!r.pair) {
      const int c0 = build();
      const int c1 = build();
      edges[idx].child[0] = c0;
      edges[idx].child[1] = c1;
    }
    return idx;
  }
};

}  // namespace

void write_bud_csv(const BudTree& tree, std::ostream& out) {
  out << "length,termination,side_buds\n";
  if (!tree.edges.empty()) write_edge(tree, 0, out);
}

BudTree read_bud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("bud csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "length,termination,side_buds") {
    throw std::runtime_error("bud csv: unrecognized header '" + line + "'");
  }
  std::vector<BudRow> rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_bud_row(line, row));
  }
  BudTree out;
  BudReader reader{rows, out.edges};
  reader.build();
  if (reader.pos != rows.size()) throw std::runtime_error("bud csv: trailing rows");
  refresh_bud_counts(out);
  validate_bud_tree(out);
  return out;
}

}  // namespace betasplit
