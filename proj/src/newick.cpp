#include "betasplit/newick.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "betasplit/gof.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/stats.hpp"

namespace betasplit {

NewickError::NewickError(const std::string& what, std::size_t off)
    : std::runtime_error(what + " (byte " + std::to_string(off) + ")"), offset(off) {}

namespace {

bool name_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '.' || c == '-';
}

bool digit(char c) { return c >= '0' && c <= '9'; }

struct Parser {
  const std::string& s;
  std::size_t pos = 0;
  int depth = 0;
  PhyloTree tree;
  static constexpr int kMaxDepth = 10000;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (pos < s.size()) {
      const char c = s[pos];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        ++pos;
        continue;
      }
      if (c == '[') {
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] != ']') ++pos;
        if (pos == s.size()) throw NewickError("unterminated comment", start);
        ++pos;
        continue;
      }
      break;
    }
  }

  double parse_length() {
    const std::size_t start = pos;
    std::size_t p = pos;
    if (p < s.size() && (s[p] == '+' || s[p] == '-')) ++p;
    bool any = false;
    while (p < s.size() && digit(s[p])) ++p, any = true;
    if (p < s.size() && s[p] == '.') {
      ++p;
      while (p < s.size() && digit(s[p])) ++p, any = true;
    }
    if (!any) throw NewickError("malformed number", start);
    if (p < s.size() && (s[p] == 'e' || s[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
      bool edigit = false;
      while (q < s.size() && digit(s[q])) ++q, edigit = true;
      if (!edigit) throw NewickError("malformed exponent", p);
      p = q;
    }
    const double v = std::strtod(s.substr(start, p - start).c_str(), nullptr);
    if (v < 0.0) throw NewickError("negative branch length", start);
    pos = p;
    return v;
  }

  void parse_label(int idx, bool is_leaf) {
    skip();
    std::string name;
    bool have_name = false;
    if (pos < s.size() && s[pos] == '\'') {
      const std::size_t start = pos;
      ++pos;
      for (;;) {
        if (pos >= s.size()) throw NewickError("unterminated quoted name", start);
        if (s[pos] == '\'') {
          if (pos + 1 < s.size() && s[pos + 1] == '\'') {
            name += '\'';
            pos += 2;
            continue;
          }
          ++pos;
          break;
        }
        name += s[pos++];
      }
      have_name = true;
    } else {
      while (pos < s.size() && name_char(s[pos])) name += s[pos++];
      have_name = !name.empty();
    }
    bool have_len = false;
    double len = 0.0;
    skip();
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      skip();
      len = parse_length();
      have_len = true;
    }
    if (is_leaf && !have_name && !have_len) {
      throw NewickError("empty subtree: a leaf needs a name or a length", pos);
    }
    tree.nodes[idx].name = std::move(name);
    tree.nodes[idx].has_length = have_len;
    tree.nodes[idx].length = len;
  }

  int parse_subtree() {
    if (++depth > kMaxDepth) throw NewickError("nesting too deep", pos);
    skip();
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      std::vector<int> kids;
      kids.push_back(parse_subtree());
      skip();
      if (pos >= s.size() || s[pos] != ',') {
        throw NewickError("expected ',' (groups need at least two children)", pos);
      }
      while (pos < s.size() && s[pos] == ',') {
        ++pos;
        kids.push_back(parse_subtree());
        skip();
      }
      if (pos >= s.size() || s[pos] != ')') throw NewickError("expected ')'", pos);
      ++pos;
      tree.nodes[idx].children = std::move(kids);
      parse_label(idx, false);
    } else {
      parse_label(idx, true);
    }
    --depth;
    return idx;
  }

  PhyloTree run() {
    parse_subtree();
    skip();
    if (pos >= s.size() || s[pos] != ';') throw NewickError("expected ';'", pos);
    ++pos;
    skip();
    if (pos != s.size()) throw NewickError("trailing content after ';'", pos);
    return std::move(tree);
  }
};

std::string quote_name(const std::string& name) {
  bool plain = !name.empty();
  for (char c : name) {
    if (!name_char(c)) {
      plain = false;
      break;
    }
  }
  if (name.empty()) return "";
  if (plain) return name;
  std::string out = "'";
  for (char c : name) {
    out += c;
    if (c == '\'') out += '\'';
  }
  out += '\'';
  return out;
}

void check_children(const PhyloTree& t) {
  const int m = static_cast<int>(t.nodes.size());
  for (int v = 0; v < m; ++v) {
    for (int c : t.nodes[v].children) {
      if (c <= v || c >= m) {
        throw std::logic_error("phylo tree: children must follow their parent in the array");
      }
    }
  }
}

void write_node(const PhyloTree& t, int v, std::string& out) {
  const PhyloNode& nd = t.nodes[v];
  if (!nd.children.empty()) {
    out += '(';
    for (std::size_t k = 0; k < nd.children.size(); ++k) {
      if (k) out += ',';
      write_node(t, nd.children[k], out);
    }
    out += ')';
  }
  out += quote_name(nd.name);
  if (nd.has_length) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), ":%.17g", nd.length);
    out += buf;
  }
}

// Unambiguous order-insensitive encoding: children canon strings sorted, the
// name length-prefixed so no name can fake the bracket structure.
std::string canon(const PhyloTree& t, int v) {
  const PhyloNode& nd = t.nodes[v];
  std::string s = "{";
  if (!nd.children.empty()) {
    std::vector<std::string> parts;
    parts.reserve(nd.children.size());
    for (int c : nd.children) parts.push_back(canon(t, c));
    std::sort(parts.begin(), parts.end());
    for (const std::string& p : parts) s += p;
  }
  s += '|';
  s += std::to_string(nd.name.size());
  s += ':';
  s += nd.name;
  if (nd.has_length) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), ":%.17g", nd.length);
    s += buf;
  }
  s += '}';
  return s;
}

std::vector<int> leaves_below(const PhyloTree& t) {
  const int m = static_cast<int>(t.nodes.size());
  std::vector<int> lb(static_cast<std::size_t>(m), 0);
  for (int v = m - 1; v >= 0; --v) {
    if (t.nodes[v].children.empty()) {
      lb[v] = 1;
    } else {
      int sum = 0;
      for (int c : t.nodes[v].children) sum += lb[c];
      lb[v] = sum;
    }
  }
  return lb;
}

std::vector<int> phylo_draw_heights(const PhyloTree& t) {
  const int m = static_cast<int>(t.nodes.size());
  std::vector<int> dh(static_cast<std::size_t>(m), 0);
  for (int v = m - 1; v >= 0; --v) {
    int best = -1;
    for (int c : t.nodes[v].children) best = std::max(best, dh[c]);
    dh[v] = t.nodes[v].children.empty() ? 0 : 1 + best;
  }
  return dh;
}

std::vector<double> phylo_leaf_hops(const PhyloTree& t) {
  std::vector<double> out;
  struct Frame {
    int node;
    int depth;
  };
  std::vector<Frame> stack = {{0, 0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (t.nodes[f.node].children.empty()) {
      out.push_back(f.depth);
      continue;
    }
    for (int c : t.nodes[f.node].children) stack.push_back({c, f.depth + 1});
  }
  return out;
}

double median_of(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double hi = v[m];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + m);
    return 0.5 * (lo + hi);
  }
  return hi;
}

void split_buckets(const std::vector<SplitRecord>& splits, std::vector<double>& bucket_m,
                   std::vector<double>& bucket_median) {
  bucket_m.clear();
  bucket_median.clear();
  std::vector<std::vector<double>> ms(64), smalls(64);
  for (const SplitRecord& r : splits) {
    int b = 0;
    while ((1LL << (b + 1)) <= r.m) ++b;
    ms[b].push_back(r.m);
    smalls[b].push_back(r.smaller);
  }
  for (std::size_t b = 0; b < ms.size(); ++b) {
    if (ms[b].empty()) continue;
    bucket_m.push_back(median_of(ms[b]));
    bucket_median.push_back(median_of(smalls[b]));
  }
}

}  // namespace

PhyloTree parse_newick(const std::string& text) { return Parser(text).run(); }

std::string serialize_newick(const PhyloTree& tree) {
  if (tree.nodes.empty()) throw std::logic_error("serialize: empty tree");
  check_children(tree);
  std::string out;
  write_node(tree, 0, out);
  out += ';';
  return out;
}

bool trees_isomorphic(const PhyloTree& a, const PhyloTree& b) {
  if (a.nodes.empty() || b.nodes.empty()) return a.nodes.empty() == b.nodes.empty();
  check_children(a);
  check_children(b);
  return canon(a, 0) == canon(b, 0);
}

PhyloTree phylo_from_clade_tree(const CladeTree& tree, bool with_lengths) {
  const int m = tree.n_nodes();
  PhyloTree out;
  out.nodes.resize(static_cast<std::size_t>(m));
  int leaf_no = 0;
  for (int v = 0; v < m; ++v) {
    PhyloNode& nd = out.nodes[v];
    if (tree.is_leaf(v)) {
      ++leaf_no;
      nd.name = "t" + std::to_string(leaf_no);
    } else {
      nd.children = {tree.left_child(v), tree.right_child(v)};
    }
    if (with_lengths) {
      nd.has_length = true;
      nd.length = tree.hold[v];
    }
  }
  return out;
}

double fit_alpha(const std::vector<SplitRecord>& splits) {
  std::vector<double> bm, bmed;
  split_buckets(splits, bm, bmed);
  const std::size_t k = bm.size();
  if (k < 2) return 0.0;
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(k), ys(k);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i] = std::log(bm[i]);
    ys[i] = std::log(bmed[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return (sxx > 0.0) ? sxy / sxx : 0.0;
}

SplitStats split_stats(const PhyloTree& tree) {
  check_children(tree);
  SplitStats out;
  out.leaf_count = tree.leaf_count();
  const std::vector<int> lb = leaves_below(tree);
  const int m = static_cast<int>(tree.nodes.size());
  for (int v = 0; v < m; ++v) {
    const std::vector<int>& kids = tree.nodes[v].children;
    if (kids.empty()) continue;
    if (kids.size() == 2) {
      ++out.binary_count;
      out.splits.push_back({lb[v], std::min(lb[kids[0]], lb[kids[1]])});
    } else {
      ++out.polytomy_count;
    }
  }
  out.root_dh = phylo_draw_heights(tree)[0];
  split_buckets(out.splits, out.bucket_m, out.bucket_median_smaller);
  out.alpha = fit_alpha(out.splits);
  return out;
}

CompareReport compare_to_model(const PhyloTree& data, int reps, Rng& rng) {
  const int n = data.leaf_count();
  if (n < 10) throw std::domain_error("compare_to_model: need at least 10 leaves");
  if (reps < 2) throw std::domain_error("compare_to_model: need at least 2 replicates");
  CompareReport rep;
  rep.n = n;
  rep.reps = reps;
  const SplitStats ds = split_stats(data);
  rep.alpha_data = ds.alpha;
  rep.root_dh_data = ds.root_dh;
  const std::vector<double> data_hops = phylo_leaf_hops(data);

  const HarmonicTable ht(std::max(n, 2));
  std::vector<double> model_hops;
  model_hops.reserve(static_cast<std::size_t>(reps) * n);
  double asum = 0.0, asq = 0.0, dsum = 0.0, dsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const CladeTree t = sample_dtcs(n, ht, rng);
    std::vector<SplitRecord> splits;
    splits.reserve(static_cast<std::size_t>(n) - 1);
    const int nodes = t.n_nodes();
    for (int v = 0; v < nodes; ++v) {
      if (!t.is_leaf(v)) {
        const int left = t.left[v];
        splits.push_back({t.size[v], std::min(left, t.size[v] - left)});
      }
    }
    const double alpha = fit_alpha(splits);
    asum += alpha;
    asq += alpha * alpha;
    const int rdh = draw_heights(t)[0];
    dsum += rdh;
    dsq += static_cast<double>(rdh) * rdh;
    for (int hvals : leaf_hops(t)) model_hops.push_back(hvals);
  }
  rep.alpha_model_mean = asum / reps;
  rep.alpha_model_sd = std::sqrt(std::max(0.0, (asq - asum * asum / reps) / (reps - 1)));
  rep.root_dh_model_mean = dsum / reps;
  rep.root_dh_model_sd = std::sqrt(std::max(0.0, (dsq - dsum * dsum / reps) / (reps - 1)));

  const TestResult ks = ks_test_two_sample(data_hops, model_hops);
  rep.hops_ks_stat = ks.statistic;
  rep.hops_ks_p = ks.p_value;
  if (rep.root_dh_model_sd > 1e-12) {
    rep.root_dh_z = (rep.root_dh_data - rep.root_dh_model_mean) / rep.root_dh_model_sd;
  } else {
    rep.root_dh_z = (std::abs(rep.root_dh_data - rep.root_dh_model_mean) < 0.5) ? 0.0 : 1e9;
  }
  rep.flag_imbalance = rep.alpha_data < 0.25;
  rep.flag_balance = rep.alpha_data > 0.80;
  rep.pass = !rep.flag_imbalance && !rep.flag_balance && rep.hops_ks_p > 0.01 &&
             std::abs(rep.root_dh_z) < 4.0;
  return rep;
}

}  // namespace betasplit
