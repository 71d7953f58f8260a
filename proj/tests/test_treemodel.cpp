#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "betasplit/bud_tree.hpp"
#include "betasplit/clade_tree.hpp"
#include "betasplit/gof.hpp"
#include "betasplit/stats.hpp"
#include "doctest.h"

using namespace betasplit;

namespace {

std::string tree_csv(const CladeTree& t) {
  std::ostringstream os;
  write_tree_csv(t, os);
  return os.str();
}

std::string bud_csv(const BudTree& t) {
  std::ostringstream os;
  write_bud_csv(t, os);
  return os.str();
}

std::vector<int> all_leaves(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_SUITE("treemodel") {
  TEST_CASE("samplers produce valid trees of the right size") {
    HarmonicTable ht(600);
    Rng rng(21, 0);
    for (int n : {1, 2, 3, 5, 17, 200}) {
      CladeTree shape = sample_dtcs(n, ht, rng);
      CHECK(shape.n_leaves() == n);
      CHECK(shape.n_nodes() == 2 * n - 1);
      CHECK_FALSE(shape.timed);
      validate_tree(shape);

      CladeTree timed = sample_ctcs(n, ht, rng);
      CHECK(timed.n_leaves() == n);
      CHECK(timed.timed);
      validate_tree(timed);
      for (int v = 0; v < timed.n_nodes(); ++v) {
        if (timed.is_leaf(v)) {
          CHECK(timed.hold[v] == 0.0);
        } else {
          CHECK(timed.hold[v] > 0.0);
        }
      }
    }
  }

  TEST_CASE("preorder child arithmetic is consistent") {
    HarmonicTable ht(600);
    Rng rng(22, 0);
    CladeTree t = sample_dtcs(150, ht, rng);
    for (int v = 0; v < t.n_nodes(); ++v) {
      if (t.is_leaf(v)) continue;
      const int l = t.left_child(v);
      const int r = t.right_child(v);
      CHECK(t.size[l] == t.left[v]);
      CHECK(t.size[l] + t.size[r] == t.size[v]);
    }
  }

  TEST_CASE("identical seeds reproduce identical trees") {
    HarmonicTable ht(600);
    Rng a(77, 5);
    Rng b(77, 5);
    CHECK(tree_csv(sample_ctcs(99, ht, a)) == tree_csv(sample_ctcs(99, ht, b)));
  }

  TEST_CASE("deterministic shapes: caterpillar and balanced") {
    CladeTree cat = caterpillar_tree(5);
    validate_tree(cat);
    CHECK(cat.n_leaves() == 5);
    CHECK(hop_extremes(cat).max_hops == 4);
    CHECK(hop_extremes(cat).greedy_hops == 4);

    CladeTree bal = balanced_tree(8);
    validate_tree(bal);
    CHECK(hop_extremes(bal).max_hops == 3);
    CHECK(hop_extremes(bal).greedy_hops == 3);
    CHECK(draw_heights(bal)[0] == 3);

    CladeTree odd = balanced_tree(7);  // floor/ceil halving stays valid
    validate_tree(odd);
    CHECK(odd.n_leaves() == 7);
    CHECK(hop_extremes(odd).max_hops == 3);
  }

  TEST_CASE("clades_at partitions the leaves at every time") {
    HarmonicTable ht(600);
    Rng rng(30, 0);
    const int n = 60;
    CladeTree t = sample_ctcs(n, ht, rng);
    CHECK(clades_at(t, 0.0) == std::vector<int>{n});
    const std::vector<double> heights = leaf_heights(t);
    const double hmax = *std::max_element(heights.begin(), heights.end());
    const std::vector<int> late = clades_at(t, hmax + 1.0);
    CHECK(int(late.size()) == n);
    for (double s : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const std::vector<int> sizes = clades_at(t, s);
      long long sum = 0;
      for (int c : sizes) {
        CHECK(c >= 1);
        sum += c;
      }
      CHECK(sum == n);
    }
    CladeTree shape = sample_dtcs(5, ht, rng);
    CHECK_THROWS_AS((void)clades_at(shape, 1.0), std::logic_error);
  }

  TEST_CASE("clade tree CSV round trip is exact, timed and untimed") {
    HarmonicTable ht(600);
    Rng rng(31, 0);
    for (bool timed : {false, true}) {
      CladeTree t = timed ? sample_ctcs(40, ht, rng) : sample_dtcs(40, ht, rng);
      std::istringstream in(tree_csv(t));
      CladeTree back = read_tree_csv(in);
      CHECK(back.timed == t.timed);
      CHECK(back.size == t.size);
      CHECK(back.left == t.left);
      CHECK(back.hold == t.hold);  // 17 significant digits -> exact doubles
    }
  }

  TEST_CASE("pruning all four leaves of the timed tree on 4 gives the five known shapes") {
    HarmonicTable ht(16);
    Rng rng(40, 0);
    const int reps = 22000;
    std::map<std::string, long long> counts;
    for (int r = 0; r < reps; ++r) {
      CladeTree t = sample_ctcs(4, ht, rng);
      BudTree b = prune(t, all_leaves(4));
      validate_bud_tree(b);
      CHECK(b.bud_total() == 4);
      ++counts[shape_signature(b)];
    }
    const std::map<std::string, double> expected = {
        {"llp", 2.0 / 11.0}, {"lrp", 2.0 / 11.0}, {"rlp", 2.0 / 11.0},
        {"rrp", 2.0 / 11.0}, {"(p,p)", 3.0 / 11.0}};
    std::vector<long long> obs;
    std::vector<double> probs;
    for (const auto& [sig, cnt] : counts) {
      REQUIRE_MESSAGE(expected.count(sig) == 1, "unexpected signature " << sig);
      obs.push_back(cnt);
      probs.push_back(expected.at(sig));
    }
    REQUIRE(counts.size() == 5);  // all five shapes appear at this sample size
    CHECK(chi_square(obs, probs).p_value > 1e-3);
  }

  TEST_CASE("pruning all leaves keeps the tree's full length and heights") {
    HarmonicTable ht(600);
    Rng rng(41, 0);
    for (int n : {2, 3, 7, 33, 120}) {
      CladeTree t = sample_ctcs(n, ht, rng);
      BudTree b = prune(t, all_leaves(n));
      validate_bud_tree(b);
      CHECK(b.bud_total() == n);
      int subdivided = 0;  // every side-bud splits its edge in two
      for (const BudEdge& e : b.edges) subdivided += 1 + int(e.side_buds.size());
      CHECK(subdivided == n - 1);
      CHECK(total_edge_length(b) == doctest::Approx(total_length(t)).epsilon(1e-9));
      std::vector<double> bh = bud_heights(b);
      std::vector<double> lh = leaf_heights(t);
      std::sort(bh.begin(), bh.end());
      std::sort(lh.begin(), lh.end());
      REQUIRE(bh.size() == lh.size());
      for (std::size_t i = 0; i < bh.size(); ++i)
        CHECK(bh[i] == doctest::Approx(lh[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("pruning two leaves gives a single edge at their branchpoint height") {
    HarmonicTable ht(600);
    Rng rng(42, 0);
    const int n = 50;
    for (int rep = 0; rep < 20; ++rep) {
      CladeTree t = sample_ctcs(n, ht, rng);
      const int u = int(rng.below(n));
      int v = int(rng.below(n));
      if (v == u) v = (v + 1) % n;
      BudTree b = prune(t, {u, v});
      validate_bud_tree(b);
      CHECK(b.bud_total() == 2);
      REQUIRE(b.edges.size() == 1);
      CHECK(b.edges[0].is_terminal());
      CHECK(b.edges[0].side_buds.empty());
      const double bp = branchpoint_height(t, u, v);
      CHECK(b.edges[0].length == doctest::Approx(bp).epsilon(1e-9));
      CHECK(bud_branchpoint(b, 0, 1) == doctest::Approx(bp).epsilon(1e-9));
    }
  }

  TEST_CASE("prune equals spanning_tree followed by prune_spanning") {
    HarmonicTable ht(600);
    Rng rng(43, 0);
    for (int rep = 0; rep < 60; ++rep) {
      const int n = 2 + int(rng.below(14));
      CladeTree t = sample_ctcs(n, ht, rng);
      const int k = 2 + int(rng.below(std::uint64_t(n - 1)));
      std::vector<int> pool = all_leaves(n);
      for (int i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + int(rng.below(std::uint64_t(n - i)))]);
      std::vector<int> leaves(pool.begin(), pool.begin() + k);
      std::sort(leaves.begin(), leaves.end());

      BudTree direct = prune(t, leaves);
      SpanningTree span = spanning_tree(t, leaves);
      BudTree via = prune_spanning(span);
      CHECK(shape_signature(direct) == shape_signature(via));
      CHECK(total_edge_length(direct) ==
            doctest::Approx(total_edge_length(via)).epsilon(1e-9));
      const std::vector<double> sd = segment_lengths(direct);
      const std::vector<double> sv = segment_lengths(via);
      REQUIRE(sd.size() == sv.size());
      CHECK(int(sd.size()) == k - 1);
      for (std::size_t i = 0; i < sd.size(); ++i)
        CHECK(sd[i] == doctest::Approx(sv[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("segment lengths are positive and sum to the total length") {
    HarmonicTable ht(600);
    Rng rng(44, 0);
    CladeTree t = sample_ctcs(80, ht, rng);
    std::vector<int> leaves = {3, 10, 11, 40, 41, 42, 77};
    BudTree b = prune(t, leaves);
    CHECK(b.bud_total() == int(leaves.size()));
    std::vector<double> segs = segment_lengths(b);
    CHECK(segs.size() == leaves.size() - 1);
    double sum = 0.0;
    for (double s : segs) {
      CHECK(s >= 0.0);
      sum += s;
    }
    CHECK(sum == doctest::Approx(total_edge_length(b)).epsilon(1e-12));
    CHECK(bud_heights(b).size() == leaves.size());
  }

  TEST_CASE("spanning terminal edges reach each selected leaf's own height") {
    HarmonicTable ht(600);
    Rng rng(45, 0);
    CladeTree t = sample_ctcs(30, ht, rng);
    const std::vector<int> leaves = {2, 9, 25};
    SpanningTree span = spanning_tree(t, leaves);
    const std::vector<double> lh = leaf_heights(t);
    // Sum of root-to-terminal path lengths equals the sum of selected leaf heights.
    // Walk every root-to-leaf path.
    double path_sum = 0.0;
    double leaf_sum = 0.0;
    for (int leaf : leaves) leaf_sum += lh[leaf];
    // depth-first accumulate
    struct Item { int e; double acc; };
    std::vector<Item> stack{{0, 0.0}};
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      const auto& e = span.edges[it.e];
      const double acc = it.acc + e.length;
      if (e.is_terminal()) {
        path_sum += acc;
      } else {
        stack.push_back({e.child[0], acc});
        stack.push_back({e.child[1], acc});
      }
    }
    CHECK(path_sum == doctest::Approx(leaf_sum).epsilon(1e-9));
  }

  TEST_CASE("bud tree CSV round trip is exact") {
    HarmonicTable ht(600);
    Rng rng(46, 0);
    CladeTree t = sample_ctcs(25, ht, rng);
    BudTree b = prune(t, {0, 4, 5, 6, 12, 24});
    const std::string csv = bud_csv(b);
    std::istringstream in(csv);
    BudTree back = read_bud_csv(in);
    validate_bud_tree(back);
    CHECK(bud_csv(back) == csv);
    CHECK(shape_signature(back) == shape_signature(b));
  }

  TEST_CASE("bud count maintenance agrees with the exhaustive recount") {
    HarmonicTable ht(600);
    Rng rng(47, 0);
    CladeTree t = sample_ctcs(64, ht, rng);
    BudTree b = prune(t, all_leaves(64));
    CHECK(count_buds(b) == 64);
    BudTree copy = b;
    for (auto& e : copy.edges) e.bud_count = -1;
    refresh_bud_counts(copy);
    for (std::size_t i = 0; i < copy.edges.size(); ++i)
      CHECK(copy.edges[i].bud_count == b.edges[i].bud_count);
  }
}
