// Command-line front end: sampling, growth, pruning, fringe walks, exact
// numerics, per-tree statistics, the verification suite, and tree-text
// statistics.  All replicated work is deterministic for a fixed seed no
// matter how many worker threads run it.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "betasplit/bud_tree.hpp"
#include "betasplit/chain.hpp"
#include "betasplit/clade_tree.hpp"
#include "betasplit/experiments.hpp"
#include "betasplit/growth.hpp"
#include "betasplit/harmonic.hpp"
#include "betasplit/newick.hpp"
#include "betasplit/rng.hpp"
#include "betasplit/stats.hpp"
#include "betasplit/svg.hpp"

namespace {

using namespace betasplit;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitTestFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Default seed: the BETASPLIT_SEED environment variable when set, else 0.
std::uint64_t default_seed() {
  const char* env = std::getenv("BETASPLIT_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw UsageError(std::string("BETASPLIT_SEED is not an unsigned integer: ") + env);
  return static_cast<std::uint64_t>(v);
}

// Write `text` to the path, or to stdout when the path is empty.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + out_path);
  f << text;
}

ordered_json clade_tree_json(const CladeTree& tree) {
  ordered_json doc;
  doc["n"] = tree.n_leaves();
  doc["timed"] = tree.timed;
  ordered_json nodes = ordered_json::array();
  for (int v = 0; v < tree.n_nodes(); ++v) {
    ordered_json node;
    node["size"] = tree.size[static_cast<std::size_t>(v)];
    node["left"] = tree.left[static_cast<std::size_t>(v)];
    if (tree.timed) node["hold"] = tree.hold[static_cast<std::size_t>(v)];
    nodes.push_back(node);
  }
  doc["nodes"] = nodes;
  return doc;
}

ordered_json bud_tree_json(const BudTree& tree) {
  ordered_json doc;
  doc["buds"] = tree.bud_total();
  ordered_json edges = ordered_json::array();
  for (const BudEdge& e : tree.edges) {
    ordered_json edge;
    edge["length"] = e.length;
    ordered_json sb = ordered_json::array();
    for (const SideBud& s : e.side_buds) {
      ordered_json b;
      b["offset"] = s.offset;
      b["side"] = s.side == Side::left ? "l" : "r";
      sb.push_back(b);
    }
    edge["side_buds"] = sb;
    if (e.is_terminal()) {
      edge["child"] = nullptr;
    } else {
      edge["child"] = ordered_json::array({e.child[0], e.child[1]});
    }
    edges.push_back(edge);
  }
  doc["edges"] = edges;
  return doc;
}

std::string tree_csv(const CladeTree& tree) {
  std::ostringstream os;
  write_tree_csv(tree, os);
  return os.str();
}

std::string bud_csv(const BudTree& tree) {
  std::ostringstream os;
  write_bud_csv(tree, os);
  return os.str();
}

int run_sample(const std::string& model, int n, std::uint64_t seed, const std::string& out,
               const std::string& format) {
  HarmonicTable ht(std::max(n, 2));
  Rng rng(seed);
  const CladeTree tree =
      model == "ctcs" ? sample_ctcs(n, ht, rng) : sample_dtcs(n, ht, rng);
  if (format == "csv") {
    emit(out, tree_csv(tree));
  } else if (format == "json") {
    emit(out, clade_tree_json(tree).dump(2) + "\n");
  } else {
    emit(out, cladogram_svg(tree, model + " sample, n = " + std::to_string(n)));
  }
  return kExitOk;
}

int run_grow(int n, std::uint64_t seed, const std::string& out, const std::string& format,
             const std::string& trace_path) {
  Rng rng(seed);
  BudTree tree = start_tree(rng);
  std::ostringstream trace;
  if (!trace_path.empty()) write_growth_trace_header(trace);
  while (tree.bud_total() < n) {
    const int before = tree.bud_total();
    const GrowthRecord rec = grow_step(tree, rng);
    if (!trace_path.empty()) write_growth_trace_row(before, rec, trace);
  }
  if (!trace_path.empty()) emit(trace_path, trace.str());
  if (format == "csv") {
    emit(out, bud_csv(tree));
  } else {
    emit(out, bud_tree_json(tree).dump(2) + "\n");
  }
  return kExitOk;
}

int run_prune(int n, int k, std::uint64_t seed, const std::vector<int>& leaves_opt,
              const std::string& out, const std::string& format) {
  HarmonicTable ht(std::max(n, 2));
  Rng rng(seed);
  const CladeTree tree = sample_ctcs(n, ht, rng);
  std::vector<int> keep = leaves_opt;
  if (keep.empty()) {
    if (k < 1 || k > n) throw UsageError("--k must lie in [1, n]");
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    keep.assign(pool.begin(), pool.begin() + k);
    std::sort(keep.begin(), keep.end());
  }
  const BudTree bud = prune(tree, keep);
  if (format == "csv") {
    emit(out, bud_csv(bud));
  } else {
    ordered_json doc = bud_tree_json(bud);
    doc["selected_leaves"] = keep;
    doc["shape"] = shape_signature(bud);
    emit(out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

int run_fringe(int n, int levels, std::uint64_t seed, const std::string& out,
               const std::string& format) {
  HarmonicTable ht(std::max(n, 2));
  Rng rng(seed);
  const std::vector<double> occ = occupancy(n, ht);
  const FringeSample s = sample_fringe(levels, occ, ht, rng);
  if (format == "svg") {
    emit(out, cladogram_svg(fringe_to_clade_tree(s),
                            "fringe walk, horizon n = " + std::to_string(n)));
    return kExitOk;
  }
  if (format == "json") {
    ordered_json doc;
    doc["n"] = n;
    doc["levels"] = levels;
    doc["truncated"] = s.truncated;
    doc["sizes"] = s.sizes;
    ordered_json sib = ordered_json::array();
    for (std::size_t j = 0; j < s.siblings.size(); ++j) {
      ordered_json step;
      step["size"] = s.siblings[j].n_leaves();
      step["on_left"] = s.sibling_on_left[j] != 0;
      sib.push_back(step);
    }
    doc["siblings"] = sib;
    emit(out, doc.dump(2) + "\n");
    return kExitOk;
  }
  std::string csv = "step,size,sibling_size,sibling_on_left,truncated\n";
  for (std::size_t j = 1; j < s.sizes.size(); ++j) {
    csv += std::to_string(j) + "," + std::to_string(s.sizes[j]) + "," +
           std::to_string(s.sizes[j] - s.sizes[j - 1]) + "," +
           std::to_string(s.sibling_on_left[j - 1]) + "," +
           (s.truncated ? "true" : "false") + "\n";
  }
  emit(out, csv);
  return kExitOk;
}

int run_recurrence(int n_max, const std::string& out) {
  HarmonicTable ht(std::max(n_max, 2));
  const NumericTable tab = depth_tables(n_max, ht);
  std::string csv = "n,t,m2,var,thop\n";
  for (int n = 1; n <= n_max; ++n) {
    csv += std::to_string(n) + "," + fmt17(tab.t[static_cast<std::size_t>(n)]) + "," +
           fmt17(tab.m2[static_cast<std::size_t>(n)]) + "," +
           fmt17(tab.var[static_cast<std::size_t>(n)]) + "," +
           fmt17(tab.thop[static_cast<std::size_t>(n)]) + "\n";
  }
  emit(out, csv);
  return kExitOk;
}

int run_occupancy(int n, bool fast, int upjump_from, const std::string& out,
                  const std::string& format) {
  HarmonicTable ht(std::max(n, 2));
  const std::vector<double> occ = fast ? occupancy_fast(n, ht) : occupancy(n, ht);
  if (upjump_from > 0) {
    const FringePmf pmf = fringe_up_pmf(upjump_from, occ, ht);
    if (format == "json") {
      ordered_json doc;
      doc["n"] = n;
      doc["from"] = pmf.from;
      doc["raw_mass"] = pmf.raw_mass;
      doc["truncation_mass"] = pmf.truncation_mass;
      doc["truncation_warning"] = pmf.truncation_warning;
      ordered_json rows = ordered_json::array();
      for (int j = pmf.from + 1; j <= n; ++j)
        rows.push_back(pmf.pmf[static_cast<std::size_t>(j)]);
      doc["first_j"] = pmf.from + 1;
      doc["pmf"] = rows;
      emit(out, doc.dump(2) + "\n");
      return kExitOk;
    }
    std::string csv = "j,q\n";
    for (int j = pmf.from + 1; j <= n; ++j)
      csv += std::to_string(j) + "," + fmt17(pmf.pmf[static_cast<std::size_t>(j)]) + "\n";
    emit(out, csv);
    return kExitOk;
  }
  if (format == "json") {
    ordered_json doc;
    doc["n"] = n;
    ordered_json rows = ordered_json::array();
    for (int i = 1; i <= n; ++i) rows.push_back(occ[static_cast<std::size_t>(i)]);
    doc["first_i"] = 1;
    doc["occupancy"] = rows;
    emit(out, doc.dump(2) + "\n");
    return kExitOk;
  }
  std::string csv = "i,a\n";
  for (int i = 1; i <= n; ++i)
    csv += std::to_string(i) + "," + fmt17(occ[static_cast<std::size_t>(i)]) + "\n";
  emit(out, csv);
  return kExitOk;
}

int run_stats(const std::string& model, int n, long long reps, std::uint64_t seed, int workers,
              const std::vector<double>& powers, const std::string& out,
              const std::string& format) {
  HarmonicTable ht(std::max(n, 2));
  const Rng base(seed);
  std::vector<TreeStats> rows(static_cast<std::size_t>(reps));
  parallel_for(reps, workers, [&](long long r) {
    Rng g = base.substream(static_cast<std::uint64_t>(r));
    const CladeTree tree =
        model == "dtcs" ? sample_dtcs(n, ht, g) : sample_ctcs(n, ht, g);
    rows[static_cast<std::size_t>(r)] = compute_tree_stats(tree, powers);
  });
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const TreeStats& s : rows) {
      ordered_json row;
      row["n"] = s.n;
      row["max_height"] = s.max_height;
      row["mean_height"] = s.mean_height;
      row["total_length"] = s.total_length;
      row["mean_hops"] = s.mean_hops;
      row["max_hops"] = s.hops.max_hops;
      row["greedy_hops"] = s.hops.greedy_hops;
      row["greedy_ties"] = s.hops.greedy_ties;
      row["root_dh"] = s.root_dh;
      row["drawn_length"] = s.drawn_length;
      ordered_json ps = ordered_json::array();
      for (double p : s.power_sums) ps.push_back(p);
      row["power_sums"] = ps;
      arr.push_back(row);
    }
    emit(out, arr.dump(2) + "\n");
    return kExitOk;
  }
  std::string csv = stats_csv_header(powers);
  for (const TreeStats& s : rows) csv += stats_csv_row(s);
  emit(out, csv);
  return kExitOk;
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& out_dir,
               int workers) {
  const SuiteOutcome outcome = run_suite(suite, seed, out_dir, workers);
  for (const auto& [name, pass] : outcome.lines)
    std::printf("%-24s %s\n", name.c_str(), pass ? "pass" : "FAIL");
  std::printf("suite %s: %s\n", suite.c_str(), outcome.pass ? "PASS" : "FAIL");
  return outcome.pass ? kExitOk : kExitTestFailure;
}

int run_newick_stats(const std::string& file, bool do_compare, int reps, std::uint64_t seed,
                     const std::string& out, const std::string& format) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw UsageError("cannot open input file: " + file);
  std::ostringstream buf;
  buf << f.rdbuf();
  const PhyloTree tree = parse_newick(buf.str());
  const SplitStats st = split_stats(tree);

  ordered_json doc;
  doc["file"] = file;
  doc["leaves"] = st.leaf_count;
  doc["binary_splits"] = st.binary_count;
  doc["polytomies"] = st.polytomy_count;
  doc["root_dh"] = st.root_dh;
  doc["alpha"] = st.alpha;
  ordered_json buckets = ordered_json::array();
  for (std::size_t b = 0; b < st.bucket_m.size(); ++b) {
    ordered_json row;
    row["bucket_m"] = st.bucket_m[b];
    row["median_smaller"] = st.bucket_median_smaller[b];
    buckets.push_back(row);
  }
  doc["buckets"] = buckets;

  std::string csv = "key,value\n";
  csv += "leaves," + std::to_string(st.leaf_count) + "\n";
  csv += "binary_splits," + std::to_string(st.binary_count) + "\n";
  csv += "polytomies," + std::to_string(st.polytomy_count) + "\n";
  csv += "root_dh," + std::to_string(st.root_dh) + "\n";
  csv += "alpha," + fmt17(st.alpha) + "\n";
  for (std::size_t b = 0; b < st.bucket_m.size(); ++b)
    csv += "bucket_m" + std::to_string(st.bucket_m[b]) + "_median," +
           fmt17(st.bucket_median_smaller[b]) + "\n";

  if (do_compare) {
    Rng rng(seed);
    const CompareReport cr = compare_to_model(tree, reps, rng);
    ordered_json cmp;
    cmp["reps"] = cr.reps;
    cmp["alpha_data"] = cr.alpha_data;
    cmp["alpha_model_mean"] = cr.alpha_model_mean;
    cmp["alpha_model_sd"] = cr.alpha_model_sd;
    cmp["hops_ks_stat"] = cr.hops_ks_stat;
    cmp["hops_ks_p"] = cr.hops_ks_p;
    cmp["root_dh_data"] = cr.root_dh_data;
    cmp["root_dh_model_mean"] = cr.root_dh_model_mean;
    cmp["root_dh_model_sd"] = cr.root_dh_model_sd;
    cmp["root_dh_z"] = cr.root_dh_z;
    cmp["flag_imbalance"] = cr.flag_imbalance;
    cmp["flag_balance"] = cr.flag_balance;
    cmp["pass"] = cr.pass;
    doc["compare"] = cmp;
    csv += "compare_alpha_data," + fmt17(cr.alpha_data) + "\n";
    csv += "compare_alpha_model_mean," + fmt17(cr.alpha_model_mean) + "\n";
    csv += "compare_alpha_model_sd," + fmt17(cr.alpha_model_sd) + "\n";
    csv += "compare_hops_ks_p," + fmt17(cr.hops_ks_p) + "\n";
    csv += "compare_root_dh_z," + fmt17(cr.root_dh_z) + "\n";
    csv += std::string("compare_flag_imbalance,") + (cr.flag_imbalance ? "true" : "false") + "\n";
    csv += std::string("compare_flag_balance,") + (cr.flag_balance ? "true" : "false") + "\n";
    csv += std::string("compare_pass,") + (cr.pass ? "true" : "false") + "\n";
  }

  if (format == "json") {
    emit(out, doc.dump(2) + "\n");
  } else {
    emit(out, csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical beta-splitting random trees: samplers, numerics, verification"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  int n = 20;
  int k = 2;
  int levels = 8;
  long long reps = 100;
  int workers = 1;
  bool fast = false;
  bool do_compare = false;
  int upjump_from = 0;
  int compare_reps = 200;
  std::string out, trace_path, format = "csv", suite = "core", model, newick_file;
  std::vector<int> leaves;
  std::vector<double> powers = {1.0, 2.0};

  const auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--out", out, "output file (default: stdout)");
    if (with_seed) sub->add_option("--seed", seed, "random seed (default: BETASPLIT_SEED or 0)");
  };

  CLI::App* s_dtcs = app.add_subcommand("sample-dtcs", "sample a discrete-time tree shape");
  s_dtcs->add_option("--n", n, "leaf count")->required()->check(CLI::PositiveNumber);
  s_dtcs->add_option("--format", format, "csv | json | svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  add_common(s_dtcs, true);

  CLI::App* s_ctcs = app.add_subcommand("sample-ctcs", "sample a continuous-time tree");
  s_ctcs->add_option("--n", n, "leaf count")->required()->check(CLI::PositiveNumber);
  s_ctcs->add_option("--format", format, "csv | json | svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  add_common(s_ctcs, true);

  CLI::App* s_grow = app.add_subcommand("grow", "grow a pruned tree one bud at a time");
  s_grow->add_option("--n", n, "final bud count (>= 2)")->required()->check(CLI::Range(2, 1 << 26));
  s_grow->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  s_grow->add_option("--trace", trace_path, "also write a per-step growth trace CSV here");
  add_common(s_grow, true);

  CLI::App* s_prune = app.add_subcommand("prune", "sample a tree and prune selected leaves");
  s_prune->add_option("--n", n, "leaf count of the sampled tree")->required()->check(CLI::PositiveNumber);
  s_prune->add_option("--k", k, "number of uniformly chosen leaves to keep");
  s_prune->add_option("--leaves", leaves, "explicit leaf indices to keep (comma separated)")
      ->delimiter(',');
  s_prune->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(s_prune, true);

  CLI::App* s_fringe = app.add_subcommand("fringe", "walk the fringe process upward from a leaf");
  s_fringe->add_option("--n", n, "horizon size for the occupancy weights")
      ->required()
      ->check(CLI::Range(2, 1 << 26));
  s_fringe->add_option("--levels", levels, "number of upward jumps")->check(CLI::PositiveNumber);
  s_fringe->add_option("--format", format, "csv | json | svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  add_common(s_fringe, true);

  CLI::App* s_rec = app.add_subcommand("recurrence", "exact depth/hop moment tables");
  s_rec->add_option("--N", n, "largest size to tabulate")->required()->check(CLI::Range(1, 1 << 26));
  add_common(s_rec, false);

  CLI::App* s_occ = app.add_subcommand("occupancy", "visit probabilities of the size chain");
  s_occ->add_option("--n", n, "chain start size")->required()->check(CLI::Range(1, 1 << 26));
  s_occ->add_flag("--fast", fast, "use the divide-and-conquer convolution solver");
  s_occ->add_option("--upjump", upjump_from,
                    "emit the upward-jump law from this state instead of occupancy");
  s_occ->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(s_occ, false);

  CLI::App* s_stats = app.add_subcommand("stats", "per-tree statistics over replicates");
  s_stats->add_option("--n", n, "leaf count")->required()->check(CLI::PositiveNumber);
  s_stats->add_option("--reps", reps, "replicate count")->check(CLI::PositiveNumber);
  s_stats->add_option("--model", model, "ctcs (default) | dtcs")
      ->check(CLI::IsMember({"ctcs", "dtcs"}));
  s_stats->add_option("--powers", powers, "power-sum exponents (comma separated)")->delimiter(',');
  s_stats->add_option("--workers", workers, "worker threads (never changes output)")
      ->check(CLI::PositiveNumber);
  s_stats->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(s_stats, true);

  CLI::App* s_verify = app.add_subcommand("verify", "run the verification suite");
  s_verify->add_option("--suite", suite, "core | full")->check(CLI::IsMember({"core", "full"}));
  s_verify->add_option("--workers", workers, "worker threads (never changes output)")
      ->check(CLI::PositiveNumber);
  s_verify->add_option("--out", out, "output directory")->required();
  s_verify->add_option("--seed", seed, "random seed (default: BETASPLIT_SEED or 0)");

  CLI::App* s_nwk = app.add_subcommand("newick-stats", "split statistics of a Newick file");
  s_nwk->add_option("file", newick_file, "input .nwk file")->required();
  s_nwk->add_flag("--compare", do_compare, "also compare against model samples");
  s_nwk->add_option("--reps", compare_reps, "model replicates for --compare")
      ->check(CLI::PositiveNumber);
  s_nwk->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(s_nwk, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s_dtcs->parsed()) return run_sample("dtcs", n, seed, out, format);
    if (s_ctcs->parsed()) return run_sample("ctcs", n, seed, out, format);
    if (s_grow->parsed()) return run_grow(n, seed, out, format, trace_path);
    if (s_prune->parsed()) return run_prune(n, k, seed, leaves, out, format);
    if (s_fringe->parsed()) return run_fringe(n, levels, seed, out, format);
    if (s_rec->parsed()) return run_recurrence(n, out);
    if (s_occ->parsed()) return run_occupancy(n, fast, upjump_from, out, format);
    if (s_stats->parsed())
      return run_stats(model.empty() ? "ctcs" : model, n, reps, seed, workers, powers, out,
                       format);
    if (s_verify->parsed()) return run_verify(suite, seed, out, workers);
    if (s_nwk->parsed())
      return run_newick_stats(newick_file, do_compare, compare_reps, seed, out, format);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const NewickError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
