#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "betasplit/chain.hpp"
#include "betasplit/gof.hpp"
#include "betasplit/harmonic.hpp"

namespace betasplit {

// Shared numeric caches for the experiment runners: one harmonic table, one
// extendable depth/hop recurrence table, and memoized occupancy vectors.
class Numerics {
 public:
  explicit Numerics(int harmonic_max = HarmonicTable::kDefaultMax);

  const HarmonicTable& harmonic() const { return ht_; }

  // Recurrence tables, grown on demand; the returned reference stays valid
  // until the next depth() call with a larger n.
  const NumericTable& depth(int n);

  // Memoized occupancy vector a(n, .), indexed 1..n.
  const std::vector<double>& occupancy_of(int n);

 private:
  HarmonicTable ht_;
  NumericTable table_;
  std::map<int, std::vector<double>> occ_;
};

// Run body(rep) for rep = 0..reps-1 on `workers` threads with a static
// stride-W schedule.  Bodies must write only to per-rep slots; any exception
// is rethrown on the calling thread after all workers join.  The schedule is
// an implementation detail: results must not depend on it, which is why the
// experiments below draw every replicate from its own RNG substream.
void parallel_for(long long reps, int workers, const std::function<void(long long)>& body);

// Collected output of one named experiment: scalar values, Monte Carlo
// estimates, test results, boolean checks, and SVG figures.  Entries are
// either asserted (they decide pass/fail) or report-only.  JSON and CSV
// renderings are deterministic: same inputs, byte-identical bytes.
class Report {
 public:
  explicit Report(std::string name);

  void add_input(const std::string& key, const nlohmann::ordered_json& value);
  void add_value(const std::string& key, double value);
  void add_estimate(const std::string& key, const Estimate& est);
  // pass criterion: p_value > p_threshold
  void add_test(const std::string& key, const TestResult& res, double p_threshold,
                bool asserted = true);
  void add_check(const std::string& key, bool pass, bool asserted = true);
  void add_figure(const std::string& filename, std::string svg);

  const std::string& name() const { return name_; }
  bool all_asserted_pass() const { return pass_; }
  bool has(const std::string& section, const std::string& key) const;

  nlohmann::ordered_json json() const;  // includes the final "pass" field
  std::string to_json() const;
  std::string to_csv() const;
  // Writes <name>.json, <name>.csv and any figures into out_dir.
  void write_files(const std::string& out_dir) const;

  const std::vector<std::pair<std::string, std::string>>& figures() const { return figures_; }

 private:
  std::string name_;
  nlohmann::ordered_json inputs_;
  nlohmann::ordered_json values_;
  nlohmann::ordered_json estimates_;
  nlohmann::ordered_json tests_;
  nlohmann::ordered_json checks_;
  std::vector<std::string> csv_rows_;
  std::vector<std::pair<std::string, std::string>> figures_;
  bool pass_ = true;
};

// --- Named experiments -----------------------------------------------------
// Each experiment is deterministic given (seed, reps, sizes); the worker
// count changes wall time only, never a single emitted byte.

// Branchpoint of two random leaves is Exponential(1): for each n in
// {10, 100, 1000}, ten seed variants of `reps` two-leaf samples each are
// KS-tested against Exponential(1); at least 9 of 10 must clear p > 0.01.
Report exp_branchpoint(std::uint64_t seed, int workers, long long reps = 100000);

// Delete-a-leaf consistency: prune(k of k+1 leaves) versus a direct k-leaf
// sample.  Shape-class chi-square, per-shape per-coordinate segment KS, and
// total-length KS.  k = 3 adds the exact two-segment density factors
// (offset ~ Exp(3/2), remainder ~ Exp(1), fair side) and k = 4 adds the
// four-case mixture identity for the pruned three-bud tree after deleting a
// uniform bud, tested as a conditional chi-square.
Report exp_consistency(int k, std::uint64_t seed, int workers, long long reps = 100000);

// Sum of squared clade sizes at fixed times: mean of Q_n(t) at n = 200,
// t in {0.5, 1, 2} versus the exact n + (n^2 - n) e^{-t}, 4 s.e. bands.
Report exp_sum_squares(std::uint64_t seed, int workers, long long reps = 100000);

// Mean-depth constant: t[N] - (6/pi^2) log N against 0.7951556604, the
// sandwich bounds (6/pi^2) log n <= t[n] <= 1 + log(n-1) for every n <= N,
// and the 1/(2 zeta(2) n)-corrected residual shrinking along a log grid.
Report exp_mean_depth(Numerics& num, int n_max = 50000);

// Occupancy and first-upward-jump rows at n = 50000 against their reference
// values at i in {2, 3, 4, 5, 10, 20, 30}, tolerance 0.0005 per entry.  The
// occupancy row is asserted only when assert_occupancy_row is set (one
// reference entry is known to sit just outside the band; the verify suite
// reports it flagged, the acceptance runner asserts it as stated).
Report exp_table4(Numerics& num, bool assert_occupancy_row);

// Exact cross identities t[n] = sum_i a(n,i)/h_{i-1} and
// thop[n] = sum_i a(n,i), to 1e-8, n in {10, 100, 1000, 10000}.
Report exp_cross_identities(Numerics& num);

// Length constant: truncated series value at n = 50000 inside [0.606, 0.610];
// Monte Carlo E[L_n]/n at n = 20000 against the same series at n = 20000
// (an exact finite-n identity) within 4 s.e.; report-only gap to a(50000,2).
Report exp_length(Numerics& num, std::uint64_t seed, int workers,
                  long long reps = 1000, int n_mc = 20000);

// Inductive growth: grown 4-bud shape classes versus pruned direct samples
// (two-sample chi-square), mean bud height of grown 1000-bud trees versus
// the recurrence mean, and one-step kind frequencies at 10^4 buds against
// the length-series and occupancy targets.
Report exp_growth(Numerics& num, std::uint64_t seed, int workers,
                  long long shape_reps = 1000000, long long height_reps = 400,
                  long long kind_reps = 4000, int kind_n = 10000);

// Depth CLT: standardized random-leaf depths at n in {800, 3200, 12800};
// moment checks at n = 3200, strictly decreasing KS distance to the normal,
// reported skewness, and a histogram figure with the normal overlay.
Report exp_clt(Numerics& num, std::uint64_t seed, int workers, long long reps = 100000);

// Depth tail bound: empirical P(depth > t) at n = 1000 against
// (n-1) e^{-t} + 5 MC s.e. for t in {2, 4, 6, 8}.
Report exp_tail_bound(Numerics& num, std::uint64_t seed, int workers,
                      long long reps = 200000, int n = 1000);

// Logarithmic drift and variance sums at j = 10^5 against -pi^2/6 and
// 2 zeta(3); scaled convergence-rate values reported along a grid.
Report exp_drift();

// Height correlation of two random leaves: Pearson estimate against the
// 0.39494 reference band, plus the law-of-total-variance split: the plain
// height variance on one half of the replicates must match the
// within-plus-between decomposition on the other half within 4 s.e.
Report exp_two_leaf(int n, std::uint64_t seed, int workers, long long reps = 100000);

// Tree-text bridge: 100-tree round-trip corpus, a 10^4-case parser fuzz run,
// and model-vs-model comparison of an exported 500-leaf sample.
Report exp_newick(std::uint64_t seed, int workers);

// Report-only numerics: correlation at n = 10^5, max-height/log n trend,
// S^(2)/(n^2 log n) heuristic, and the subdominant length-correction trend.
// Nothing here is asserted; the suite only requires the values to be present.
Report exp_report_only(Numerics& num, std::uint64_t seed, int workers);

// --- Suite runner ------------------------------------------------------------

struct SuiteOutcome {
  bool pass = true;
  // experiment name -> all asserted entries passed
  std::vector<std::pair<std::string, bool>> lines;
};

// Runs the named suite ("core" or "full"), writing each experiment's JSON,
// CSV and figures plus summary.json/summary.csv into out_dir.  Returns the
// per-experiment outcomes; pass is the conjunction.  Throws
// std::invalid_argument for an unknown suite name.
SuiteOutcome run_suite(const std::string& suite, std::uint64_t seed,
                       const std::string& out_dir, int workers);

}  // namespace betasplit
