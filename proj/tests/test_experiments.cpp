#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "betasplit/experiments.hpp"
#include "doctest.h"

using namespace betasplit;

TEST_SUITE("experiments") {
  TEST_CASE("parallel_for covers every index once, any worker count") {
    for (int workers : {1, 4}) {
      const long long reps = 1000;
      std::vector<std::atomic<int>> hits(reps);
      for (auto& h : hits) h.store(0);
      parallel_for(reps, workers, [&](long long r) { hits[r].fetch_add(1); });
      for (long long r = 0; r < reps; ++r) CHECK(hits[r].load() == 1);
    }
  }

  TEST_CASE("parallel_for propagates the first exception") {
    CHECK_THROWS_AS(
        parallel_for(100, 4,
                     [](long long r) {
                       if (r == 57) throw std::runtime_error("boom");
                     }),
        std::runtime_error);
  }

  TEST_CASE("report bookkeeping: sections, pass logic, deterministic dumps") {
    const auto build = [] {
      Report rep("wiring_check");
      rep.add_input("n", 42);
      rep.add_value("answer", 42.0);
      rep.add_estimate("mean", make_estimate(1.0, 0.1, 100));
      TestResult tr;
      tr.statistic = 0.05;
      tr.p_value = 0.7;
      rep.add_test("ks_demo", tr, 0.01, true);
      rep.add_check("demo_check", true, true);
      rep.add_check("soft_check", false, false);  // report-only failure
      return rep;
    };
    Report rep = build();
    CHECK(rep.name() == "wiring_check");
    CHECK(rep.all_asserted_pass());
    CHECK(rep.has("values", "answer"));
    CHECK(rep.has("tests", "ks_demo"));
    CHECK(rep.has("checks", "soft_check"));
    CHECK_FALSE(rep.has("values", "missing"));
    // identical construction gives byte-identical serials
    CHECK(rep.to_json() == build().to_json());
    CHECK(rep.to_csv() == build().to_csv());
    CHECK(rep.to_csv().rfind("kind,name,value", 0) == 0);

    Report bad("failing");
    TestResult low;
    low.statistic = 0.9;
    low.p_value = 1e-9;
    bad.add_test("impossible", low, 0.01, true);
    CHECK_FALSE(bad.all_asserted_pass());

    Report soft("soft");
    soft.add_test("impossible", low, 0.01, false);
    CHECK(soft.all_asserted_pass());
  }

  TEST_CASE("numerics cache: tables extend in place and stay consistent") {
    Numerics num(4096);
    const NumericTable& t100 = num.depth(100);
    const double t50 = t100.t[50];
    CHECK(t100.t[4] == doctest::Approx(17.0 / 11.0).epsilon(1e-14));
    const NumericTable& t400 = num.depth(400);
    CHECK(t400.n_max() >= 400);
    CHECK(t400.t[50] == t50);  // extension kept the prefix bitwise
    const std::vector<double>& occ = num.occupancy_of(200);
    const std::vector<double>& occ_again = num.occupancy_of(200);
    CHECK(&occ == &occ_again);  // memoized
    CHECK(occ[200] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(num.harmonic().n_max() >= 4096);
  }

  TEST_CASE("cheap suite members pass end to end") {
    Numerics num(16384);
    const Report drift = exp_drift();
    CHECK(drift.all_asserted_pass());
    CHECK(drift.has("checks", "drift_within_1e3"));
    CHECK(drift.has("checks", "variance_within_1e2"));

    const Report ids = exp_cross_identities(num);
    CHECK(ids.all_asserted_pass());

    const Report depth = exp_mean_depth(num, 10000);
    CHECK(depth.all_asserted_pass());
    CHECK(depth.has("values", "c0_estimate"));
  }

  TEST_CASE("sum-of-squares experiment passes with reduced replication") {
    const Report rep = exp_sum_squares(/*seed=*/0, /*workers=*/2, /*reps=*/2000);
    CHECK(rep.all_asserted_pass());
  }

  TEST_CASE("two-leaf experiment: degenerate n = 2 keeps exact correlation 1") {
    const Report rep = exp_two_leaf(2, /*seed=*/0, /*workers=*/2, /*reps=*/5000);
    CHECK(rep.all_asserted_pass());  // the correlation band only binds at n >= 1e5
    CHECK(rep.has("estimates", "height_correlation"));
    const double r = rep.json()["estimates"]["height_correlation"]["value"].get<double>();
    CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("experiment outputs are reproducible run to run") {
    const Report a = exp_two_leaf(100, 7, 1, 2000);
    const Report b = exp_two_leaf(100, 7, 4, 2000);  // worker count must not matter
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_csv() == b.to_csv());
  }

  TEST_CASE("unknown suite names are rejected") {
    CHECK_THROWS_AS((void)run_suite("fast", 0, "", 1), std::invalid_argument);
  }
}
