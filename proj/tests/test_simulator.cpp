// Copyright 2026 The noisykeys Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "noisykeys/simulator.hpp"

#include <cmath>

#include <doctest.h>

using namespace noisykeys;
namespace ns = noisykeys::simulator;

namespace {

ns::Scenario full_overlap(std::uint64_t count, std::int64_t n, double p_f,
                          std::int64_t t, const std::string& seed,
                          ns::HashMode mode = ns::HashMode::idealized) {
  return ns::build_scenario(2, {{{1, 2}, count}}, n, p_f, t, mode, seed);
}

ns::Scenario disjoint(std::uint64_t count, std::int64_t n, double p_f,
                      std::int64_t t, const std::string& seed) {
  return ns::build_scenario(2, {{{1}, count}, {{2}, count}}, n, p_f, t,
                            ns::HashMode::idealized, seed);
}

}  // namespace

TEST_CASE("build_scenario derives counts and validates") {
  const auto sc = ns::build_scenario(3, {{{1, 2, 3}, 10}, {{1}, 5}}, 16, 0.1,
                                     4, ns::HashMode::idealized, "s");
  CHECK(sc.m == std::vector<std::uint64_t>{15, 10, 10});
  CHECK(sc.same_pairs == 30);  // 10 values with C(3,2) cross pairs each

  const auto two = full_overlap(100, 16, 0.1, 4, "s");
  CHECK(two.m == std::vector<std::uint64_t>{100, 100});
  CHECK(two.cross_pairs == 10000);
  CHECK(two.same_pairs == 100);

  const auto split = disjoint(50, 16, 0.1, 4, "s");
  CHECK(split.m == std::vector<std::uint64_t>{50, 50});
  CHECK(split.same_pairs == 0);

  CHECK_THROWS_AS(ns::build_scenario(2, {}, 16, 0.1, 4,
                                     ns::HashMode::idealized, "s"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ns::build_scenario(2, {{{}, 5}}, 16, 0.1, 4,
                                     ns::HashMode::idealized, "s"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ns::build_scenario(2, {{{1, 2}, 0}}, 16, 0.1, 4,
                                     ns::HashMode::idealized, "s"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ns::build_scenario(2, {{{1, 3}, 5}}, 16, 0.1, 4,
                                     ns::HashMode::idealized, "s"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ns::build_scenario(2, {{{1, 1}, 5}}, 16, 0.1, 4,
                                     ns::HashMode::idealized, "s"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ns::build_scenario(2, {{{1, 2}, 5}}, 16, 0.6, 4,
                                     ns::HashMode::idealized, "s"),
                  std::invalid_argument);
}

TEST_CASE("run_trial is deterministic and handles the noiseless case") {
  const auto sc = full_overlap(30, 32, 0.0, 1, "det");
  const auto a = ns::run_trial(sc, 3);
  const auto b = ns::run_trial(sc, 3);
  CHECK(a.report.false_matches == b.report.false_matches);
  CHECK(a.report.missed_matches == b.report.missed_matches);
  CHECK(a.report.revelations == b.report.revelations);
  CHECK(a.revealed_by_size == b.revealed_by_size);

  // p_f = 0, t = 1: equal codes match exactly, and every group reveals.
  CHECK(a.report.false_matches == 0);
  CHECK(a.report.missed_matches == 0);
  CHECK(a.report.revelations == 60);
  CHECK(a.groups_by_size.at(2) == 30);
  CHECK(a.revealed_by_size.at(2) == 30);

  const auto c = ns::run_trial(sc, 4);
  CHECK((c.report.false_matches == a.report.false_matches));  // both 0

  // Keyed mode runs the production hash path.
  const auto keyed = full_overlap(10, 32, 0.0, 1, "det", ns::HashMode::keyed);
  const auto kt = ns::run_trial(keyed, 0);
  CHECK(kt.report.missed_matches == 0);
  CHECK(kt.report.revelations == 20);
}

TEST_CASE("heavy noise at a quarter threshold misses nearly every match") {
  // p_delta = 1/2 pushes same-value distance to about n/2, far above n/4.
  const auto sc = full_overlap(20, 64, 0.5, 16, "hot");
  std::uint64_t missed = 0, same = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto outcome = ns::run_trial(sc, i);
    missed += outcome.report.missed_matches;
    same += outcome.pairs_same;
  }
  CHECK(same == 1000);
  CHECK(missed >= 990);  // p_U(64, 16, 0.5) is within a hair of 1
}

TEST_CASE("run_trials aggregates and is threadcount-invariant") {
  const auto sc = full_overlap(25, 32, 0.1, 10, "agg");
  const auto one = ns::run_trials(sc, 1, 1);
  const auto single = ns::run_trial(sc, 0);
  CHECK(one.trials == 1);
  CHECK(one.observed_u == single.report.missed_matches);
  CHECK(one.observed_r == single.report.revelations);

  const auto serial = ns::run_trials(sc, 64, 1);
  const auto parallel = ns::run_trials(sc, 64, 4);
  CHECK(serial.observed_m == parallel.observed_m);
  CHECK(serial.observed_u == parallel.observed_u);
  CHECK(serial.observed_r == parallel.observed_r);
  CHECK(serial.groups_by_size == parallel.groups_by_size);
  CHECK(serial.revealed_by_size == parallel.revealed_by_size);

  CHECK_THROWS_AS(ns::run_trials(sc, 0, 1), std::invalid_argument);

  const auto none = ns::run_trials(disjoint(25, 32, 0.1, 10, "agg"), 20, 2);
  CHECK(none.observed_u == 0);
  CHECK(none.pairs_same_value == 0);
}

TEST_CASE("empirical rates track the closed forms") {
  // 2000 trials x 50 same-value pairs = 1e5 observations of U, plus the
  // same-size revelation sample; all within 3 standard errors.
  const auto sc = full_overlap(50, 32, 0.1, 10, "conv");
  const auto stats = ns::run_trials(sc, 2000);
  const auto rows = ns::compare_to_bounds(stats, sc);
  REQUIRE(rows.size() == 3);  // p_M, p_U, p_R[z=2]
  for (const auto& row : rows) {
    CAPTURE(row.name);
    CHECK(std::abs(row.zscore) <= 3.0);
    CHECK(std::isfinite(row.zscore));
  }
}

TEST_CASE("the mismatch rate does not depend on the flip probability") {
  // Lemma-style flip independence: cross-value match rates at several p_f
  // all sit within 3 standard errors of the same closed form.
  const double p_m = bounds::mismatch_prob(32, 10);
  for (const double pf : {0.0, 0.1, 0.3}) {
    const auto sc = disjoint(40, 32, pf, 10, "flipfree");
    const auto stats = ns::run_trials(sc, 100);
    const double obs = static_cast<double>(stats.pairs_diff_value);
    const double rate = static_cast<double>(stats.observed_m) / obs;
    const double se = std::sqrt(p_m * (1 - p_m) / obs);
    CAPTURE(pf);
    CHECK(std::abs(rate - p_m) <= 3 * se);
  }
}

TEST_CASE("per-trial error totals respect the expectation bounds") {
  // Empirical mean of w stays below the per-pair bound times |Q| (within
  // sampling error), and the share of zero-error trials is at least the
  // corresponding lower bound minus sampling error.
  const auto sc = full_overlap(10, 64, 0.08, 20, "wbound");
  const std::uint64_t trials = 400;
  double sum_w = 0, sum_w2 = 0;
  std::uint64_t zero_trials = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto outcome = ns::run_trial(sc, i);
    const double w = static_cast<double>(outcome.report.total_errors);
    sum_w += w;
    sum_w2 += w * w;
    zero_trials += outcome.report.total_errors == 0;
  }
  const double mean_w = sum_w / trials;
  const double var_w =
      std::max(0.0, sum_w2 / trials - mean_w * mean_w);
  const double se_mean = std::sqrt(var_w / trials);

  const double bound = bounds::pair_error_bound(64, 20, 0.08) *
                       static_cast<double>(sc.cross_pairs);
  CHECK(bound < 0.5);  // the zero-error lower bound stays informative
  CHECK(mean_w <= bound + 4 * se_mean);

  const double zero_lb = std::max(0.0, 1.0 - bound);
  const double zero_rate = static_cast<double>(zero_trials) / trials;
  const double zero_se = std::sqrt(zero_lb * (1 - zero_lb) / trials);
  CHECK(zero_rate >= zero_lb - 4 * std::max(zero_se, 1.0 / trials));
}

TEST_CASE("compare_to_bounds reports finite z-scores at zero rates") {
  // t=1 on 32-bit idealized codes: p_M = 2^-32, so the observed M count is
  // 0; the z-score must still be finite.
  const auto sc = disjoint(20, 32, 0.1, 1, "zero");
  const auto stats = ns::run_trials(sc, 50);
  const auto rows = ns::compare_to_bounds(stats, sc);
  REQUIRE(rows.size() >= 1);
  bool saw_m = false;
  for (const auto& row : rows) {
    CHECK(std::isfinite(row.zscore));
    if (row.name == "p_M") {
      saw_m = true;
      CHECK(row.empirical == 0.0);
    }
  }
  CHECK(saw_m);
}

TEST_CASE("compare_to_bounds emits one revelation row per group size") {
  const auto sc = ns::build_scenario(2, {{{1, 2}, 30}, {{1}, 10}}, 32, 0.1,
                                     10, ns::HashMode::idealized, "perz");
  const auto stats = ns::run_trials(sc, 200);
  const auto rows = ns::compare_to_bounds(stats, sc);
  bool z1 = false, z2 = false;
  for (const auto& row : rows) {
    if (row.name == "p_R[z=1]") z1 = true;
    if (row.name == "p_R[z=2]") z2 = true;
  }
  CHECK(z1);
  CHECK(z2);
}

TEST_CASE("a deliberately mismatched analytic threshold raises FAIL") {
  const auto sc = full_overlap(50, 32, 0.1, 10, "neg");
  const auto stats = ns::run_trials(sc, 500);
  ns::Scenario wrong = sc;
  wrong.t = 16;  // analytic p_U now far below the simulated rate
  const auto rows = ns::compare_to_bounds(stats, wrong);
  bool failed = false;
  for (const auto& row : rows) {
    if (row.name == "p_U") failed = !row.pass;
  }
  CHECK(failed);
}

TEST_CASE("idealized and keyed hash modes agree statistically") {
  // Two-sample comparison of M rates at desk scale; the idealized model and
  // the production hash should be indistinguishable (|z| <= 4).
  const std::uint64_t trials = 120;
  const auto ideal = ns::run_trials(disjoint(30, 32, 0.1, 10, "mode"), trials);
  const auto keyed = ns::run_trials(
      ns::build_scenario(2, {{{1}, 30}, {{2}, 30}}, 32, 0.1, 10,
                         ns::HashMode::keyed, "mode"),
      trials);
  REQUIRE(ideal.pairs_diff_value == keyed.pairs_diff_value);
  REQUIRE(ideal.pairs_diff_value >= 100000);
  const double n = static_cast<double>(ideal.pairs_diff_value);
  const double r1 = static_cast<double>(ideal.observed_m) / n;
  const double r2 = static_cast<double>(keyed.observed_m) / n;
  const double pooled =
      static_cast<double>(ideal.observed_m + keyed.observed_m) / (2 * n);
  const double se = std::sqrt(std::max(pooled * (1 - pooled) * 2 / n, 1e-18));
  CHECK(std::abs(r1 - r2) / se <= 4.0);
}

TEST_CASE("scenario JSON parsing names the offending key") {
  const char* good = R"({
    "sources": 2, "n": 32, "p_f": 0.1, "t": 10,
    "hash_mode": "idealized", "seed": "j", "trials": 5,
    "groups": [{"sources": [1, 2], "count": 7}]
  })";
  const auto spec = ns::parse_scenario_json(good);
  CHECK(spec.trials == 5);
  CHECK(spec.scenario.m == std::vector<std::uint64_t>{7, 7});

  const auto expect_message = [](const char* text, const char* needle) {
    try {
      ns::parse_scenario_json(text);
      FAIL_CHECK("expected a parse failure mentioning " << needle);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_message(R"({"sources": 2})", "'n'");
  expect_message(R"({
    "sources": 2, "n": 32, "p_f": 0.1, "t": 10,
    "hash_mode": "both", "seed": "j", "trials": 5,
    "groups": [{"sources": [1, 2], "count": 7}]
  })",
                 "'hash_mode'");
  expect_message(R"({
    "sources": 2, "n": 32, "p_f": 0.1, "t": 10,
    "hash_mode": "keyed", "seed": "j", "trials": 5,
    "groups": []
  })",
                 "'groups'");
  expect_message(R"({
    "sources": 2, "n": "many", "p_f": 0.1, "t": 10,
    "hash_mode": "keyed", "seed": "j", "trials": 5,
    "groups": [{"sources": [1, 2], "count": 7}]
  })",
                 "'n'");
  expect_message("not json", "JSON");
}
