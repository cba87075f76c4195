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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noisykeys/bitkeys.hpp"
#include "noisykeys/bounds.hpp"
#include "noisykeys/matcher.hpp"

namespace noisykeys::simulator {

// idealized: fresh i.i.d. fair bits per value per trial (the model the
// probabilities are stated over). keyed: the production hash with a
// per-trial seed.
enum class HashMode { idealized, keyed };

// `count` distinct values held by exactly the sources in `sources`
// (1-based ids).
struct GroupSpec {
  std::vector<std::uint32_t> sources;
  std::uint64_t count = 0;
};

struct Scenario {
  std::uint32_t s = 0;
  std::vector<GroupSpec> groups;
  std::int64_t n = 0;
  double p_f = 0.0;
  std::int64_t t = 1;
  HashMode hash_mode = HashMode::idealized;
  std::string master_seed;

  // Derived on construction.
  std::vector<std::uint64_t> m;         // keys per source
  bounds::uint128 cross_pairs = 0;      // |Q|
  std::uint64_t same_pairs = 0;         // same-value cross-source pairs
};

// Validates and derives. Throws std::invalid_argument on empty groups, empty
// or out-of-range source subsets, repeated sources within a subset, zero
// counts, or parameter-range violations.
Scenario build_scenario(std::uint32_t s, std::vector<GroupSpec> groups,
                        std::int64_t n, double p_f, std::int64_t t,
                        HashMode hash_mode, std::string master_seed);

struct TrialOutcome {
  matcher::MatchReport report;
  std::uint64_t pairs_same = 0;
  std::uint64_t pairs_diff = 0;
  // Ground-truth value groups by size z, and how many were revealed.
  std::map<std::uint32_t, std::uint64_t> groups_by_size;
  std::map<std::uint32_t, std::uint64_t> revealed_by_size;
};

// One full pipeline pass (hash, noise, match, score), deterministic given
// (scenario.master_seed, trial_index).
TrialOutcome run_trial(const Scenario& scenario, std::uint64_t trial_index);

struct TrialStats {
  std::uint64_t trials = 0;
  std::uint64_t observed_m = 0;
  std::uint64_t observed_u = 0;
  std::uint64_t observed_r = 0;
  std::uint64_t pairs_same_value = 0;
  std::uint64_t pairs_diff_value = 0;
  std::uint64_t conflicted_clusters = 0;
  std::map<std::uint32_t, std::uint64_t> groups_by_size;
  std::map<std::uint32_t, std::uint64_t> revealed_by_size;
};

// Aggregates trials 0..trials-1. threads = 0 picks hardware concurrency
// (overridable via NOISYKEYS_THREADS); results are identical for any thread
// count because aggregation only sums counts. Throws on trials == 0.
TrialStats run_trials(const Scenario& scenario, std::uint64_t trials,
                      unsigned threads = 0);

struct BoundComparison {
  std::string name;
  std::uint64_t observations = 0;
  double empirical = 0.0;
  double analytic = 0.0;
  double std_error = 0.0;
  double zscore = 0.0;
  bool pass = true;  // |zscore| <= 4
};

// Empirical rates against the closed forms: M rate vs p_M, U rate vs p_U,
// and one revelation comparison per group size present. Comparisons with
// zero observations are omitted; a zero binomial standard error is floored
// at 1/N so z-scores stay finite.
std::vector<BoundComparison> compare_to_bounds(const TrialStats& stats,
                                               const Scenario& scenario);

// Scenario file: JSON with keys sources, groups, n, p_f, t, hash_mode, seed,
// trials. Parse errors name the offending key.
struct SimulationSpec {
  Scenario scenario;
  std::uint64_t trials = 0;
};

SimulationSpec parse_scenario_json(const std::string& text);
SimulationSpec load_scenario_file(const std::string& path);

}  // namespace noisykeys::simulator
