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
#include <string>
#include <vector>

#include "noisykeys/binomial.hpp"

namespace noisykeys::bounds {

// Pair counts multiply probabilities near 1e-13, so they are kept exact in
// 128-bit integers; cohorts that would overflow are rejected, never rounded.
using uint128 = unsigned __int128;
std::string to_string(uint128 v);

// Key counts per source, m[i] keys from source i (s = m.size() sources).
// Keys within one source are assumed to come from distinct values.
struct CohortSpec {
  std::vector<std::uint64_t> m;

  std::int64_t sources() const { return static_cast<std::int64_t>(m.size()); }
  // Checked sum of m; throws std::overflow_error past 64 bits.
  std::uint64_t total_keys() const;
  // Throws std::invalid_argument unless s >= 1 and every m_i >= 1.
  void validate() const;
};

// Probability that bit-flipping alters one bit of a pair but not the other:
// 2 p_f (1 - p_f). Throws std::invalid_argument outside [0, 0.5].
double delta_prob(double p_f);

// p_M = B(0, t-1, n, 1/2): probability two noisy keys of *different* values
// land within distance t. Flip-independent, hence no p_f parameter.
binomial::LogProb log_mismatch_prob(std::int64_t n, std::int64_t t);
double mismatch_prob(std::int64_t n, std::int64_t t);

// p_U = B(t, n, n, 2 p_f (1 - p_f)): probability noise pushes two keys of
// the *same* value to distance >= t.
binomial::LogProb log_missed_match_prob(std::int64_t n, std::int64_t t,
                                        double p_f);
double missed_match_prob(std::int64_t n, std::int64_t t, double p_f);

// |Q| = C(sum m_i, 2) - sum C(m_i, 2), the cross-source pair count.
uint128 pair_count(const CohortSpec& cohort);

// max(p_M, p_U), a bound on the per-pair error probability of either kind.
binomial::LogProb log_pair_error_bound(std::int64_t n, std::int64_t t,
                                       double p_f);
double pair_error_bound(std::int64_t n, std::int64_t t, double p_f);

// Upper bound on the expected number of matching errors over all pairs:
// max(p_M, p_U) * |Q|.
double expected_match_errors(const CohortSpec& cohort, std::int64_t n,
                             std::int64_t t, double p_f);

// Markov tail: P(errors >= h) <= min(1, expected / h). Throws on h <= 0.
double match_error_tail(const CohortSpec& cohort, std::int64_t n,
                        std::int64_t t, double p_f, double h);

// Lower bound on the probability of zero matching errors:
// max(0, 1 - expected).
double prob_all_correct(const CohortSpec& cohort, std::int64_t n,
                        std::int64_t t, double p_f);

// p_R(z) = B(0, floor(z/2), z, p_f)^n: probability the median of a z-key
// group equals the group's hash code in every position. Exponentiation is
// n * ln B so the small deficit of a near-1 base survives.
binomial::LogProb log_revelation_prob(std::int64_t z, std::int64_t n,
                                      double p_f);
double revelation_prob(std::int64_t z, std::int64_t n, double p_f);

// max over z in {1..s} of p_R(z): a group may hold 1..s keys.
binomial::LogProb log_revelation_bound(std::int64_t s, std::int64_t n,
                                       double p_f);
double revelation_bound(std::int64_t s, std::int64_t n, double p_f);

// Upper bound on the expected number of keys whose group median reveals the
// hash code: revelation_bound * sum m_i.
double expected_revealed(const CohortSpec& cohort, std::int64_t n, double p_f);

// All bound values for one (cohort, n, t, p_f) configuration.
struct BoundSet {
  double p_m = 0;
  double p_u = 0;
  double p_w_bound = 0;                 // max(p_m, p_u)
  uint128 pairs = 0;                    // |Q|
  double expected_errors = 0;           // p_w_bound * pairs
  double prob_all_correct_lb = 0;       // max(0, 1 - expected_errors)
  double p_r_max = 0;                   // revelation bound over z in {1..s}
  double expected_revealed_ub = 0;      // p_r_max * sum m_i
};

BoundSet evaluate(const CohortSpec& cohort, std::int64_t n, std::int64_t t,
                  double p_f);

}  // namespace noisykeys::bounds
