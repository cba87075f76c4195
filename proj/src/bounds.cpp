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

#include "noisykeys/bounds.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace noisykeys::bounds {

namespace {

void check_pf(double p_f) {
  if (!(p_f >= 0.0 && p_f <= 0.5)) {
    throw std::invalid_argument("p_f must be in [0, 0.5]");
  }
}

void check_nt(std::int64_t n, std::int64_t t) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (t < 1 || t > n) throw std::invalid_argument("t must be in [1, n]");
}

uint128 choose2(uint128 v) { return v % 2 == 0 ? (v / 2) * (v - 1) : v * ((v - 1) / 2); }

}  // namespace

std::string to_string(uint128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::uint64_t CohortSpec::total_keys() const {
  std::uint64_t total = 0;
  for (std::uint64_t mi : m) {
    if (total > UINT64_MAX - mi) {
      throw std::overflow_error("cohort: total key count exceeds 64 bits");
    }
    total += mi;
  }
  return total;
}

void CohortSpec::validate() const {
  if (m.empty()) throw std::invalid_argument("cohort: need at least 1 source");
  for (std::uint64_t mi : m) {
    if (mi == 0) throw std::invalid_argument("cohort: every m_i must be >= 1");
  }
}

double delta_prob(double p_f) {
  check_pf(p_f);
  return 2.0 * p_f * (1.0 - p_f);
}

binomial::LogProb log_mismatch_prob(std::int64_t n, std::int64_t t) {
  check_nt(n, t);
  return binomial::binom_range_prob(0, t - 1, n, 0.5);
}

double mismatch_prob(std::int64_t n, std::int64_t t) {
  return log_mismatch_prob(n, t).prob();
}

binomial::LogProb log_missed_match_prob(std::int64_t n, std::int64_t t,
                                        double p_f) {
  check_nt(n, t);
  return binomial::binom_range_prob(t, n, n, delta_prob(p_f));
}

double missed_match_prob(std::int64_t n, std::int64_t t, double p_f) {
  return log_missed_match_prob(n, t, p_f).prob();
}

uint128 pair_count(const CohortSpec& cohort) {
  cohort.validate();
  const uint128 total = cohort.total_keys();  // throws past 64 bits
  uint128 pairs = choose2(total);
  for (std::uint64_t mi : cohort.m) {
    pairs -= choose2(static_cast<uint128>(mi));
  }
  return pairs;
}

binomial::LogProb log_pair_error_bound(std::int64_t n, std::int64_t t,
                                       double p_f) {
  const auto m = log_mismatch_prob(n, t);
  const auto u = log_missed_match_prob(n, t, p_f);
  return m.value >= u.value ? m : u;
}

double pair_error_bound(std::int64_t n, std::int64_t t, double p_f) {
  return log_pair_error_bound(n, t, p_f).prob();
}

double expected_match_errors(const CohortSpec& cohort, std::int64_t n,
                             std::int64_t t, double p_f) {
  const uint128 pairs = pair_count(cohort);
  const long double bound = std::exp(
      static_cast<long double>(log_pair_error_bound(n, t, p_f).value));
  return static_cast<double>(bound * static_cast<long double>(pairs));
}

double match_error_tail(const CohortSpec& cohort, std::int64_t n,
                        std::int64_t t, double p_f, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("match_error_tail: h must be > 0");
  return std::min(1.0, expected_match_errors(cohort, n, t, p_f) / h);
}

double prob_all_correct(const CohortSpec& cohort, std::int64_t n,
                        std::int64_t t, double p_f) {
  return std::max(0.0, 1.0 - expected_match_errors(cohort, n, t, p_f));
}

binomial::LogProb log_revelation_prob(std::int64_t z, std::int64_t n,
                                      double p_f) {
  if (z < 1) throw std::invalid_argument("revelation_prob: z must be >= 1");
  if (n < 1) throw std::invalid_argument("revelation_prob: n must be >= 1");
  check_pf(p_f);
  const auto base = binomial::binom_range_prob(0, z / 2, z, p_f);
  if (base.is_zero()) return binomial::LogProb::impossible();
  return binomial::LogProb{static_cast<double>(n) * base.value};
}

double revelation_prob(std::int64_t z, std::int64_t n, double p_f) {
  return log_revelation_prob(z, n, p_f).prob();
}

binomial::LogProb log_revelation_bound(std::int64_t s, std::int64_t n,
                                       double p_f) {
  if (s < 1) throw std::invalid_argument("revelation_bound: s must be >= 1");
  auto best = binomial::LogProb::impossible();
  for (std::int64_t z = 1; z <= s; ++z) {
    const auto pz = log_revelation_prob(z, n, p_f);
    if (pz.value > best.value) best = pz;
  }
  return best;
}

double revelation_bound(std::int64_t s, std::int64_t n, double p_f) {
  return log_revelation_bound(s, n, p_f).prob();
}

double expected_revealed(const CohortSpec& cohort, std::int64_t n, double p_f) {
  cohort.validate();
  const long double bound = std::exp(static_cast<long double>(
      log_revelation_bound(cohort.sources(), n, p_f).value));
  return static_cast<double>(bound *
                             static_cast<long double>(cohort.total_keys()));
}

BoundSet evaluate(const CohortSpec& cohort, std::int64_t n, std::int64_t t,
                  double p_f) {
  cohort.validate();
  BoundSet out;
  out.p_m = mismatch_prob(n, t);
  out.p_u = missed_match_prob(n, t, p_f);
  out.p_w_bound = pair_error_bound(n, t, p_f);
  out.pairs = pair_count(cohort);
  out.expected_errors = expected_match_errors(cohort, n, t, p_f);
  out.prob_all_correct_lb = std::max(0.0, 1.0 - out.expected_errors);
  out.p_r_max = revelation_bound(cohort.sources(), n, p_f);
  out.expected_revealed_ub = expected_revealed(cohort, n, p_f);
  return out;
}

}  // namespace noisykeys::bounds
