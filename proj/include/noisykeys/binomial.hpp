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

#include <cmath>
#include <cstdint>

#include <gmpxx.h>

namespace noisykeys::binomial {

// Natural log of a probability in [0, 1]; -infinity encodes probability 0.
struct LogProb {
  double value = -std::numeric_limits<double>::infinity();

  double prob() const { return std::exp(value); }
  bool is_zero() const { return std::isinf(value) && value < 0; }

  static LogProb certain() { return LogProb{0.0}; }
  static LogProb impossible() { return LogProb{}; }

  friend bool operator==(const LogProb&, const LogProb&) = default;
};

// ln b(k, n, p) for the binomial pmf b(k, n, p) = C(n,k) p^k (1-p)^(n-k).
// Computed via log-gamma in extended precision; p = 0 and p = 1 are handled
// by branch so degenerate sweeps stay NaN-free. Throws std::invalid_argument
// on k outside [0, n], n < 1 or p outside [0, 1].
LogProb log_binom_pmf(std::int64_t k, std::int64_t n, double p);

// ln B(k_o, k_f, n, p) for the binomial range probability
// B(k_o, k_f, n, p) = sum_{k=k_o}^{k_f} b(k, n, p).
//
// An empty range (k_o > k_f) has probability 0. Terms accumulate
// smallest-to-largest relative to the in-range mode; when the range holds
// most of the mass the complement tails are summed instead and the result
// recovered through log1p, which keeps ln B accurate when B is near 1.
// Throws std::invalid_argument if k_o < 0, k_f > n, n < 1 or p outside [0,1].
LogProb binom_range_prob(std::int64_t k_o, std::int64_t k_f, std::int64_t n,
                         double p);

// Exact rational B(k_o, k_f, n, p_num/p_den), the validation oracle for the
// log-space path. Guarded at n <= 1000; larger n throws std::domain_error
// (the oracle exists for tests, not sweeps). Throws std::invalid_argument on
// range violations or p_num/p_den outside [0, 1].
mpq_class binom_range_prob_exact(std::int64_t k_o, std::int64_t k_f,
                                 std::int64_t n, std::int64_t p_num,
                                 std::int64_t p_den);

}  // namespace noisykeys::binomial
