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

#include "noisykeys/binomial.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace noisykeys::binomial {

namespace {

constexpr long double kNegInf = -std::numeric_limits<long double>::infinity();

void check_params(std::int64_t n, double p) {
  if (n < 1) throw std::invalid_argument("binomial: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("binomial: p must be in [0, 1]");
  }
}

// ln b(k, n, p) in long double, p strictly inside (0, 1).
long double log_pmf_ld(std::int64_t k, std::int64_t n, long double p) {
  const long double lc = std::lgamma(static_cast<long double>(n) + 1) -
                         std::lgamma(static_cast<long double>(k) + 1) -
                         std::lgamma(static_cast<long double>(n - k) + 1);
  const long double lp = k > 0 ? k * std::log(p) : 0.0L;
  const long double lq = n - k > 0 ? (n - k) * std::log1p(-p) : 0.0L;
  return lc + lp + lq;
}

// Index of the largest pmf term inside [lo, hi]: the pmf rises to
// floor((n+1)p) and falls after it, so clamping the mode works.
std::int64_t clamp_mode(std::int64_t lo, std::int64_t hi, std::int64_t n,
                        long double p) {
  const auto mode = static_cast<std::int64_t>(
      std::floor((static_cast<long double>(n) + 1) * p));
  return std::clamp(std::min(mode, n), lo, hi);
}

// ln of the pmf sum over [lo, hi] for p in (0, 1). Terms are accumulated
// smallest-to-largest by walking outward from the in-range mode, scaled by
// the peak term. Far terms decay at least geometrically, so the walk stops
// once the certified remainder cannot move the sum at long double precision.
long double log_range_sum(std::int64_t lo, std::int64_t hi, std::int64_t n,
                          long double p) {
  if (lo > hi) return kNegInf;
  const std::int64_t km = clamp_mode(lo, hi, n, p);
  const long double log_peak = log_pmf_ld(km, n, p);
  const long double q = 1 - p;

  long double sum = 1.0L;  // peak term, scaled to 1
  // Left arm: b(k)/b(k+1) = (k+1) q / ((n-k) p), decreasing as k decreases.
  long double cur = 1.0L;
  for (std::int64_t k = km - 1; k >= lo; --k) {
    const long double ratio = (k + 1) * q / ((n - k) * p);
    cur *= ratio;
    sum += cur;
    if (ratio < 1.0L && cur * ratio / (1 - ratio) < sum * 1e-24L) break;
  }
  // Right arm: b(k+1)/b(k) = (n-k) p / ((k+1) q), decreasing as k increases.
  cur = 1.0L;
  for (std::int64_t k = km; k < hi; ++k) {
    const long double ratio = (n - k) * p / ((k + 1) * q);
    cur *= ratio;
    sum += cur;
    if (ratio < 1.0L && cur * ratio / (1 - ratio) < sum * 1e-24L) break;
  }
  return log_peak + std::log(sum);
}

long double log_add(long double la, long double lb) {
  if (la == kNegInf) return lb;
  if (lb == kNegInf) return la;
  if (la < lb) std::swap(la, lb);
  return la + std::log1p(std::exp(lb - la));
}

}  // namespace

LogProb log_binom_pmf(std::int64_t k, std::int64_t n, double p) {
  check_params(n, p);
  if (k < 0 || k > n) {
    throw std::invalid_argument("log_binom_pmf: k must be in [0, n]");
  }
  if (p == 0.0) return k == 0 ? LogProb::certain() : LogProb::impossible();
  if (p == 1.0) return k == n ? LogProb::certain() : LogProb::impossible();
  const long double v = log_pmf_ld(k, n, static_cast<long double>(p));
  return LogProb{std::min(static_cast<double>(v), 0.0)};
}

LogProb binom_range_prob(std::int64_t k_o, std::int64_t k_f, std::int64_t n,
                         double p) {
  check_params(n, p);
  if (k_o < 0) throw std::invalid_argument("binom_range_prob: k_o < 0");
  if (k_f > n) throw std::invalid_argument("binom_range_prob: k_f > n");
  if (k_o > k_f) return LogProb::impossible();
  if (k_o == 0 && k_f == n) return LogProb::certain();
  if (p == 0.0) return k_o == 0 ? LogProb::certain() : LogProb::impossible();
  if (p == 1.0) return k_f == n ? LogProb::certain() : LogProb::impossible();

  const auto pl = static_cast<long double>(p);
  const std::int64_t mode = clamp_mode(0, n, n, pl);
  long double result;
  if (k_o <= mode && mode <= k_f) {
    // Range holds the peak. Sum the complement tails; if they carry less
    // than half the mass, ln B = log1p(-C) preserves the deficit of a
    // probability near 1 that direct summation would round away.
    const long double log_c = log_add(log_range_sum(0, k_o - 1, n, pl),
                                      log_range_sum(k_f + 1, n, n, pl));
    if (log_c <= -0.6931471805599453L) {
      result = std::log1p(-std::exp(log_c));
    } else {
      result = log_range_sum(k_o, k_f, n, pl);
    }
  } else {
    result = log_range_sum(k_o, k_f, n, pl);
  }
  return LogProb{std::min(static_cast<double>(result), 0.0)};
}

mpq_class binom_range_prob_exact(std::int64_t k_o, std::int64_t k_f,
                                 std::int64_t n, std::int64_t p_num,
                                 std::int64_t p_den) {
  if (n < 1) throw std::invalid_argument("oracle: n must be >= 1");
  if (n > 1000) {
    throw std::domain_error(
        "oracle: refused, n > 1000 (cost guard; the oracle is for "
        "validation at small n, use binom_range_prob for sweeps)");
  }
  if (p_den <= 0 || p_num < 0 || p_num > p_den) {
    throw std::invalid_argument("oracle: need 0 <= p_num <= p_den, p_den > 0");
  }
  if (k_o < 0) throw std::invalid_argument("oracle: k_o < 0");
  if (k_f > n) throw std::invalid_argument("oracle: k_f > n");
  if (k_o > k_f) return mpq_class(0);

  if (p_num == 0) return k_o == 0 ? mpq_class(1) : mpq_class(0);
  if (p_num == p_den) return k_f == n ? mpq_class(1) : mpq_class(0);

  const mpz_class num(static_cast<unsigned long>(p_num));
  const mpz_class cnum(static_cast<unsigned long>(p_den - p_num));
  mpz_class total = 0;
  for (std::int64_t k = k_o; k <= k_f; ++k) {
    mpz_class binom, pk, qk;
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(n),
                 static_cast<unsigned long>(k));
    mpz_pow_ui(pk.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(k));
    mpz_pow_ui(qk.get_mpz_t(), cnum.get_mpz_t(),
               static_cast<unsigned long>(n - k));
    total += binom * pk * qk;
  }
  mpz_class den;
  const mpz_class d(static_cast<unsigned long>(p_den));
  mpz_pow_ui(den.get_mpz_t(), d.get_mpz_t(), static_cast<unsigned long>(n));
  mpq_class result(total, den);
  result.canonicalize();
  return result;
}

}  // namespace noisykeys::binomial
