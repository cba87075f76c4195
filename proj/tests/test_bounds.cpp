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

#include <cmath>

#include <doctest.h>

namespace nb = noisykeys::bounds;
using noisykeys::binomial::binom_range_prob_exact;

TEST_CASE("delta_prob") {
  CHECK(nb::delta_prob(0.0) == 0.0);
  CHECK(nb::delta_prob(0.5) == 0.5);
  CHECK(nb::delta_prob(0.25) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK_THROWS_AS(nb::delta_prob(0.6), std::invalid_argument);
  CHECK_THROWS_AS(nb::delta_prob(-0.01), std::invalid_argument);
}

TEST_CASE("mismatch_prob") {
  CHECK(nb::mismatch_prob(8, 1) == doctest::Approx(1.0 / 256).epsilon(1e-12));
  CHECK(nb::mismatch_prob(8, 8) ==
        doctest::Approx(1.0 - 1.0 / 256).epsilon(1e-12));
  CHECK_THROWS_AS(nb::mismatch_prob(8, 9), std::invalid_argument);
  CHECK_THROWS_AS(nb::mismatch_prob(8, 0), std::invalid_argument);
  // Exponential decay in n at fixed threshold fraction.
  CHECK(nb::mismatch_prob(400, 100) < 1e-23);
  CHECK(nb::log_mismatch_prob(400, 100).value <
        nb::log_mismatch_prob(200, 50).value);
}

TEST_CASE("missed_match_prob") {
  CHECK(nb::missed_match_prob(64, 5, 0.0) == 0.0);
  CHECK(nb::missed_match_prob(2, 1, 0.5) ==
        doctest::Approx(0.75).epsilon(1e-12));
  // Over 300 bits are needed for one-in-a-billion at the quarter threshold;
  // at n=300 the probability is still far above 1e-9.
  CHECK(nb::missed_match_prob(300, 75, 0.0997) > 1e-9);
  CHECK_THROWS_AS(nb::missed_match_prob(8, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(nb::missed_match_prob(8, 1, 0.7), std::invalid_argument);
}

TEST_CASE("missed_match_prob is monotone in p_f") {
  double prev = -1.0;
  for (double pf = 0.0; pf <= 0.5 + 1e-12; pf += 0.05) {
    const double cur = nb::missed_match_prob(64, 16, std::min(pf, 0.5));
    CHECK(cur >= prev - 1e-15);
    prev = cur;
  }
}

TEST_CASE("pair_count") {
  CHECK(nb::pair_count({{5}}) == 0);
  CHECK(nb::pair_count({{2, 2}}) == 4);
  CHECK(nb::pair_count({{64000, 64000}}) == nb::uint128{4096000000ull});
  CHECK(nb::to_string(nb::pair_count({{64000, 64000}})) == "4096000000");
  CHECK(nb::pair_count({{1, 1, 1}}) == 3);
  CHECK_THROWS_AS(nb::pair_count({{}}), std::invalid_argument);
  CHECK_THROWS_AS(nb::pair_count({{0, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(nb::pair_count({{UINT64_MAX, UINT64_MAX}}),
                  std::overflow_error);
}

TEST_CASE("pair_error_bound picks the larger constituent") {
  CHECK(nb::pair_error_bound(8, 1, 0.0) ==
        doctest::Approx(1.0 / 256).epsilon(1e-12));
  // p_M = B(0,0,2,1/2) = 1/4, p_U = 3/4 at p_f = 1/2.
  CHECK(nb::pair_error_bound(2, 1, 0.5) ==
        doctest::Approx(0.75).epsilon(1e-12));
  for (std::int64_t t = 1; t <= 32; t += 7) {
    const double bound = nb::pair_error_bound(32, t, 0.12);
    const double pm = nb::mismatch_prob(32, t);
    const double pu = nb::missed_match_prob(32, t, 0.12);
    CHECK(bound == std::max(pm, pu));
  }
}

TEST_CASE("expected errors, tail and all-correct bounds") {
  CHECK(nb::expected_match_errors({{5}}, 8, 1, 0.1) == 0.0);
  CHECK(nb::expected_match_errors({{2, 2}}, 2, 1, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Markov specializations.
  const nb::CohortSpec cohort{{30, 30}};
  const double expected = nb::expected_match_errors(cohort, 64, 16, 0.05);
  CHECK(nb::match_error_tail(cohort, 64, 16, 0.05, 1.0) ==
        doctest::Approx(std::min(1.0, expected)).epsilon(1e-12));
  CHECK(nb::match_error_tail(cohort, 64, 16, 0.05, expected / 10) == 1.0);
  CHECK_THROWS_AS(nb::match_error_tail(cohort, 64, 16, 0.05, 0.0),
                  std::invalid_argument);

  CHECK(nb::prob_all_correct({{5}}, 8, 1, 0.1) == 1.0);
  CHECK(nb::prob_all_correct({{2, 2}}, 2, 1, 0.5) == 0.0);  // expected >= 1
  // Complement of the h=1 tail whenever neither side clamps.
  const double tail = nb::match_error_tail(cohort, 400, 120, 0.08, 1.0);
  const double correct = nb::prob_all_correct(cohort, 400, 120, 0.08);
  CHECK(tail + correct == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("revelation_prob closed forms and oracle value") {
  CHECK(nb::revelation_prob(1, 1, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  for (const double pf : {0.1, 0.3}) {
    CHECK(nb::revelation_prob(1, 50, pf) ==
          doctest::Approx(std::pow(1 - pf, 50)).epsilon(1e-11));
    CHECK(nb::revelation_prob(2, 50, pf) ==
          doctest::Approx(std::pow(1 - pf * pf, 50)).epsilon(1e-11));
  }

  // z=3, p_f=1/5, n=4: exact value (B(0,1,3,1/5))^4 = (112/125)^4.
  mpq_class base = binom_range_prob_exact(0, 1, 3, 1, 5);
  CHECK(base == mpq_class(112, 125));
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), 4);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), 4);
  const double exact = mpq_class(num, den).get_d();
  CHECK(nb::revelation_prob(3, 4, 0.2) ==
        doctest::Approx(exact).epsilon(1e-12));

  CHECK_THROWS_AS(nb::revelation_prob(0, 4, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(nb::revelation_prob(3, 0, 0.2), std::invalid_argument);
}

TEST_CASE("revelation_prob is monotone in n and p_f") {
  for (const std::int64_t z : {1, 2, 3, 5}) {
    double prev = 1.0;
    for (std::int64_t n = 10; n <= 200; n += 10) {
      const double cur = nb::revelation_prob(z, n, 0.2);
      CHECK(cur < prev);
      prev = cur;
    }
    prev = 1.0;
    for (double pf = 0.05; pf <= 0.5 + 1e-12; pf += 0.05) {
      const double cur = nb::revelation_prob(z, 64, std::min(pf, 0.5));
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("revelation_bound maximizes over group sizes") {
  for (const double pf : {0.1, 0.25, 0.4}) {
    CHECK(nb::revelation_bound(1, 50, pf) ==
          doctest::Approx(nb::revelation_prob(1, 50, pf)).epsilon(1e-14));
    // s=2: the even term dominates.
    CHECK(nb::revelation_bound(2, 50, pf) ==
          doctest::Approx(nb::revelation_prob(2, 50, pf)).epsilon(1e-14));
    // The odd z=3 term is dominated by z=2, so s=3 equals s=2.
    CHECK(nb::revelation_bound(3, 50, pf) == nb::revelation_bound(2, 50, pf));
    // And the bound never decreases with s.
    double prev = 0.0;
    for (std::int64_t s = 1; s <= 8; ++s) {
      const double cur = nb::revelation_bound(s, 50, pf);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("expected_revealed") {
  CHECK(nb::expected_revealed({{10}}, 1, 0.5) ==
        doctest::Approx(5.0).epsilon(1e-12));
  // m=[2,2], n=2, p_f=1/4: bound = (1 - 1/16)^2, times 4 keys.
  CHECK(nb::expected_revealed({{2, 2}}, 2, 0.25) ==
        doctest::Approx(4.0 * 0.87890625).epsilon(1e-12));
  const double bound = nb::revelation_bound(2, 64, 0.1);
  CHECK(nb::expected_revealed({{100, 100}}, 64, 0.1) ==
        doctest::Approx(200.0 * bound).epsilon(1e-12));
}

TEST_CASE("evaluate bundles a consistent BoundSet") {
  const nb::CohortSpec cohort{{100, 50, 25}};
  const auto b = nb::evaluate(cohort, 128, 40, 0.08);
  CHECK(b.p_w_bound == std::max(b.p_m, b.p_u));
  CHECK(b.pairs == nb::pair_count(cohort));
  CHECK(b.expected_errors ==
        doctest::Approx(nb::expected_match_errors(cohort, 128, 40, 0.08))
            .epsilon(1e-14));
  CHECK(b.prob_all_correct_lb == std::max(0.0, 1.0 - b.expected_errors));
  CHECK(b.p_r_max == nb::revelation_bound(3, 128, 0.08));
  CHECK(b.expected_revealed_ub ==
        doctest::Approx(175.0 * b.p_r_max).epsilon(1e-14));
}
