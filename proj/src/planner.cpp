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

#include "noisykeys/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace noisykeys::planner {

namespace {

void check_target(double target, const char* what) {
  if (!(target > 0.0 && target < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in (0, 1)");
  }
}

}  // namespace

MinFlipResult min_flip_prob(std::int64_t s, std::int64_t n,
                            double revelation_target) {
  check_target(revelation_target, "revelation_target");
  if (s < 1) throw std::invalid_argument("min_flip_prob: s must be >= 1");
  if (n < 1) throw std::invalid_argument("min_flip_prob: n must be >= 1");

  const double log_target = std::log(revelation_target);
  const auto bound_at = [&](double p_f) {
    return bounds::log_revelation_bound(s, n, p_f);
  };

  const auto at_half = bound_at(0.5);
  MinFlipResult out;
  if (at_half.value > log_target) {
    out.feasible = false;
    out.p_f = 0.5;
    out.achieved_bound = at_half.prob();
    return out;
  }
  double lo = 0.0;  // always above target: the bound is 1 at p_f = 0
  double hi = 0.5;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (bound_at(mid).value <= log_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.feasible = true;
  out.p_f = hi;
  out.achieved_bound = bound_at(hi).prob();
  return out;
}

ThresholdChoice best_threshold(std::int64_t n, double p_f) {
  if (n < 1) throw std::invalid_argument("best_threshold: n must be >= 1");
  bounds::delta_prob(p_f);  // validates p_f

  // g(t) = ln p_M(t) - ln p_U(t) is nondecreasing in t; find the first t
  // where p_M >= p_U. Below it the max is the (nonincreasing) p_U, above it
  // the (nondecreasing) p_M, so the minimum is at the crossover or one left.
  const auto log_pm = [&](std::int64_t t) {
    return bounds::log_mismatch_prob(n, t);
  };
  const auto log_pu = [&](std::int64_t t) {
    return bounds::log_missed_match_prob(n, t, p_f);
  };
  const auto crossed = [&](std::int64_t t) {
    return log_pm(t).value >= log_pu(t).value;
  };

  std::int64_t first = n;  // p_M(n) = 1 - 2^-n always dominates p_U(n)
  std::int64_t lo = 1, hi = n;
  while (lo <= hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (crossed(mid)) {
      first = mid;
      hi = mid - 1;
    } else {
      lo = mid + 1;
    }
  }

  ThresholdChoice best;
  bool have = false;
  for (std::int64_t t = std::max<std::int64_t>(1, first - 1); t <= first;
       ++t) {
    const auto m = log_pm(t);
    const auto u = log_pu(t);
    const auto v = m.value >= u.value ? m : u;
    if (!have || v.value < best.log_p_w_bound.value) {
      best.t = t;
      best.log_p_w_bound = v;
      have = true;
    }
  }
  best.p_w_bound = best.log_p_w_bound.prob();
  return best;
}

PairwiseError pairwise_error_at(std::int64_t s, std::int64_t n,
                                double revelation_target, bool joint_sweep) {
  PairwiseError out;
  const MinFlipResult flip = min_flip_prob(s, n, revelation_target);
  out.achieved_revelation_bound = flip.achieved_bound;
  if (!flip.feasible) {
    out.feasible = false;
    return out;
  }
  ThresholdChoice choice = best_threshold(n, flip.p_f);
  out.feasible = true;
  out.p_f_used = flip.p_f;
  if (joint_sweep) {
    const int steps = 64;
    for (int i = 1; i <= steps; ++i) {
      const double p_f =
          flip.p_f + (0.5 - flip.p_f) * static_cast<double>(i) / steps;
      const ThresholdChoice c = best_threshold(n, p_f);
      if (c.log_p_w_bound.value < choice.log_p_w_bound.value) {
        choice = c;
        out.p_f_used = p_f;
      }
    }
  }
  out.t_opt = choice.t;
  out.p_w = choice.p_w_bound;
  out.log_p_w = choice.log_p_w_bound;
  return out;
}

namespace {

struct Candidate {
  bool ok = false;
  double p_f = 0.0;
  std::int64_t t = 1;
  double revelation = 1.0;
  double prob_all_correct = 0.0;
};

Candidate try_length(const bounds::CohortSpec& cohort, std::int64_t n,
                     double revelation_target, double matching_confidence,
                     bounds::uint128 pairs) {
  Candidate c;
  const MinFlipResult flip = min_flip_prob(cohort.sources(), n,
                                           revelation_target);
  c.revelation = flip.achieved_bound;
  if (!flip.feasible) return c;
  c.p_f = flip.p_f;
  const ThresholdChoice choice = best_threshold(n, flip.p_f);
  c.t = choice.t;
  const long double expected =
      std::exp(static_cast<long double>(choice.log_p_w_bound.value)) *
      static_cast<long double>(pairs);
  c.prob_all_correct =
      std::max(0.0, 1.0 - static_cast<double>(expected));
  c.ok = c.prob_all_correct >= matching_confidence;
  return c;
}

}  // namespace

PlanResult min_key_length(const bounds::CohortSpec& cohort,
                          double revelation_target,
                          double matching_confidence, std::int64_t n_grid,
                          std::int64_t max_n) {
  check_target(revelation_target, "revelation_target");
  check_target(matching_confidence, "matching_confidence");
  if (n_grid < 1) throw std::invalid_argument("n_grid must be >= 1");
  if (max_n < n_grid) throw std::invalid_argument("max_n must be >= n_grid");
  max_n = std::min(max_n, kMaxKeyLength);
  cohort.validate();
  const bounds::uint128 pairs = pair_count(cohort);

  const auto probe = [&](std::int64_t n) {
    return try_length(cohort, n, revelation_target, matching_confidence,
                      pairs);
  };

  // Gallop up by doubling (stays on grid multiples, capped at the largest
  // grid multiple within max_n), then binary-refine the bracket down to one
  // grid step.
  const std::int64_t n_cap = max_n / n_grid * n_grid;
  PlanResult result;
  std::int64_t lo = 0;  // largest grid multiple known unsatisfied
  std::int64_t hi = n_grid;
  Candidate hi_cand = probe(hi);
  while (!hi_cand.ok) {
    if (hi >= n_cap) {
      result.feasible = false;
      result.n_last = hi;
      result.best_revelation_bound = hi_cand.revelation;
      result.best_prob_all_correct = hi_cand.prob_all_correct;
      return result;
    }
    lo = hi;
    hi = std::min(hi * 2, n_cap);
    hi_cand = probe(hi);
  }

  while (hi - lo > n_grid) {
    std::int64_t mid = (lo + hi) / 2 / n_grid * n_grid;
    if (mid <= lo) mid = lo + n_grid;
    if (mid >= hi) mid = hi - n_grid;
    const Candidate c = probe(mid);
    if (c.ok) {
      hi = mid;
      hi_cand = c;
    } else {
      lo = mid;
    }
  }

  result.feasible = true;
  result.plan.n = hi;
  result.plan.p_f = hi_cand.p_f;
  result.plan.t = hi_cand.t;
  result.plan.targets = {revelation_target, matching_confidence};
  result.plan.bound_set = bounds::evaluate(cohort, hi, hi_cand.t, hi_cand.p_f);
  return result;
}

PlanResult make_plan(const bounds::CohortSpec& cohort, double revelation_target,
                     double matching_confidence, std::int64_t n_grid,
                     std::int64_t max_n) {
  return min_key_length(cohort, revelation_target, matching_confidence, n_grid,
                        max_n);
}

}  // namespace noisykeys::planner
