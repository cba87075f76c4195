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

#include "noisykeys/bounds.hpp"

namespace noisykeys::planner {

// Key lengths past this are treated as unreachable rather than searched.
inline constexpr std::int64_t kMaxKeyLength = 1'000'000;

// Smallest p_f whose revelation bound meets the target; infeasible when even
// p_f = 0.5 fails, in which case achieved_bound reports the best attainable.
struct MinFlipResult {
  bool feasible = false;
  double p_f = 0.5;
  double achieved_bound = 1.0;  // revelation bound at the returned p_f
};

// Bisection on [0, 0.5] to absolute tolerance 1e-6, using monotonicity of
// the revelation bound in p_f. Throws std::invalid_argument unless
// 0 < revelation_target < 1.
MinFlipResult min_flip_prob(std::int64_t s, std::int64_t n,
                            double revelation_target);

// The threshold t in {1..n} minimizing max(p_M, p_U), ties toward smaller t.
struct ThresholdChoice {
  std::int64_t t = 1;
  double p_w_bound = 1.0;
  binomial::LogProb log_p_w_bound;
};

// p_M is nondecreasing and p_U nonincreasing in t, so the minimum sits at
// the crossover; found by binary search, not a full scan.
ThresholdChoice best_threshold(std::int64_t n, double p_f);

// One point of the optimized per-pair error curve: minimal p_f for the
// revelation target, then the optimal threshold at that p_f.
struct PairwiseError {
  bool feasible = false;
  double p_f_used = 0.5;
  std::int64_t t_opt = 1;
  double p_w = 1.0;
  binomial::LogProb log_p_w;
  double achieved_revelation_bound = 1.0;  // diagnostic when infeasible
};

// joint_sweep additionally scans p_f values above the minimum (64-point
// grid up to 0.5), re-optimizing t at each. Raising p_f leaves p_M alone and
// strictly raises p_U, so the sweep cannot beat the minimum; the flag exists
// to verify that argument rather than to find better plans.
PairwiseError pairwise_error_at(std::int64_t s, std::int64_t n,
                                double revelation_target,
                                bool joint_sweep = false);

struct PlanTargets {
  double revelation_target = 0.05;
  double matching_confidence = 0.95;
};

// A parameter choice together with the bound values that justify it.
struct Plan {
  std::int64_t n = 0;
  double p_f = 0.0;
  std::int64_t t = 1;
  bounds::BoundSet bound_set;
  PlanTargets targets;
};

struct PlanResult {
  bool feasible = false;
  Plan plan;  // meaningful only when feasible
  // Diagnostics for the infeasible case: the tightest values reached at the
  // largest key length tried.
  std::int64_t n_last = 0;
  double best_revelation_bound = 1.0;
  double best_prob_all_correct = 0.0;
};

// Smallest n on the grid {n_grid, 2*n_grid, ...} such that, with
// p_f = min_flip_prob(s, n, revelation_target) and t = best_threshold(n, p_f),
// prob_all_correct >= matching_confidence. Ascends by exponential galloping,
// then binary refinement on grid multiples. Worst-case value overlap is
// assumed; the error bound depends only on |Q|, so the cohort enters through
// its pair count. Targets unreachable within max_n yield an infeasible
// result. Throws std::invalid_argument on targets outside (0, 1), n_grid < 1
// or max_n < n_grid.
PlanResult min_key_length(const bounds::CohortSpec& cohort,
                          double revelation_target,
                          double matching_confidence, std::int64_t n_grid = 10,
                          std::int64_t max_n = kMaxKeyLength);

// min_key_length plus a freshly evaluated BoundSet; the returned Plan always
// satisfies its own targets when feasible.
PlanResult make_plan(const bounds::CohortSpec& cohort,
                     double revelation_target, double matching_confidence,
                     std::int64_t n_grid = 10,
                     std::int64_t max_n = kMaxKeyLength);

}  // namespace noisykeys::planner
