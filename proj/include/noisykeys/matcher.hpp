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

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "noisykeys/bitkeys.hpp"

namespace noisykeys::matcher {

struct KeyId {
  std::uint64_t source = 0;
  std::uint64_t key = 0;

  friend auto operator<=>(const KeyId&, const KeyId&) = default;
};

// A retained cross-source pair: left < right by identifier, distance < t.
struct MatchEdge {
  KeyId left;
  KeyId right;
  std::uint64_t distance = 0;

  friend bool operator==(const MatchEdge&, const MatchEdge&) = default;
};

// A connected component of the match graph. conflicted is set exactly when
// two members share a source; such components are surfaced, never split.
struct Cluster {
  std::vector<KeyId> members;
  bool conflicted = false;
};

struct PairScore {
  std::uint64_t false_matches = 0;   // event M: matched, different values
  std::uint64_t missed_matches = 0;  // event U: unmatched, same value
};

struct MatchReport {
  std::uint64_t false_matches = 0;
  std::uint64_t missed_matches = 0;
  std::uint64_t total_errors = 0;
  std::uint64_t revelations = 0;
  std::vector<Cluster> clusters;
  std::uint64_t conflicted_clusters = 0;
};

// Ground-truth value label per key.
using TruthMap = std::map<KeyId, std::string>;

// All cross-source pairs at Hamming distance < t, brute force over |Q| with
// word popcounts. Output sorted by (left, right). Throws
// std::invalid_argument on mixed key lengths or t outside [1, n].
std::vector<MatchEdge> match_pairs(std::span<const NoisyKey> keys,
                                   std::int64_t t);

// Connected components of the match graph; unmatched keys become singleton
// clusters. Members sorted by id, clusters ordered by first member.
std::vector<Cluster> cluster_components(std::span<const MatchEdge> edges,
                                        std::span<const NoisyKey> keys);

// Exact pairwise accounting over the cross-source pairs: M = edges joining
// different labels, U = same-label cross-source pairs missing from edges.
// Throws std::invalid_argument when truth lacks an entry for some key.
PairScore score_matching(std::span<const NoisyKey> keys,
                         std::span<const MatchEdge> edges,
                         const TruthMap& truth);

// Groups keys by true label and counts keys whose group median (conservative
// tie-break toward the true hash code) equals that hash code; a revealed
// group of size z contributes z. Throws std::invalid_argument when a label
// has no hash code.
std::uint64_t score_revelation(std::span<const NoisyKey> keys,
                               const TruthMap& truth,
                               const std::map<std::string, BitVec>& hash_codes);

// Full pipeline: match, cluster, and (given truth) score. hash_codes may be
// null when truth is null or revelation scoring is not wanted.
MatchReport analyze(std::span<const NoisyKey> keys, std::int64_t t,
                    const TruthMap* truth,
                    const std::map<std::string, BitVec>* hash_codes);

}  // namespace noisykeys::matcher
