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

#include "noisykeys/matcher.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

using namespace noisykeys;
namespace nm = noisykeys::matcher;

namespace {

NoisyKey make_key(const char* bits, std::uint64_t source, std::uint64_t id) {
  NoisyKey k;
  k.bits = BitVec::from_bit_string(bits);
  k.source_id = source;
  k.key_id = id;
  return k;
}

NoisyKey pattern_key(std::uint32_t n, std::uint64_t pattern,
                     std::uint64_t source, std::uint64_t id) {
  NoisyKey k;
  k.bits = BitVec(n);
  k.bits.set_word(0, pattern);
  k.source_id = source;
  k.key_id = id;
  return k;
}

// Independent reference: per-bit comparison, no popcount words.
std::vector<nm::MatchEdge> naive_match(const std::vector<NoisyKey>& keys,
                                       std::int64_t t) {
  std::vector<nm::MatchEdge> edges;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    for (std::size_t j = 0; j < keys.size(); ++j) {
      const auto li = nm::KeyId{keys[i].source_id, keys[i].key_id};
      const auto rj = nm::KeyId{keys[j].source_id, keys[j].key_id};
      if (!(li < rj) || keys[i].source_id == keys[j].source_id) continue;
      std::uint64_t d = 0;
      for (std::size_t b = 0; b < keys[i].bits.size(); ++b) {
        d += keys[i].bits.get(b) != keys[j].bits.get(b);
      }
      if (static_cast<std::int64_t>(d) < t) {
        edges.push_back(nm::MatchEdge{li, rj, d});
      }
    }
  }
  std::sort(edges.begin(), edges.end(),
            [](const nm::MatchEdge& a, const nm::MatchEdge& b) {
              return std::tie(a.left, a.right) < std::tie(b.left, b.right);
            });
  return edges;
}

}  // namespace

TEST_CASE("match_pairs basics") {
  // Identical keys from different sources match at any t >= 1.
  std::vector<NoisyKey> keys{make_key("0101", 1, 0), make_key("0101", 2, 0)};
  auto edges = nm::match_pairs(keys, 1);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].distance == 0);

  // Distance-2 pair: matched at t=3, unmatched at t=2.
  keys = {make_key("00011", 1, 0), make_key("00110", 2, 0)};
  CHECK(nm::match_pairs(keys, 3).size() == 1);
  CHECK(nm::match_pairs(keys, 2).empty());

  // Same-source pairs are never considered.
  keys = {make_key("0101", 1, 0), make_key("0101", 1, 1)};
  CHECK(nm::match_pairs(keys, 4).empty());

  keys = {make_key("0101", 1, 0), make_key("011", 2, 0)};
  CHECK_THROWS_AS(nm::match_pairs(keys, 1), std::invalid_argument);
  keys = {make_key("0101", 1, 0), make_key("0110", 2, 0)};
  CHECK_THROWS_AS(nm::match_pairs(keys, 0), std::invalid_argument);
  CHECK_THROWS_AS(nm::match_pairs(keys, 5), std::invalid_argument);
}

TEST_CASE("exact-equality matching on random 64-bit keys returns nothing") {
  std::mt19937_64 rng(42);
  std::vector<NoisyKey> keys;
  for (int i = 0; i < 200; ++i) {
    keys.push_back(pattern_key(64, rng(), 1 + i % 4, i));
  }
  CHECK(nm::match_pairs(keys, 1).empty());
}

TEST_CASE("match_pairs equals the naive oracle on exhaustive small key sets") {
  for (const std::uint32_t n : {2u, 5u, 8u}) {
    std::vector<NoisyKey> keys;
    for (std::uint64_t pattern = 0; pattern < (1ull << n); ++pattern) {
      keys.push_back(pattern_key(n, pattern, 1 + pattern % 3, pattern));
    }
    for (const std::int64_t t :
         {std::int64_t{1}, static_cast<std::int64_t>(n) / 2,
          static_cast<std::int64_t>(n)}) {
      if (t < 1) continue;
      const auto fast = nm::match_pairs(keys, t);
      const auto slow = naive_match(keys, t);
      CHECK(fast == slow);
    }
  }
}

TEST_CASE("match_pairs is stable under input permutation") {
  std::mt19937_64 rng(17);
  std::vector<NoisyKey> keys;
  for (int i = 0; i < 60; ++i) {
    keys.push_back(pattern_key(16, rng() & 0xffff, 1 + i % 3, i));
  }
  const auto before = nm::match_pairs(keys, 7);
  std::shuffle(keys.begin(), keys.end(), rng);
  CHECK(nm::match_pairs(keys, 7) == before);
}

TEST_CASE("cluster_components") {
  const auto id = [](std::uint64_t s, std::uint64_t k) {
    return nm::KeyId{s, k};
  };
  std::vector<NoisyKey> keys{
      make_key("0000", 1, 0), make_key("0000", 2, 0), make_key("0000", 3, 0),
      make_key("1111", 1, 1)};

  // No edges: everyone is a singleton.
  auto clusters = nm::cluster_components({}, keys);
  CHECK(clusters.size() == 4);
  for (const auto& c : clusters) {
    CHECK(c.members.size() == 1);
    CHECK_FALSE(c.conflicted);
  }

  // Transitive closure pulls A1-B1, B1-C1 into one cluster.
  std::vector<nm::MatchEdge> edges{{id(1, 0), id(2, 0), 0},
                                   {id(2, 0), id(3, 0), 0}};
  clusters = nm::cluster_components(edges, keys);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].members ==
        std::vector<nm::KeyId>{id(1, 0), id(2, 0), id(3, 0)});
  CHECK_FALSE(clusters[0].conflicted);

  // Two keys of one source joined through a third: conflicted, not split.
  edges = {{id(1, 0), id(2, 0), 0}, {id(1, 1), id(2, 0), 1}};
  clusters = nm::cluster_components(edges, keys);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].members.size() == 3);
  CHECK(clusters[0].conflicted);

  // Partition: each key appears exactly once across clusters.
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  std::size_t total = 0;
  for (const auto& c : clusters) {
    for (const auto& m : c.members) {
      seen.emplace(m.source, m.key);
      ++total;
    }
  }
  CHECK(total == keys.size());
  CHECK(seen.size() == keys.size());
}

TEST_CASE("score_matching counts planted errors exactly") {
  // Three sources, two shared values; a perfect edge set scores (0,0).
  std::vector<NoisyKey> keys{
      make_key("0000", 1, 0), make_key("0001", 2, 0), make_key("0011", 3, 0),
      make_key("1100", 1, 1), make_key("1110", 2, 1)};
  nm::TruthMap truth{{{1, 0}, "a"}, {{2, 0}, "a"}, {{3, 0}, "a"},
                     {{1, 1}, "b"}, {{2, 1}, "b"}};
  const auto id = [](std::uint64_t s, std::uint64_t k) {
    return nm::KeyId{s, k};
  };
  std::vector<nm::MatchEdge> perfect{{id(1, 0), id(2, 0), 1},
                                     {id(1, 0), id(3, 0), 2},
                                     {id(2, 0), id(3, 0), 1},
                                     {id(1, 1), id(2, 1), 1}};
  auto score = nm::score_matching(keys, perfect, truth);
  CHECK(score.false_matches == 0);
  CHECK(score.missed_matches == 0);

  // No edges: every same-label cross-source pair is missed.
  score = nm::score_matching(keys, {}, truth);
  CHECK(score.false_matches == 0);
  CHECK(score.missed_matches == 4);

  // Plant one false match and one miss.
  std::vector<nm::MatchEdge> planted{{id(1, 0), id(2, 0), 1},
                                     {id(1, 0), id(3, 0), 2},
                                     {id(2, 0), id(3, 0), 1},
                                     {id(1, 1), id(2, 0), 3}};
  score = nm::score_matching(keys, planted, truth);
  CHECK(score.false_matches == 1);
  CHECK(score.missed_matches == 1);

  truth.erase(nm::KeyId{3, 0});
  CHECK_THROWS_AS(nm::score_matching(keys, planted, truth),
                  std::invalid_argument);
}

TEST_CASE("score_revelation fixtures") {
  std::map<std::string, BitVec> codes{{"a", BitVec::from_bit_string("0000")}};

  // Single key with no flips: revealed.
  std::vector<NoisyKey> keys{make_key("0000", 1, 0)};
  nm::TruthMap truth{{{1, 0}, "a"}};
  CHECK(nm::score_revelation(keys, truth, codes) == 1);

  // Two keys flipped in disjoint single positions: every position ties or
  // agrees, the tie-break restores the code, both keys revealed.
  keys = {make_key("0001", 1, 0), make_key("0010", 2, 0)};
  truth = {{{1, 0}, "a"}, {{2, 0}, "a"}};
  CHECK(nm::score_revelation(keys, truth, codes) == 2);

  // Three keys all flipped in position 0: the majority overrides the code.
  keys = {make_key("0001", 1, 0), make_key("0001", 2, 0),
          make_key("0001", 3, 0)};
  truth = {{{1, 0}, "a"}, {{2, 0}, "a"}, {{3, 0}, "a"}};
  CHECK(nm::score_revelation(keys, truth, codes) == 0);

  CHECK_THROWS_AS(
      nm::score_revelation(keys, truth, std::map<std::string, BitVec>{}),
      std::invalid_argument);
}

TEST_CASE("analyze assembles a full report") {
  std::vector<NoisyKey> keys{
      make_key("0000", 1, 0), make_key("0000", 2, 0),
      make_key("1111", 1, 1), make_key("1011", 2, 1)};
  nm::TruthMap truth{{{1, 0}, "a"}, {{2, 0}, "a"},
                     {{1, 1}, "b"}, {{2, 1}, "b"}};
  std::map<std::string, BitVec> codes{{"a", BitVec::from_bit_string("0000")},
                                      {"b", BitVec::from_bit_string("1111")}};
  const auto report = nm::analyze(keys, 2, &truth, &codes);
  CHECK(report.clusters.size() == 2);
  CHECK(report.conflicted_clusters == 0);
  CHECK(report.false_matches == 0);
  CHECK(report.missed_matches == 0);
  CHECK(report.total_errors == 0);
  // Group a: zero flips, revealed. Group b: one single-position flip; the
  // flipped position ties 1-1 and the tie-break restores it, so b reveals.
  CHECK(report.revelations == 4);
}
