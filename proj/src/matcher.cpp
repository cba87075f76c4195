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
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace noisykeys::matcher {

namespace {

KeyId id_of(const NoisyKey& k) { return KeyId{k.source_id, k.key_id}; }

std::vector<std::size_t> order_by_id(std::span<const NoisyKey> keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return id_of(keys[a]) < id_of(keys[b]);
  });
  return order;
}

void check_lengths(std::span<const NoisyKey> keys) {
  if (keys.empty()) return;
  const std::size_t n = keys.front().bits.size();
  for (const NoisyKey& k : keys) {
    if (k.bits.size() != n) {
      throw std::invalid_argument("keys must all share one length n");
    }
  }
}

// Index lookup keyed by (source, key).
std::map<KeyId, std::size_t> index_by_id(std::span<const NoisyKey> keys) {
  std::map<KeyId, std::size_t> idx;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!idx.emplace(id_of(keys[i]), i).second) {
      throw std::invalid_argument("duplicate (source_id, key_id) in key set");
    }
  }
  return idx;
}

const std::string& label_of(const TruthMap& truth, KeyId id) {
  const auto it = truth.find(id);
  if (it == truth.end()) {
    throw std::invalid_argument(
        "truth is missing key " + std::to_string(id.source) + "," +
        std::to_string(id.key));
  }
  return it->second;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

}  // namespace

std::vector<MatchEdge> match_pairs(std::span<const NoisyKey> keys,
                                   std::int64_t t) {
  check_lengths(keys);
  if (!keys.empty()) {
    const auto n = static_cast<std::int64_t>(keys.front().bits.size());
    if (t < 1 || t > n) {
      throw std::invalid_argument("match_pairs: t must be in [1, n]");
    }
  }
  const std::vector<std::size_t> order = order_by_id(keys);
  std::vector<MatchEdge> edges;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const NoisyKey& ka = keys[order[a]];
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const NoisyKey& kb = keys[order[b]];
      if (ka.source_id == kb.source_id) continue;
      const std::size_t d = hamming(ka.bits, kb.bits);
      if (static_cast<std::int64_t>(d) < t) {
        edges.push_back(MatchEdge{id_of(ka), id_of(kb), d});
      }
    }
  }
  // The outer loop emits edges grouped by left id; inner ids ascend, so the
  // result is already sorted. Keep the sort explicit for permuted input.
  std::sort(edges.begin(), edges.end(),
            [](const MatchEdge& x, const MatchEdge& y) {
              return std::tie(x.left, x.right) < std::tie(y.left, y.right);
            });
  return edges;
}

std::vector<Cluster> cluster_components(std::span<const MatchEdge> edges,
                                        std::span<const NoisyKey> keys) {
  const std::map<KeyId, std::size_t> idx = index_by_id(keys);
  UnionFind uf(keys.size());
  for (const MatchEdge& e : edges) {
    const auto li = idx.find(e.left);
    const auto ri = idx.find(e.right);
    if (li == idx.end() || ri == idx.end()) {
      throw std::invalid_argument("edge references a key not in the key set");
    }
    uf.unite(li->second, ri->second);
  }
  std::unordered_map<std::size_t, std::vector<KeyId>> components;
  for (const auto& [id, i] : idx) {  // id-sorted, so members come out sorted
    components[uf.find(i)].push_back(id);
  }
  std::vector<Cluster> clusters;
  clusters.reserve(components.size());
  for (auto& [root, members] : components) {
    Cluster c;
    c.members = std::move(members);
    for (std::size_t i = 1; i < c.members.size(); ++i) {
      if (c.members[i].source == c.members[i - 1].source) {
        c.conflicted = true;
      }
    }
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) {
              return a.members.front() < b.members.front();
            });
  return clusters;
}

PairScore score_matching(std::span<const NoisyKey> keys,
                         std::span<const MatchEdge> edges,
                         const TruthMap& truth) {
  PairScore score;
  for (const NoisyKey& k : keys) label_of(truth, id_of(k));  // coverage check

  std::uint64_t matched_same = 0;
  for (const MatchEdge& e : edges) {
    if (label_of(truth, e.left) != label_of(truth, e.right)) {
      ++score.false_matches;
    } else {
      ++matched_same;
    }
  }

  // Cross-source same-label pairs: per label, C(k,2) minus the same-source
  // pairs (which are outside Q by definition).
  std::map<std::string, std::map<std::uint64_t, std::uint64_t>> by_label;
  for (const NoisyKey& k : keys) {
    ++by_label[label_of(truth, id_of(k))][k.source_id];
  }
  std::uint64_t same_pairs = 0;
  for (const auto& [label, per_source] : by_label) {
    std::uint64_t total = 0;
    std::uint64_t within = 0;
    for (const auto& [src, cnt] : per_source) {
      total += cnt;
      within += cnt * (cnt - 1) / 2;
    }
    same_pairs += total * (total - 1) / 2 - within;
  }
  score.missed_matches = same_pairs - matched_same;
  return score;
}

std::uint64_t score_revelation(
    std::span<const NoisyKey> keys, const TruthMap& truth,
    const std::map<std::string, BitVec>& hash_codes) {
  std::map<std::string, std::vector<const NoisyKey*>> groups;
  for (const NoisyKey& k : keys) {
    groups[label_of(truth, id_of(k))].push_back(&k);
  }
  std::uint64_t revealed = 0;
  std::vector<BitVec> bits;
  for (const auto& [label, members] : groups) {
    const auto code = hash_codes.find(label);
    if (code == hash_codes.end()) {
      throw std::invalid_argument("no hash code for label '" + label + "'");
    }
    bits.clear();
    for (const NoisyKey* k : members) bits.push_back(k->bits);
    if (median_key(bits, code->second) == code->second) {
      revealed += members.size();
    }
  }
  return revealed;
}

MatchReport analyze(std::span<const NoisyKey> keys, std::int64_t t,
                    const TruthMap* truth,
                    const std::map<std::string, BitVec>* hash_codes) {
  MatchReport report;
  const std::vector<MatchEdge> edges = match_pairs(keys, t);
  report.clusters = cluster_components(edges, keys);
  for (const Cluster& c : report.clusters) {
    if (c.conflicted) ++report.conflicted_clusters;
  }
  if (truth != nullptr) {
    const PairScore score = score_matching(keys, edges, *truth);
    report.false_matches = score.false_matches;
    report.missed_matches = score.missed_matches;
    report.total_errors = score.false_matches + score.missed_matches;
    if (hash_codes != nullptr) {
      report.revelations = score_revelation(keys, *truth, *hash_codes);
    }
  }
  return report;
}

}  // namespace noisykeys::matcher
