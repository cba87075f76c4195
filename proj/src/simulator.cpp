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

#include "noisykeys/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace noisykeys::simulator {

namespace {

std::string le64(std::uint64_t v) {
  std::string out(8, '\0');
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return out;
}

// Per-trial seed string: master seed, a separator byte that cannot be
// confused with seed content length-wise, and the trial index.
std::string trial_seed(const Scenario& sc, std::uint64_t trial_index) {
  return sc.master_seed + '\x1e' + le64(trial_index);
}

}  // namespace

Scenario build_scenario(std::uint32_t s, std::vector<GroupSpec> groups,
                        std::int64_t n, double p_f, std::int64_t t,
                        HashMode hash_mode, std::string master_seed) {
  if (s < 1) throw std::invalid_argument("scenario: sources must be >= 1");
  if (groups.empty()) throw std::invalid_argument("scenario: empty groups");
  if (n < 1) throw std::invalid_argument("scenario: n must be >= 1");
  if (!(p_f >= 0.0 && p_f <= 0.5)) {
    throw std::invalid_argument("scenario: p_f must be in [0, 0.5]");
  }
  if (t < 1 || t > n) throw std::invalid_argument("scenario: t not in [1, n]");

  Scenario sc;
  sc.s = s;
  sc.n = n;
  sc.p_f = p_f;
  sc.t = t;
  sc.hash_mode = hash_mode;
  sc.master_seed = std::move(master_seed);
  sc.m.assign(s, 0);
  for (GroupSpec& g : groups) {
    if (g.sources.empty()) {
      throw std::invalid_argument("scenario: group with empty source subset");
    }
    if (g.count == 0) {
      throw std::invalid_argument("scenario: group with zero count");
    }
    std::sort(g.sources.begin(), g.sources.end());
    for (std::size_t i = 0; i < g.sources.size(); ++i) {
      const std::uint32_t src = g.sources[i];
      if (src < 1 || src > s) {
        throw std::invalid_argument("scenario: source id out of 1..s");
      }
      if (i > 0 && g.sources[i - 1] == src) {
        throw std::invalid_argument("scenario: repeated source in subset");
      }
      sc.m[src - 1] += g.count;
    }
    const auto z = static_cast<std::uint64_t>(g.sources.size());
    sc.same_pairs += g.count * (z * (z - 1) / 2);
  }
  sc.groups = std::move(groups);

  bounds::CohortSpec cohort{sc.m};
  cohort.validate();  // rejects sources with zero keys
  sc.cross_pairs = bounds::pair_count(cohort);
  if (sc.cross_pairs > static_cast<bounds::uint128>(UINT64_MAX)) {
    throw std::invalid_argument("scenario: pair count too large to simulate");
  }
  return sc;
}

TrialOutcome run_trial(const Scenario& sc, std::uint64_t trial_index) {
  const std::string seed = trial_seed(sc, trial_index);
  const PrfKey hash_key = derive_key(seed, "hash");

  // Lay out values deterministically: group order, then value index.
  std::vector<NoisyKey> keys;
  matcher::TruthMap truth;
  std::map<std::string, BitVec> codes;
  std::vector<std::uint64_t> next_key_id(sc.s, 0);
  const std::size_t nwords = (static_cast<std::size_t>(sc.n) + 63) / 64;

  std::uint64_t value_id = 0;
  for (const GroupSpec& g : sc.groups) {
    for (std::uint64_t v = 0; v < g.count; ++v, ++value_id) {
      const std::string label = "v" + std::to_string(value_id);
      HashCode code;
      if (sc.hash_mode == HashMode::idealized) {
        code = BitVec(static_cast<std::size_t>(sc.n));
        for (std::size_t w = 0; w < nwords; ++w) {
          code.set_word(w, siphash24(hash_key, le64(value_id) + le64(w)));
        }
      } else {
        code = hash_value(label, seed, static_cast<std::uint32_t>(sc.n));
      }
      codes.emplace(label, code);
      for (std::uint32_t src : g.sources) {
        NoisyKey key;
        key.source_id = src;
        key.key_id = next_key_id[src - 1]++;
        auto rng = noise_stream(seed, src, key.key_id);
        key.bits = add_noise(code, sc.p_f, rng);
        truth.emplace(matcher::KeyId{key.source_id, key.key_id}, label);
        keys.push_back(std::move(key));
      }
    }
  }

  TrialOutcome out;
  out.report = matcher::analyze(keys, sc.t, &truth, &codes);
  out.pairs_same = sc.same_pairs;
  out.pairs_diff =
      static_cast<std::uint64_t>(sc.cross_pairs - sc.same_pairs);

  // Revelation by ground-truth group size. Rebuild the per-group medians so
  // each size bucket gets its own tally.
  std::map<std::string, std::vector<const NoisyKey*>> groups;
  for (const NoisyKey& k : keys) {
    groups[truth.at(matcher::KeyId{k.source_id, k.key_id})].push_back(&k);
  }
  std::vector<BitVec> bits;
  for (const auto& [label, members] : groups) {
    const auto z = static_cast<std::uint32_t>(members.size());
    ++out.groups_by_size[z];
    bits.clear();
    for (const NoisyKey* k : members) bits.push_back(k->bits);
    const BitVec& code = codes.at(label);
    if (median_key(bits, code) == code) ++out.revealed_by_size[z];
  }
  return out;
}

namespace {

void accumulate(TrialStats& stats, const TrialOutcome& outcome) {
  ++stats.trials;
  stats.observed_m += outcome.report.false_matches;
  stats.observed_u += outcome.report.missed_matches;
  stats.observed_r += outcome.report.revelations;
  stats.pairs_same_value += outcome.pairs_same;
  stats.pairs_diff_value += outcome.pairs_diff;
  stats.conflicted_clusters += outcome.report.conflicted_clusters;
  for (const auto& [z, c] : outcome.groups_by_size) {
    stats.groups_by_size[z] += c;
  }
  for (const auto& [z, c] : outcome.revealed_by_size) {
    stats.revealed_by_size[z] += c;
  }
}

void merge(TrialStats& into, const TrialStats& from) {
  into.trials += from.trials;
  into.observed_m += from.observed_m;
  into.observed_u += from.observed_u;
  into.observed_r += from.observed_r;
  into.pairs_same_value += from.pairs_same_value;
  into.pairs_diff_value += from.pairs_diff_value;
  into.conflicted_clusters += from.conflicted_clusters;
  for (const auto& [z, c] : from.groups_by_size) into.groups_by_size[z] += c;
  for (const auto& [z, c] : from.revealed_by_size) {
    into.revealed_by_size[z] += c;
  }
}

unsigned pick_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NOISYKEYS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace

TrialStats run_trials(const Scenario& sc, std::uint64_t trials,
                      unsigned threads) {
  if (trials == 0) throw std::invalid_argument("run_trials: trials must be >= 1");
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::uint64_t>(pick_threads(threads),
                                                    trials));
  if (nthreads <= 1) {
    TrialStats stats;
    for (std::uint64_t i = 0; i < trials; ++i) {
      accumulate(stats, run_trial(sc, i));
    }
    return stats;
  }

  std::vector<TrialStats> partial(nthreads);
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  for (unsigned w = 0; w < nthreads; ++w) {
    workers.emplace_back([&, w] {
      for (std::uint64_t i = w; i < trials; i += nthreads) {
        accumulate(partial[w], run_trial(sc, i));
      }
    });
  }
  for (std::thread& t : workers) t.join();
  TrialStats stats;
  for (const TrialStats& p : partial) merge(stats, p);
  return stats;
}

std::vector<BoundComparison> compare_to_bounds(const TrialStats& stats,
                                               const Scenario& sc) {
  std::vector<BoundComparison> out;
  const auto add = [&out](std::string name, std::uint64_t hits,
                          std::uint64_t obs, double analytic) {
    if (obs == 0) return;
    BoundComparison c;
    c.name = std::move(name);
    c.observations = obs;
    c.empirical = static_cast<double>(hits) / static_cast<double>(obs);
    c.analytic = analytic;
    const double var = analytic * (1.0 - analytic);
    c.std_error = std::sqrt(var / static_cast<double>(obs));
    if (c.std_error == 0.0) c.std_error = 1.0 / static_cast<double>(obs);
    c.zscore = (c.empirical - c.analytic) / c.std_error;
    c.pass = std::abs(c.zscore) <= 4.0;
    out.push_back(std::move(c));
  };

  add("p_M", stats.observed_m, stats.pairs_diff_value,
      bounds::mismatch_prob(sc.n, sc.t));
  add("p_U", stats.observed_u, stats.pairs_same_value,
      bounds::missed_match_prob(sc.n, sc.t, sc.p_f));
  for (const auto& [z, groups] : stats.groups_by_size) {
    const auto it = stats.revealed_by_size.find(z);
    const std::uint64_t revealed = it == stats.revealed_by_size.end()
                                       ? 0
                                       : it->second;
    add("p_R[z=" + std::to_string(z) + "]", revealed, groups,
        bounds::revelation_prob(z, sc.n, sc.p_f));
  }
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("scenario config: key '" + key + "' " + why);
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) bad_key(key, "is missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_key(key, "has the wrong type");
  }
}

}  // namespace

SimulationSpec parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario config: not valid JSON: ") +
                                e.what());
  }
  const auto s = require<std::uint32_t>(j, "sources");
  const auto n = require<std::int64_t>(j, "n");
  const auto p_f = require<double>(j, "p_f");
  const auto t = require<std::int64_t>(j, "t");
  const auto mode_text = require<std::string>(j, "hash_mode");
  HashMode mode;
  if (mode_text == "idealized") {
    mode = HashMode::idealized;
  } else if (mode_text == "keyed") {
    mode = HashMode::keyed;
  } else {
    bad_key("hash_mode", "must be \"idealized\" or \"keyed\"");
  }
  const auto seed = require<std::string>(j, "seed");
  const auto trials = require<std::uint64_t>(j, "trials");
  if (trials == 0) bad_key("trials", "must be >= 1");

  if (!j.contains("groups")) bad_key("groups", "is missing");
  if (!j.at("groups").is_array() || j.at("groups").empty()) {
    bad_key("groups", "must be a non-empty array");
  }
  std::vector<GroupSpec> groups;
  for (const json& g : j.at("groups")) {
    GroupSpec spec;
    spec.sources = require<std::vector<std::uint32_t>>(g, "sources");
    spec.count = require<std::uint64_t>(g, "count");
    groups.push_back(std::move(spec));
  }

  SimulationSpec spec;
  spec.trials = trials;
  spec.scenario = build_scenario(s, std::move(groups), n, p_f, t, mode, seed);
  return spec;
}

SimulationSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_json(buffer.str());
}

}  // namespace noisykeys::simulator
