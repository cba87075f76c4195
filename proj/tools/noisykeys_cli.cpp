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

// noisykeys: plan, generate, match and verify noise-obfuscated sketch keys.
//
// Exit codes: 0 success, 2 usage or parameter error, 3 infeasible plan,
// 4 I/O or malformed input data, 5 simulation validation FAIL,
// 6 conflicted clusters under --strict.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisykeys/bitkeys.hpp"
#include "noisykeys/bounds.hpp"
#include "noisykeys/matcher.hpp"
#include "noisykeys/planner.hpp"
#include "noisykeys/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;
constexpr int kExitValidationFail = 5;
constexpr int kExitConflicts = 6;

using noisykeys::bounds::CohortSpec;

// 17 significant digits: round-trips a double exactly through decimal.
std::string fmt_prob(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::int64_t parse_int(const std::string& text) {
  std::size_t pos = 0;
  const long long v = std::stoll(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("not an integer: " + text);
  return v;
}

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  const double v = std::stod(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("not a number: " + text);
  return v;
}

// Sweep syntax: "a,b,c" | "lo..hi" (default step) | "lo..hi..step" |
// "lo..hi..xK" (geometric, factor K).
std::vector<std::int64_t> parse_sweep(const std::string& text,
                                      std::int64_t default_step,
                                      bool default_geometric = false) {
  std::vector<std::int64_t> out;
  const std::size_t dots = text.find("..");
  if (dots == std::string::npos) {
    for (const std::string& item : split(text, ',')) {
      out.push_back(parse_int(item));
    }
  } else {
    const std::int64_t lo = parse_int(text.substr(0, dots));
    std::string rest = text.substr(dots + 2);
    std::int64_t hi;
    std::int64_t step = default_step;
    bool geometric = default_geometric;
    const std::size_t dots2 = rest.find("..");
    if (dots2 == std::string::npos) {
      hi = parse_int(rest);
    } else {
      hi = parse_int(rest.substr(0, dots2));
      std::string step_text = rest.substr(dots2 + 2);
      if (!step_text.empty() && (step_text[0] == 'x' || step_text[0] == 'X')) {
        geometric = true;
        step = parse_int(step_text.substr(1));
      } else {
        geometric = false;
        step = parse_int(step_text);
      }
    }
    if (lo < 1 || hi < lo || step < (geometric ? 2 : 1)) {
      throw std::invalid_argument("bad sweep range: " + text);
    }
    for (std::int64_t v = lo; v <= hi; geometric ? v *= step : v += step) {
      out.push_back(v);
    }
  }
  if (out.empty()) throw std::invalid_argument("empty sweep: " + text);
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    out.push_back(parse_double(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

CohortSpec parse_cohort(const std::string& text) {
  CohortSpec cohort;
  for (const std::string& item : split(text, ',')) {
    const std::int64_t v = parse_int(item);
    if (v < 1) throw std::invalid_argument("source key counts must be >= 1");
    cohort.m.push_back(static_cast<std::uint64_t>(v));
  }
  cohort.validate();
  return cohort;
}

// Writes to the path, or stdout when the path is empty or "-".
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open for writing: " + path);
      use_file_ = true;
    }
  }
  std::ostream& stream() { return use_file_ ? file_ : std::cout; }
  void finish() {
    if (use_file_) {
      file_.close();
      if (!file_) throw std::runtime_error("write failed");
    }
  }

 private:
  std::ofstream file_;
  bool use_file_ = false;
};

// --- plan -------------------------------------------------------------------

struct PlanOptions {
  std::string sources;
  double revelation_target = 0.05;
  double match_confidence = 0.95;
  std::int64_t grid = 10;
  std::int64_t max_n = noisykeys::planner::kMaxKeyLength;
  std::string out_path;
};

void print_bound_set(std::ostream& os, const noisykeys::bounds::BoundSet& b) {
  os << "p_m: " << fmt_prob(b.p_m) << "\n";
  os << "p_u: " << fmt_prob(b.p_u) << "\n";
  os << "p_w_bound: " << fmt_prob(b.p_w_bound) << "\n";
  os << "pairs: " << noisykeys::bounds::to_string(b.pairs) << "\n";
  os << "expected_errors: " << fmt_prob(b.expected_errors) << "\n";
  os << "prob_all_correct_lb: " << fmt_prob(b.prob_all_correct_lb) << "\n";
  os << "p_r_max: " << fmt_prob(b.p_r_max) << "\n";
  os << "expected_revealed_ub: " << fmt_prob(b.expected_revealed_ub) << "\n";
}

int run_plan(const PlanOptions& opt) {
  const CohortSpec cohort = parse_cohort(opt.sources);
  const auto result = noisykeys::planner::make_plan(
      cohort, opt.revelation_target, opt.match_confidence, opt.grid,
      opt.max_n);
  if (!result.feasible) {
    std::cout << "feasible: false\n";
    std::cout << "n_last_tried: " << result.n_last << "\n";
    std::cout << "achievable_revelation_bound: "
              << fmt_prob(result.best_revelation_bound) << "\n";
    std::cout << "achievable_prob_all_correct: "
              << fmt_prob(result.best_prob_all_correct) << "\n";
    return kExitInfeasible;
  }
  const auto& plan = result.plan;
  std::cout << "feasible: true\n";
  std::cout << "n: " << plan.n << "\n";
  std::cout << "p_f: " << fmt_prob(plan.p_f) << "\n";
  std::cout << "t: " << plan.t << "\n";
  print_bound_set(std::cout, plan.bound_set);
  if (plan.bound_set.pairs == 0) {
    std::cout << "note: no cross-source pairs (|Q| = 0); only the revelation "
                 "target constrains this plan\n";
  }
  if (!opt.out_path.empty()) {
    nlohmann::json j;
    j["feasible"] = true;
    j["n"] = plan.n;
    j["p_f"] = plan.p_f;
    j["t"] = plan.t;
    j["targets"] = {{"revelation_target", plan.targets.revelation_target},
                    {"matching_confidence", plan.targets.matching_confidence}};
    j["bounds"] = {
        {"p_m", plan.bound_set.p_m},
        {"p_u", plan.bound_set.p_u},
        {"p_w_bound", plan.bound_set.p_w_bound},
        {"pairs", noisykeys::bounds::to_string(plan.bound_set.pairs)},
        {"expected_errors", plan.bound_set.expected_errors},
        {"prob_all_correct_lb", plan.bound_set.prob_all_correct_lb},
        {"p_r_max", plan.bound_set.p_r_max},
        {"expected_revealed_ub", plan.bound_set.expected_revealed_ub},
    };
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + opt.out_path);
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

// --- bounds -----------------------------------------------------------------

struct BoundsOptions {
  std::int64_t n = 0;
  std::int64_t t = 0;
  double p_f = 0.0;
  std::string sources;
};

int run_bounds(const BoundsOptions& opt) {
  const CohortSpec cohort = parse_cohort(opt.sources);
  const auto b = noisykeys::bounds::evaluate(cohort, opt.n, opt.t, opt.p_f);
  std::cout << "n,t,pf,p_m,p_u,p_w_bound,pairs,expected_errors,"
               "prob_all_correct_lb,p_r_max,expected_revealed_ub\n";
  std::cout << opt.n << ',' << opt.t << ',' << fmt_prob(opt.p_f) << ','
            << fmt_prob(b.p_m) << ',' << fmt_prob(b.p_u) << ','
            << fmt_prob(b.p_w_bound) << ','
            << noisykeys::bounds::to_string(b.pairs) << ','
            << fmt_prob(b.expected_errors) << ','
            << fmt_prob(b.prob_all_correct_lb) << ',' << fmt_prob(b.p_r_max)
            << ',' << fmt_prob(b.expected_revealed_ub) << "\n";
  return kExitOk;
}

// --- keygen -----------------------------------------------------------------

struct KeygenOptions {
  std::string input_path;
  std::string seed;
  std::string noise_seed;
  std::int64_t n = 0;
  double p_f = 0.0;
  std::int64_t source_id = 0;
  std::string out_path;
};

int run_keygen(const KeygenOptions& opt) {
  if (opt.n < 1 || opt.n > UINT32_MAX) {
    throw std::invalid_argument("keygen: n must be in [1, 2^32)");
  }
  noisykeys::NoiseConfig config;
  config.n = static_cast<std::uint32_t>(opt.n);
  config.p_f = opt.p_f;
  config.hash_seed = opt.seed;
  // Default noise seed is derived from the hash seed and source id; it keeps
  // runs reproducible but is NOT private. Deployments must pass their own.
  config.noise_seed = opt.noise_seed.empty()
                          ? opt.seed + '\x1f' + std::to_string(opt.source_id)
                          : opt.noise_seed;
  config.validate();

  std::ifstream in(opt.input_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + opt.input_path);

  noisykeys::KeySet set;
  set.n = config.n;
  set.session = noisykeys::session_tag(config.hash_seed);

  std::set<std::string> seen;
  std::string value;
  std::uint64_t key_id = 0;
  const auto source = static_cast<std::uint64_t>(opt.source_id);
  while (std::getline(in, value)) {
    if (value.empty()) continue;
    if (!seen.insert(value).second) {
      throw noisykeys::ParseError(opt.input_path + ": duplicate value '" +
                                  value +
                                  "' (keys per source must be distinct)");
    }
    const noisykeys::HashCode code =
        noisykeys::hash_value(value, config.hash_seed, config.n);
    auto rng = noisykeys::noise_stream(config.noise_seed, source, key_id);
    noisykeys::NoisyKey key;
    key.bits = noisykeys::add_noise(code, config.p_f, rng);
    key.source_id = source;
    key.key_id = key_id++;
    set.keys.push_back(std::move(key));
  }
  noisykeys::write_key_set_file(opt.out_path, set);
  return kExitOk;
}

// --- match ------------------------------------------------------------------

struct MatchOptions {
  std::vector<std::string> key_paths;
  std::int64_t t = 0;
  std::string truth_path;
  std::string seed;
  bool strict = false;
  std::string out_path;
};

noisykeys::matcher::TruthMap read_truth_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  noisykeys::matcher::TruthMap truth;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 =
        c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw noisykeys::ParseError(path + ": line " + std::to_string(lineno) +
                                  ": expected source,key,value");
    }
    noisykeys::matcher::KeyId id;
    id.source = static_cast<std::uint64_t>(parse_int(line.substr(0, c1)));
    id.key =
        static_cast<std::uint64_t>(parse_int(line.substr(c1 + 1, c2 - c1 - 1)));
    if (!truth.emplace(id, line.substr(c2 + 1)).second) {
      throw noisykeys::ParseError(path + ": line " + std::to_string(lineno) +
                                  ": duplicate key id");
    }
  }
  return truth;
}

int run_match(const MatchOptions& opt) {
  if (opt.key_paths.empty()) {
    throw std::invalid_argument("match: need at least one --keys file");
  }
  std::vector<noisykeys::NoisyKey> keys;
  std::set<std::pair<std::uint64_t, std::uint64_t>> ids;
  std::uint32_t n = 0;
  std::string session;
  for (const std::string& path : opt.key_paths) {
    noisykeys::KeySet set = noisykeys::read_key_set_file(path);
    if (n == 0) {
      n = set.n;
      session = set.session;
    } else {
      if (set.n != n) {
        throw noisykeys::ParseError(path + ": header n=" +
                                    std::to_string(set.n) +
                                    " does not match n=" + std::to_string(n));
      }
      if (set.session != session) {
        throw noisykeys::ParseError(path + ": session " + set.session +
                                    " does not match " + session);
      }
    }
    for (noisykeys::NoisyKey& key : set.keys) {
      if (!ids.emplace(key.source_id, key.key_id).second) {
        throw noisykeys::ParseError(
            path + ": duplicate key " + std::to_string(key.source_id) + "," +
            std::to_string(key.key_id) + " across input files");
      }
      keys.push_back(std::move(key));
    }
  }

  std::optional<noisykeys::matcher::TruthMap> truth;
  std::optional<std::map<std::string, noisykeys::BitVec>> codes;
  if (!opt.truth_path.empty()) {
    truth = read_truth_file(opt.truth_path);
    if (opt.seed.empty()) {
      throw std::invalid_argument(
          "match: --seed is required with --truth (revelation scoring "
          "recomputes hash codes)");
    }
    codes.emplace();
    for (const auto& [id, label] : *truth) {
      if (!codes->contains(label)) {
        codes->emplace(label, noisykeys::hash_value(label, opt.seed, n));
      }
    }
  }

  const noisykeys::matcher::MatchReport report = noisykeys::matcher::analyze(
      keys, opt.t, truth ? &*truth : nullptr, codes ? &*codes : nullptr);

  std::set<std::uint64_t> sources;
  for (const auto& key : keys) sources.insert(key.source_id);

  OutputTarget target(opt.out_path);
  std::ostream& os = target.stream();
  os << "keys," << keys.size() << "\n";
  os << "sources," << sources.size() << "\n";
  os << "n," << n << "\n";
  os << "threshold," << opt.t << "\n";
  os << "clusters," << report.clusters.size() << "\n";
  os << "conflicted_clusters," << report.conflicted_clusters << "\n";
  if (truth) {
    os << "false_matches," << report.false_matches << "\n";
    os << "missed_matches," << report.missed_matches << "\n";
    os << "total_errors," << report.total_errors << "\n";
    os << "revelations," << report.revelations << "\n";
  }
  for (std::size_t i = 0; i < report.clusters.size(); ++i) {
    const auto& cluster = report.clusters[i];
    os << "cluster," << i << ',' << (cluster.conflicted ? 1 : 0) << ',';
    for (std::size_t j = 0; j < cluster.members.size(); ++j) {
      if (j > 0) os << ' ';
      os << cluster.members[j].source << ':' << cluster.members[j].key;
    }
    os << "\n";
  }
  target.finish();
  if (opt.strict && report.conflicted_clusters > 0) return kExitConflicts;
  return kExitOk;
}

// --- simulate -----------------------------------------------------------------

struct SimulateOptions {
  std::string config_path;
  std::string out_path;
  unsigned threads = 0;
  std::int64_t check_t = 0;  // 0 = use the scenario's own t
};

int run_simulate(const SimulateOptions& opt) {
  const auto spec = noisykeys::simulator::load_scenario_file(opt.config_path);
  const auto stats = noisykeys::simulator::run_trials(spec.scenario,
                                                      spec.trials, opt.threads);
  // --check-t swaps the threshold on the analytic side only; a deliberate
  // mismatch must come out as FAIL, which validates the comparison harness.
  noisykeys::simulator::Scenario analytic = spec.scenario;
  if (opt.check_t != 0) {
    if (opt.check_t < 1 || opt.check_t > analytic.n) {
      throw std::invalid_argument("simulate: --check-t not in [1, n]");
    }
    analytic.t = opt.check_t;
  }
  const auto comparisons =
      noisykeys::simulator::compare_to_bounds(stats, analytic);
  OutputTarget target(opt.out_path);
  std::ostream& os = target.stream();
  os << "name,empirical,analytic,stderr,zscore,verdict\n";
  bool failed = false;
  for (const auto& c : comparisons) {
    os << c.name << ',' << fmt_prob(c.empirical) << ',' << fmt_prob(c.analytic)
       << ',' << fmt_prob(c.std_error) << ',' << fmt_num(c.zscore) << ','
       << (c.pass ? "PASS" : "FAIL") << "\n";
    failed = failed || !c.pass;
  }
  target.finish();
  return failed ? kExitValidationFail : kExitOk;
}

// --- figure -----------------------------------------------------------------

struct FigureOptions {
  std::string id;
  std::string n_sweep;
  std::string m_sweep;
  std::string s_sweep;
  std::string pf_list;
  std::string targets_list;
  std::string fractions_list;
  double revelation_target = 0.05;
  double match_confidence = 0.95;
  std::int64_t grid = 10;
  bool joint_sweep = false;
  std::string out_path;
};

std::int64_t single_value(const std::string& sweep, const char* flag) {
  const auto values = parse_sweep(sweep, 1);
  if (values.size() != 1) {
    throw std::invalid_argument(std::string("this figure takes a single ") +
                                flag);
  }
  return values.front();
}

const std::string& require_flag(const std::string& value, const char* flag,
                                const std::string& id) {
  if (value.empty()) {
    throw std::invalid_argument("figure " + id + " requires " + flag);
  }
  return value;
}

std::int64_t fraction_threshold(double fraction, std::int64_t n) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("threshold fractions must be in (0, 1]");
  }
  return std::clamp<std::int64_t>(std::llround(fraction * static_cast<double>(n)),
                                  1, n);
}

int run_figure(const FigureOptions& opt) {
  OutputTarget target(opt.out_path);
  std::ostream& os = target.stream();

  if (opt.id == "required-bits") {
    const auto ms = parse_sweep(require_flag(opt.m_sweep, "--m", opt.id), 2,
                                true);
    const auto ss = parse_sweep(require_flag(opt.s_sweep, "--s", opt.id), 1);
    os << "m,s,n_required\n";
    for (const std::int64_t m : ms) {
      for (const std::int64_t s : ss) {
        CohortSpec cohort;
        cohort.m.assign(static_cast<std::size_t>(s),
                        static_cast<std::uint64_t>(m));
        const auto result = noisykeys::planner::min_key_length(
            cohort, opt.revelation_target, opt.match_confidence, opt.grid);
        if (!result.feasible) {
          std::cerr << "skipping infeasible point m=" << m << " s=" << s
                    << "\n";
          continue;
        }
        os << m << ',' << s << ',' << result.plan.n << "\n";
      }
    }
  } else if (opt.id == "revelation-curve") {
    const auto ns = parse_sweep(require_flag(opt.n_sweep, "--n", opt.id), 50);
    const auto pfs =
        parse_double_list(require_flag(opt.pf_list, "--pf", opt.id));
    const std::int64_t s =
        opt.s_sweep.empty() ? 2 : single_value(opt.s_sweep, "--s");
    os << "n,pf,p_r_bound\n";
    for (const std::int64_t n : ns) {
      for (const double pf : pfs) {
        os << n << ',' << fmt_num(pf) << ','
           << fmt_prob(noisykeys::bounds::revelation_bound(s, n, pf)) << "\n";
      }
    }
  } else if (opt.id == "min-flip") {
    const auto ns = parse_sweep(require_flag(opt.n_sweep, "--n", opt.id), 50);
    const auto targets =
        parse_double_list(require_flag(opt.targets_list, "--targets", opt.id));
    const std::int64_t s =
        opt.s_sweep.empty() ? 2 : single_value(opt.s_sweep, "--s");
    os << "n,target,min_pf\n";
    for (const std::int64_t n : ns) {
      for (const double target : targets) {
        const auto result = noisykeys::planner::min_flip_prob(s, n, target);
        if (!result.feasible) {
          std::cerr << "skipping infeasible point n=" << n
                    << " target=" << target << "\n";
          continue;
        }
        os << n << ',' << fmt_num(target) << ',' << fmt_prob(result.p_f)
           << "\n";
      }
    }
  } else if (opt.id == "mismatch-curve") {
    const auto ns = parse_sweep(require_flag(opt.n_sweep, "--n", opt.id), 50);
    const auto fractions = parse_double_list(
        require_flag(opt.fractions_list, "--t-fractions", opt.id));
    os << "n,t_fraction,p_m\n";
    for (const std::int64_t n : ns) {
      for (const double f : fractions) {
        os << n << ',' << fmt_num(f) << ','
           << fmt_prob(
                  noisykeys::bounds::mismatch_prob(n, fraction_threshold(f, n)))
           << "\n";
      }
    }
  } else if (opt.id == "missed-curve") {
    const auto ns = parse_sweep(require_flag(opt.n_sweep, "--n", opt.id), 50);
    const auto fractions = parse_double_list(
        require_flag(opt.fractions_list, "--t-fractions", opt.id));
    const std::int64_t s =
        opt.s_sweep.empty() ? 2 : single_value(opt.s_sweep, "--s");
    os << "n,t_fraction,pf_used,p_u\n";
    for (const std::int64_t n : ns) {
      const auto flip =
          noisykeys::planner::min_flip_prob(s, n, opt.revelation_target);
      if (!flip.feasible) {
        std::cerr << "skipping infeasible point n=" << n << "\n";
        continue;
      }
      for (const double f : fractions) {
        os << n << ',' << fmt_num(f) << ',' << fmt_prob(flip.p_f) << ','
           << fmt_prob(noisykeys::bounds::missed_match_prob(
                  n, fraction_threshold(f, n), flip.p_f))
           << "\n";
      }
    }
  } else if (opt.id == "pair-error") {
    const auto ns = parse_sweep(require_flag(opt.n_sweep, "--n", opt.id), 50);
    const auto ss = parse_sweep(require_flag(opt.s_sweep, "--s", opt.id), 1);
    os << "n,s,pf_used,t_opt,p_w\n";
    for (const std::int64_t n : ns) {
      for (const std::int64_t s : ss) {
        const auto result = noisykeys::planner::pairwise_error_at(
            s, n, opt.revelation_target, opt.joint_sweep);
        if (!result.feasible) {
          std::cerr << "skipping infeasible point n=" << n << " s=" << s
                    << "\n";
          continue;
        }
        os << n << ',' << s << ',' << fmt_prob(result.p_f_used) << ','
           << result.t_opt << ',' << fmt_prob(result.p_w) << "\n";
      }
    }
  } else if (opt.id == "pair-count") {
    const auto ms = parse_sweep(require_flag(opt.m_sweep, "--m", opt.id), 2,
                                true);
    const auto ss = parse_sweep(require_flag(opt.s_sweep, "--s", opt.id), 1);
    os << "m,s,log10_pairs\n";
    for (const std::int64_t m : ms) {
      for (const std::int64_t s : ss) {
        CohortSpec cohort;
        cohort.m.assign(static_cast<std::size_t>(s),
                        static_cast<std::uint64_t>(m));
        const auto pairs = noisykeys::bounds::pair_count(cohort);
        const double log10_pairs =
            pairs == 0 ? -std::numeric_limits<double>::infinity()
                       : static_cast<double>(
                             std::log10(static_cast<long double>(pairs)));
        os << m << ',' << s << ',' << fmt_num(log10_pairs) << "\n";
      }
    }
  } else {
    throw std::invalid_argument(
        "unknown figure id '" + opt.id +
        "' (known: required-bits, revelation-curve, min-flip, mismatch-curve, "
        "missed-curve, pair-error, pair-count)");
  }
  target.finish();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "noisykeys: noise-obfuscated sketch keys -- planning, bounds, key "
      "generation, matching and Monte Carlo verification"};
  app.require_subcommand(1);

  PlanOptions plan_opt;
  auto* plan = app.add_subcommand(
      "plan", "choose (n, p_f, t) meeting revelation and matching targets");
  plan->add_option("--sources", plan_opt.sources,
                   "keys per source, comma-separated (e.g. 64000,64000)")
      ->required();
  plan->add_option("--revelation-target", plan_opt.revelation_target,
                   "max revelation probability bound (default 0.05)");
  plan->add_option("--match-confidence", plan_opt.match_confidence,
                   "min probability of zero matching errors (default 0.95)");
  plan->add_option("--grid", plan_opt.grid, "key-length grid step (default 10)");
  plan->add_option("--max-n", plan_opt.max_n,
                   "largest key length to consider (default 1000000)");
  plan->add_option("--out", plan_opt.out_path, "also write the plan as JSON");

  BoundsOptions bounds_opt;
  auto* bounds_cmd = app.add_subcommand(
      "bounds", "evaluate all bound values for one (n, t, p_f, cohort)");
  bounds_cmd->add_option("--n", bounds_opt.n, "bits per key")->required();
  bounds_cmd->add_option("--t", bounds_opt.t, "matching threshold")->required();
  bounds_cmd->add_option("--pf", bounds_opt.p_f, "bit-flip probability")
      ->required();
  bounds_cmd->add_option("--sources", bounds_opt.sources,
                         "keys per source, comma-separated")
      ->required();

  KeygenOptions keygen_opt;
  auto* keygen = app.add_subcommand(
      "keygen", "hash values and add noise, writing a key-set file");
  keygen->add_option("--input", keygen_opt.input_path,
                     "file with one value per line")
      ->required();
  keygen->add_option("--seed", keygen_opt.seed, "shared hash seed")->required();
  keygen->add_option("--noise-seed", keygen_opt.noise_seed,
                     "private per-source noise seed (defaults to a "
                     "reproducible derivation; pass your own in production)");
  keygen->add_option("--n", keygen_opt.n, "bits per key")->required();
  keygen->add_option("--pf", keygen_opt.p_f, "bit-flip probability")
      ->required();
  keygen->add_option("--source-id", keygen_opt.source_id, "source id")
      ->required();
  keygen->add_option("--out", keygen_opt.out_path, "output key-set file")
      ->required();

  MatchOptions match_opt;
  auto* match = app.add_subcommand(
      "match", "cluster noisy keys from key-set files; score against truth");
  match->add_option("--keys", match_opt.key_paths, "key-set files")
      ->required()
      ->expected(-1);
  match->add_option("--t", match_opt.t, "matching threshold")->required();
  match->add_option("--truth", match_opt.truth_path,
                    "truth file: source,key,value lines");
  match->add_option("--seed", match_opt.seed,
                    "shared hash seed (required with --truth)");
  match->add_flag("--strict", match_opt.strict,
                  "exit nonzero when clusters conflict");
  match->add_option("--out", match_opt.out_path, "write the report here");

  SimulateOptions sim_opt;
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo pipeline runs compared to the analytic bounds");
  simulate->add_option("--config", sim_opt.config_path, "scenario JSON file")
      ->required();
  simulate->add_option("--out", sim_opt.out_path, "write the CSV here");
  simulate->add_option("--threads", sim_opt.threads,
                       "worker threads (default: hardware)");
  simulate->add_option("--check-t", sim_opt.check_t,
                       "compare against analytics at this threshold instead "
                       "of the scenario's (negative control; a mismatch must "
                       "FAIL)");

  FigureOptions fig_opt;
  auto* figure = app.add_subcommand(
      "figure", "emit parameter-sweep CSV data for one of the named curves");
  figure->add_option("--id", fig_opt.id,
                     "one of required-bits, revelation-curve, min-flip, "
                     "mismatch-curve, missed-curve, pair-error, pair-count")
      ->required();
  figure->add_option("--n", fig_opt.n_sweep, "key length sweep (e.g. 50..1000)");
  figure->add_option("--m", fig_opt.m_sweep,
                     "keys-per-source sweep (e.g. 1000..64000..x2)");
  figure->add_option("--s", fig_opt.s_sweep, "source count sweep (e.g. 2..5)");
  figure->add_option("--pf", fig_opt.pf_list, "bit-flip probabilities");
  figure->add_option("--targets", fig_opt.targets_list,
                     "revelation targets (min-flip)");
  figure->add_option("--t-fractions", fig_opt.fractions_list,
                     "thresholds as fractions of n");
  figure->add_option("--revelation-target", fig_opt.revelation_target,
                     "revelation bound target (default 0.05)");
  figure->add_option("--match-confidence", fig_opt.match_confidence,
                     "matching confidence (required-bits, default 0.95)");
  figure->add_option("--grid", fig_opt.grid,
                     "key-length grid step (required-bits, default 10)");
  figure->add_flag("--joint-sweep", fig_opt.joint_sweep,
                   "pair-error: also sweep p_f above the minimum when "
                   "optimizing t (cannot improve the bound; verification "
                   "knob)");
  figure->add_option("--out", fig_opt.out_path, "output CSV path (default stdout)");

  int rc = kExitOk;
  plan->callback([&] { rc = run_plan(plan_opt); });
  bounds_cmd->callback([&] { rc = run_bounds(bounds_opt); });
  keygen->callback([&] { rc = run_keygen(keygen_opt); });
  match->callback([&] { rc = run_match(match_opt); });
  simulate->callback([&] { rc = run_simulate(sim_opt); });
  figure->callback([&] { rc = run_figure(fig_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const noisykeys::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::logic_error& e) {  // invalid_argument, domain_error
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return rc;
}
