// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbcb/agent.hpp"
#include "ssbcb/cellsearch.hpp"
#include "ssbcb/error.hpp"
#include "ssbcb/solvers.hpp"
#include "ssbcb/svg.hpp"
#include "ssbcb/trainer.hpp"
#include "ssbcb/util.hpp"

namespace ssbcb {

enum class Method { kNeural, kC1, kC2, kMaxOfExperts, kGreedy, kRandom, kGreedyMarginal };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kNeural: return "neural";
    case Method::kC1: return "c1";
    case Method::kC2: return "c2";
    case Method::kMaxOfExperts: return "max_of_experts";
    case Method::kGreedy: return "greedy";
    case Method::kRandom: return "random";
    case Method::kGreedyMarginal: return "greedy_marginal";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::kNeural, Method::kC1, Method::kC2, Method::kMaxOfExperts, Method::kGreedy, Method::kRandom,
                   Method::kGreedyMarginal})
    if (s == method_name(m)) return m;
  throw ConfigError("unknown method '" + s + "'");
}

inline std::vector<Method> all_methods() {
  return {Method::kNeural, Method::kC1, Method::kC2, Method::kMaxOfExperts, Method::kGreedy, Method::kRandom};
}

// "all" or a comma-separated list of method names.
inline std::vector<Method> parse_methods(const std::string& list) {
  if (list == "all") return all_methods();
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const Method m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) != out.end()) throw ConfigError("method '" + item + "' listed twice");
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no evaluation methods given");
  return out;
}

// Mean SNR of the ceil(10%) best entries; nullopt for an empty set.
inline std::optional<double> top_decile_mean(std::vector<double> snr_db) {
  if (snr_db.empty()) return std::nullopt;
  std::sort(snr_db.begin(), snr_db.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(snr_db.size()) - 1e-9));
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += snr_db[i];
  return s / static_cast<double>(k);
}

struct MethodRecord {
  int covered = 0;
  std::optional<double> top_snr_db;  // empty when nothing is covered
};

struct InstanceRecord {
  int index = 0;
  std::uint64_t env_seed = 0;
  int num_ues = 0;
  std::uint64_t gains_hash = 0;
  std::vector<MethodRecord> records;  // aligned with EvaluationReport::methods
  int union_covered = 0;              // union of the c1 and c2 sweeps
  int neural_and_union = 0;
  int neural_minus_union = 0;
  std::vector<std::uint8_t> neural_bits;  // kept only on request
  std::vector<std::uint8_t> union_bits;

  double fraction(std::size_t j) const {
    return num_ues > 0 ? static_cast<double>(records[j].covered) / num_ues : 0.0;
  }
};

struct EvaluationReport {
  double isd = 0.0;
  std::vector<Method> methods;
  std::vector<InstanceRecord> instances;

  std::optional<std::size_t> column(Method m) const {
    for (std::size_t j = 0; j < methods.size(); ++j)
      if (methods[j] == m) return j;
    return std::nullopt;
  }
  std::size_t require(Method m) const {
    const auto j = column(m);
    if (!j) throw std::invalid_argument(std::string("method not in report: ") + method_name(m));
    return *j;
  }
};

// Tie-inclusive: every method reaching the instance maximum.
inline std::vector<std::uint8_t> winners(const InstanceRecord& r) {
  int best = -1;
  for (const auto& m : r.records) best = std::max(best, m.covered);
  std::vector<std::uint8_t> w(r.records.size(), 0);
  for (std::size_t j = 0; j < r.records.size(); ++j) w[j] = r.records[j].covered == best ? 1 : 0;
  return w;
}

inline std::optional<std::size_t> unique_winner(const InstanceRecord& r) {
  const auto w = winners(r);
  if (std::count(w.begin(), w.end(), 1) != 1) return std::nullopt;
  return static_cast<std::size_t>(std::find(w.begin(), w.end(), 1) - w.begin());
}

struct EvalOptions {
  int num_instances = 200;
  std::uint64_t seed_begin = 1'000'000'000;
  int threads = 1;
  bool keep_bitsets = false;
};

namespace detail {

inline MethodRecord score(const GainMatrix& gains, const Deployment& dep, double tau,
                          std::vector<std::uint8_t>* bits = nullptr) {
  MethodRecord rec;
  if (gains.num_ues == 0) {
    if (bits) bits->clear();
    return rec;
  }
  const AssociationResult a = associate(gains, dep, tau);
  rec.covered = a.covered_count;
  std::vector<double> snr;
  for (int u = 0; u < a.num_ues(); ++u)
    if (a.covered[static_cast<std::size_t>(u)]) snr.push_back(a.best_power_dbm[static_cast<std::size_t>(u)] - gains.noise_dbm);
  rec.top_snr_db = top_decile_mean(std::move(snr));
  if (bits) *bits = a.covered;
  return rec;
}

}  // namespace detail

// Deployment chosen by `method` on one instance. Only the neural method
// needs an actor.
inline Deployment deploy_method(Method method, const GainMatrix& gains, const Environment& env,
                                const ExpertSweep& sweep, std::uint64_t env_seed, const nn::DenseNet* actor) {
  const double tau = env.tau();
  const auto expert = [&](std::size_t i) -> const Codebook& {
    if (env.experts.size() <= i) throw ConfigError("expert codebook c" + std::to_string(i + 1) + " is not configured");
    return env.experts[i];
  };
  switch (method) {
    case Method::kNeural:
      if (!actor) throw IncompatibleError("neural method requested without a trained agent");
      return act_deploy(*actor, sweep.observations, env.n);
    case Method::kC1: return Deployment::uniform(expert(0), gains.num_sectors);
    case Method::kC2: return Deployment::uniform(expert(1), gains.num_sectors);
    case Method::kMaxOfExperts: return max_of_experts(gains, env.experts, tau, sweep).deployment;
    case Method::kGreedy: return greedy_topk(gains, env.experts, env.n, tau, sweep).deployment;
    case Method::kRandom:
      return random_codebook(gains.num_beams, env.n, derive_seed(env_seed, label_of("eval/random")), gains.num_sectors);
    case Method::kGreedyMarginal: {
      std::vector<int> all(static_cast<std::size_t>(gains.num_beams));
      for (int b = 0; b < gains.num_beams; ++b) all[static_cast<std::size_t>(b)] = b;
      return greedy_marginal(gains, all, env.n, tau).deployment;
    }
  }
  throw std::logic_error("unhandled method");
}

inline InstanceRecord evaluate_instance(const Environment& env, const std::vector<Method>& methods, int index,
                                        std::uint64_t env_seed, const nn::DenseNet* actor, bool keep_bitsets) {
  const GainMatrix gains = instance_gains(env, env_seed);
  InstanceRecord rec;
  rec.index = index;
  rec.env_seed = env_seed;
  rec.num_ues = gains.num_ues;
  rec.gains_hash = gain_matrix_hash(gains);
  const double tau = env.tau();
  const ExpertSweep sweep = gains.num_ues > 0 ? sweep_experts(gains, env.experts, tau) : ExpertSweep{};

  std::vector<std::uint8_t> uni(static_cast<std::size_t>(gains.num_ues), 0);
  for (std::size_t e = 0; e < sweep.associations.size() && e < 2; ++e)
    for (std::size_t u = 0; u < uni.size(); ++u) uni[u] |= sweep.associations[e].covered[u];
  rec.union_covered = static_cast<int>(std::count(uni.begin(), uni.end(), 1));

  for (Method m : methods) {
    if (gains.num_ues == 0) {
      if (m == Method::kNeural && !actor) throw IncompatibleError("neural method requested without a trained agent");
      rec.records.push_back({});
      continue;
    }
    const Deployment dep = deploy_method(m, gains, env, sweep, env_seed, actor);
    std::vector<std::uint8_t> bits;
    rec.records.push_back(detail::score(gains, dep, tau, &bits));
    if (m == Method::kNeural) {
      for (std::size_t u = 0; u < bits.size(); ++u) {
        rec.neural_and_union += bits[u] & uni[u];
        rec.neural_minus_union += bits[u] & (1 - uni[u]);
      }
      if (keep_bitsets) rec.neural_bits = bits;
    }
  }
  if (keep_bitsets) rec.union_bits = std::move(uni);
  if (gain_matrix_hash(gains) != rec.gains_hash) throw std::logic_error("gain matrix changed during evaluation");
  return rec;
}

// Runs every method on identical per-instance gains. Instance i uses
// environment id seed_begin + i; ids inside the agent's training range are
// refused.
inline EvaluationReport evaluate_suite(const Environment& env, const std::vector<Method>& methods,
                                       const EvalOptions& opt, const AgentBundle* agent = nullptr) {
  if (methods.empty()) throw ConfigError("no evaluation methods given");
  if (opt.num_instances < 1) throw ConfigError("eval.instances must be at least 1");
  const bool neural = std::find(methods.begin(), methods.end(), Method::kNeural) != methods.end();
  if (neural && !agent) throw IncompatibleError("neural method requested without a trained agent");
  if (agent) {
    agent->manifest.check_compatible(pool_hash(env.pool), env.n, env.m(), env.tau());
    const std::uint64_t lo = opt.seed_begin, hi = opt.seed_begin + static_cast<std::uint64_t>(opt.num_instances);
    if (lo < agent->manifest.env_seed_end && agent->manifest.env_seed_begin < hi)
      throw IncompatibleError("evaluation environments [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              ") overlap the training range [" + std::to_string(agent->manifest.env_seed_begin) +
                              ", " + std::to_string(agent->manifest.env_seed_end) + ")");
  }
  EvaluationReport rep;
  rep.isd = env.layout.isd;
  rep.methods = methods;
  rep.instances.resize(static_cast<std::size_t>(opt.num_instances));
  const nn::DenseNet* actor = agent ? &agent->actor : nullptr;
  parallel_for(rep.instances.size(), opt.threads, [&](std::size_t i) {
    rep.instances[i] = evaluate_instance(env, methods, static_cast<int>(i), opt.seed_begin + i, actor, opt.keep_bitsets);
  });
  return rep;
}

// ---- aggregates ----

struct MethodStats {
  std::string method;
  double mean = 0.0;
  double stddev = 0.0;
  double ci95 = 0.0;
  double win_rate = 0.0;         // ties credited to every maximiser
  double unique_win_rate = 0.0;  // only sole maxima count
};

inline std::vector<MethodStats> covered_fraction_stats(const EvaluationReport& rep) {
  if (rep.instances.empty()) throw std::invalid_argument("covered_fraction_stats: empty report");
  const double N = static_cast<double>(rep.instances.size());
  std::vector<MethodStats> out;
  for (std::size_t j = 0; j < rep.methods.size(); ++j) {
    MethodStats st;
    st.method = method_name(rep.methods[j]);
    double sum = 0.0;
    for (const auto& r : rep.instances) sum += r.fraction(j);
    st.mean = sum / N;
    double ss = 0.0;
    for (const auto& r : rep.instances) ss += (r.fraction(j) - st.mean) * (r.fraction(j) - st.mean);
    st.stddev = rep.instances.size() > 1 ? std::sqrt(ss / (N - 1.0)) : 0.0;
    st.ci95 = 1.96 * st.stddev / std::sqrt(N);
    int wins = 0, unique = 0;
    for (const auto& r : rep.instances) {
      wins += winners(r)[j];
      const auto u = unique_winner(r);
      unique += (u && *u == j) ? 1 : 0;
    }
    st.win_rate = wins / N;
    st.unique_win_rate = unique / N;
    out.push_back(st);
  }
  return out;
}

struct Histogram {
  double bin_width = 1.0;
  std::vector<double> centers;  // multiples of bin_width
  std::vector<int> counts;
  std::vector<double> values;   // per included instance
  double mean = 0.0;
  int excluded = 0;             // instances with a zero baseline
};

// Bins are centred on multiples of the width, so 0 has its own bin.
inline Histogram histogram(const std::vector<double>& values, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("histogram: bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  h.values = values;
  if (values.empty()) return h;
  std::vector<long long> keys;
  for (double v : values) keys.push_back(static_cast<long long>(std::floor(v / bin_width + 0.5)));
  const long long lo = *std::min_element(keys.begin(), keys.end());
  const long long hi = *std::max_element(keys.begin(), keys.end());
  for (long long k = lo; k <= hi; ++k) h.centers.push_back(static_cast<double>(k) * bin_width);
  h.counts.assign(h.centers.size(), 0);
  for (long long k : keys) ++h.counts[static_cast<std::size_t>(k - lo)];
  double s = 0.0;
  for (double v : values) s += v;
  h.mean = s / static_cast<double>(values.size());
  return h;
}

inline Histogram relative_improvement_hist(const EvaluationReport& rep, Method baseline, Method challenger,
                                           double bin_width) {
  const std::size_t b = rep.require(baseline), c = rep.require(challenger);
  std::vector<double> v;
  int excluded = 0;
  for (const auto& r : rep.instances) {
    const int base = r.records[b].covered;
    if (base == 0) {
      ++excluded;
      continue;
    }
    v.push_back(100.0 * (r.records[c].covered - base) / base);
  }
  Histogram h = histogram(v, bin_width);
  h.excluded = excluded;
  return h;
}

using Cdf = std::vector<std::pair<double, double>>;

// Empirical CDF: sorted samples with y = rank / count.
inline Cdf empirical_cdf(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  Cdf out;
  const double N = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], static_cast<double>(i + 1) / N);
  return out;
}

inline Cdf coverage_cdf(const EvaluationReport& rep, Method m) {
  const std::size_t j = rep.require(m);
  std::vector<double> x;
  for (const auto& r : rep.instances) x.push_back(r.fraction(j));
  return empirical_cdf(std::move(x));
}

struct TopSnrSeries {
  Cdf cdf;
  double mean = 0.0;
  int excluded = 0;  // instances with no covered UE
};

inline TopSnrSeries top_decile_snr(const EvaluationReport& rep, Method m) {
  const std::size_t j = rep.require(m);
  std::vector<double> x;
  TopSnrSeries out;
  for (const auto& r : rep.instances) {
    if (r.records[j].top_snr_db) x.push_back(*r.records[j].top_snr_db);
    else ++out.excluded;
  }
  double s = 0.0;
  for (double v : x) s += v;
  out.mean = x.empty() ? 0.0 : s / static_cast<double>(x.size());
  out.cdf = empirical_cdf(std::move(x));
  return out;
}

struct Rediscovery {
  double rediscovered_pct = 0.0;  // |neural ∩ union| / |union|
  double newly_pct = 0.0;         // |neural \ union| / |union|
  long long union_total = 0;
};

inline Rediscovery rediscovery_counts(long long union_total, long long both, long long neural_only) {
  Rediscovery r;
  r.union_total = union_total;
  if (union_total > 0) {
    r.rediscovered_pct = 100.0 * static_cast<double>(both) / static_cast<double>(union_total);
    r.newly_pct = 100.0 * static_cast<double>(neural_only) / static_cast<double>(union_total);
  }
  return r;
}

inline Rediscovery rediscovery(const std::vector<std::uint8_t>& neural, const std::vector<std::uint8_t>& uni) {
  if (neural.size() != uni.size()) throw std::invalid_argument("rediscovery: bitset sizes differ");
  long long u = 0, both = 0, only = 0;
  for (std::size_t i = 0; i < neural.size(); ++i) {
    u += uni[i];
    both += neural[i] & uni[i];
    only += neural[i] & (1 - uni[i]);
  }
  return rediscovery_counts(u, both, only);
}

// Pooled over every instance of the suite.
inline Rediscovery rediscovery(const EvaluationReport& rep) {
  rep.require(Method::kNeural);
  long long u = 0, both = 0, only = 0;
  for (const auto& r : rep.instances) {
    u += r.union_covered;
    both += r.neural_and_union;
    only += r.neural_minus_union;
  }
  return rediscovery_counts(u, both, only);
}

// ---- report files ----

inline constexpr const char* kInstancesHeader =
    "instance,env_seed,isd,num_ues,gains_hash,method,covered,fraction,winner,unique_winner,top_decile_snr_db,"
    "union_covered,neural_and_union,neural_minus_union";

inline void write_instances_csv(std::ostream& os, const EvaluationReport& rep) {
  os << kInstancesHeader << '\n';
  for (const auto& r : rep.instances) {
    const auto w = winners(r);
    const auto uw = unique_winner(r);
    for (std::size_t j = 0; j < rep.methods.size(); ++j) {
      os << r.index << ',' << r.env_seed << ',' << format_double(rep.isd) << ',' << r.num_ues << ','
         << hex64(r.gains_hash) << ',' << method_name(rep.methods[j]) << ',' << r.records[j].covered << ','
         << format_double(r.fraction(j)) << ',' << int(w[j]) << ',' << int(uw && *uw == j) << ','
         << (r.records[j].top_snr_db ? format_double(*r.records[j].top_snr_db) : std::string()) << ','
         << r.union_covered << ',' << r.neural_and_union << ',' << r.neural_minus_union << '\n';
    }
  }
}

inline EvaluationReport read_instances_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kInstancesHeader) throw ConfigError("instances file: unexpected header");
  EvaluationReport rep;
  std::map<int, std::size_t> slot;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 10) f.emplace_back();
    if (f.size() != 14) throw ConfigError("instances file: wrong field count", lineno);
    try {
      const int idx = std::stoi(f[0]);
      const Method m = parse_method(f[5]);
      rep.isd = std::stod(f[2]);
      auto it = slot.find(idx);
      if (it == slot.end()) {
        InstanceRecord r;
        r.index = idx;
        r.env_seed = std::stoull(f[1]);
        r.num_ues = std::stoi(f[3]);
        r.gains_hash = std::stoull(f[4], nullptr, 16);
        r.union_covered = std::stoi(f[11]);
        r.neural_and_union = std::stoi(f[12]);
        r.neural_minus_union = std::stoi(f[13]);
        it = slot.emplace(idx, rep.instances.size()).first;
        rep.instances.push_back(std::move(r));
      }
      auto& r = rep.instances[it->second];
      if (it->second == 0) rep.methods.push_back(m);
      else if (r.records.size() >= rep.methods.size() || rep.methods[r.records.size()] != m)
        throw ConfigError("instances file: method columns differ between instances", lineno);
      MethodRecord mr;
      mr.covered = std::stoi(f[6]);
      if (!f[10].empty()) mr.top_snr_db = std::stod(f[10]);
      r.records.push_back(mr);
    } catch (const std::logic_error&) {
      throw ConfigError("instances file: malformed record", lineno);
    }
  }
  for (const auto& r : rep.instances)
    if (r.records.size() != rep.methods.size()) throw ConfigError("instances file: incomplete instance");
  if (rep.instances.empty()) throw ConfigError("instances file: no records");
  return rep;
}

namespace detail {

// Reference means published alongside the method, by ISD.
inline nlohmann::ordered_json reference_columns(double isd) {
  using nlohmann::ordered_json;
  if (isd == 200.0)
    return ordered_json{{"mean_covered_fraction", {{"neural", 0.454}, {"c1", 0.414}, {"c2", 0.423},
                                                   {"max_of_experts", 0.429}, {"greedy", 0.429}, {"random", 0.408}}},
                        {"win_rate_pct", {{"neural", 82.9}, {"c1", 6.3}, {"c2", 2.7}, {"greedy", 1.8}, {"random", 6.3}}},
                        {"mean_improvement_vs_c1_pct", 10.8},
                        {"rediscovered_pct", 97.53},
                        {"newly_discovered_pct", 9.0}};
  if (isd == 400.0)
    return ordered_json{{"mean_covered_fraction", {{"neural", 0.624}, {"c1", 0.599}, {"c2", 0.56},
                                                   {"max_of_experts", 0.604}, {"greedy", 0.587}, {"random", 0.592}}},
                        {"win_rate_pct", {{"neural", 90.45}, {"c1", 1.01}, {"c2", 4.52}, {"greedy", 2.01}, {"random", 2.01}}},
                        {"rediscovered_pct", 98.6},
                        {"newly_discovered_pct", 4.0}};
  return nullptr;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

inline std::string xy_csv(const std::string& key, const std::vector<std::pair<std::string, Cdf>>& series) {
  std::ostringstream os;
  os << key << ",x,y\n";
  for (const auto& [name, pts] : series)
    for (const auto& [x, y] : pts) os << name << ',' << format_double(x) << ',' << format_double(y) << '\n';
  return os.str();
}

}  // namespace detail

inline constexpr double kImprovementBinWidth = 2.5;

inline nlohmann::ordered_json summary_json(const EvaluationReport& rep) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "ssbcb-eval-1";
  j["isd_m"] = rep.isd;
  j["instances"] = rep.instances.size();
  ordered_json methods = ordered_json::object();
  for (const auto& st : covered_fraction_stats(rep)) {
    methods[st.method] = {{"mean_covered_fraction", st.mean},       {"stddev", st.stddev},
                          {"ci95", st.ci95},                         {"win_rate_pct", 100.0 * st.win_rate},
                          {"unique_win_rate_pct", 100.0 * st.unique_win_rate}};
  }
  j["methods"] = methods;
  int no_unique = 0;
  for (const auto& r : rep.instances) no_unique += unique_winner(r) ? 0 : 1;
  j["instances_without_unique_winner"] = no_unique;

  const bool neural = rep.column(Method::kNeural).has_value();
  ordered_json imp = ordered_json::object();
  for (Method base : {Method::kC1, Method::kC2, Method::kMaxOfExperts, Method::kGreedy, Method::kRandom}) {
    if (!neural || !rep.column(base)) continue;
    const Histogram h = relative_improvement_hist(rep, base, Method::kNeural, kImprovementBinWidth);
    imp[std::string("neural_vs_") + method_name(base)] = {{"mean_pct", h.mean}, {"excluded_instances", h.excluded}};
  }
  j["relative_improvement"] = imp;

  ordered_json snr = ordered_json::object();
  for (Method m : rep.methods) {
    const TopSnrSeries t = top_decile_snr(rep, m);
    snr[method_name(m)] = {{"mean_db", t.mean}, {"excluded_instances", t.excluded}};
  }
  j["top_decile_snr"] = snr;

  if (neural) {
    const Rediscovery rd = rediscovery(rep);
    j["rediscovery"] = {{"rediscovered_pct", rd.rediscovered_pct},
                        {"newly_discovered_pct", rd.newly_pct},
                        {"union_covered_ues", rd.union_total},
                        {"denominator", "UEs covered by the union of the c1 and c2 sweeps"}};
  }
  if (auto ref = detail::reference_columns(rep.isd); !ref.is_null()) j["reference"] = ref;
  return j;
}

// Writes summary.json, instances.csv, x,y data files and one SVG per figure.
inline void write_report(const std::filesystem::path& dir, const EvaluationReport& rep) {
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "summary.json", summary_json(rep).dump(2) + "\n");
  {
    std::ostringstream os;
    write_instances_csv(os, rep);
    detail::write_text(dir / "instances.csv", os.str());
  }
  std::vector<std::pair<std::string, Cdf>> cov, snr;
  std::vector<svg::Series> cov_s, snr_s;
  for (Method m : rep.methods) {
    cov.emplace_back(method_name(m), coverage_cdf(rep, m));
    snr.emplace_back(method_name(m), top_decile_snr(rep, m).cdf);
    cov_s.push_back({method_name(m), cov.back().second});
    snr_s.push_back({method_name(m), snr.back().second});
  }
  detail::write_text(dir / "coverage_cdf.csv", detail::xy_csv("method", cov));
  detail::write_text(dir / "top_snr_cdf.csv", detail::xy_csv("method", snr));
  detail::write_text(dir / "coverage_cdf.svg",
                     svg::step_plot("Covered fraction per instance", "fraction of UEs covered", "CDF", cov_s));
  detail::write_text(dir / "top_snr_cdf.svg",
                     svg::step_plot("Top-decile SSB SNR of covered UEs", "mean SNR of top 10% (dB)", "CDF", snr_s));

  std::vector<std::pair<std::string, Cdf>> hist;
  std::vector<svg::Series> hist_s;
  if (rep.column(Method::kNeural)) {
    for (Method base : {Method::kC1, Method::kC2}) {
      if (!rep.column(base)) continue;
      const Histogram h = relative_improvement_hist(rep, base, Method::kNeural, kImprovementBinWidth);
      Cdf pts;
      for (std::size_t i = 0; i < h.centers.size(); ++i) pts.emplace_back(h.centers[i], h.counts[i]);
      const std::string name = std::string("neural_vs_") + method_name(base);
      hist.emplace_back(name, pts);
      hist_s.push_back({name, pts});
    }
  }
  detail::write_text(dir / "improvement_hist.csv", detail::xy_csv("comparison", hist));
  detail::write_text(dir / "improvement_hist.svg",
                     svg::bar_plot("Relative improvement in covered UEs", "improvement (%)", "instances", hist_s,
                                   kImprovementBinWidth));
}

}  // namespace ssbcb
