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

// Non-learning codebook baselines and the exhaustive optimum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbcb/cellsearch.hpp"
#include "ssbcb/rng.hpp"

namespace ssbcb {

struct SolverResult {
  std::string label;
  Deployment deployment;
  int coverage = 0;
};

inline nlohmann::json to_json(const SolverResult& r) {
  nlohmann::json sectors = nlohmann::json::array();
  for (const auto& cb : r.deployment.codebooks) sectors.push_back(cb.beam_indices);
  return {{"label", r.label}, {"codebooks", sectors}, {"coverage", r.coverage}};
}

inline SolverResult expert_baseline(const GainMatrix& gains, const Codebook& expert, double tau) {
  SolverResult r;
  r.label = expert.label;
  r.deployment = Deployment::uniform(expert, gains.num_sectors);
  r.coverage = gains.num_ues > 0 ? coverage(gains, r.deployment, tau) : 0;
  return r;
}

// Each sector keeps the expert codebook with the most UEs served by that
// sector in the all-sectors sweeps. Ties go to the earlier codebook.
inline SolverResult max_of_experts(const GainMatrix& gains, const std::vector<Codebook>& experts, double tau,
                                   const ExpertSweep& sweep, std::vector<int>* choices = nullptr) {
  if (experts.empty()) throw std::invalid_argument("max_of_experts: need at least one expert codebook");
  SolverResult r;
  r.label = "max_of_experts";
  std::vector<int> pick(static_cast<std::size_t>(gains.num_sectors), 0);
  for (int s = 0; s < gains.num_sectors; ++s) {
    const auto si = static_cast<std::size_t>(s);
    for (std::size_t i = 1; i < experts.size(); ++i)
      if (sweep.per_sector_counts[i][si] > sweep.per_sector_counts[static_cast<std::size_t>(pick[si])][si])
        pick[si] = static_cast<int>(i);
    r.deployment.codebooks.push_back(experts[static_cast<std::size_t>(pick[si])]);
  }
  r.coverage = coverage(gains, r.deployment, tau);
  if (choices) *choices = pick;
  return r;
}

inline SolverResult max_of_experts(const GainMatrix& gains, const std::vector<Codebook>& experts, double tau) {
  return max_of_experts(gains, experts, tau, sweep_experts(gains, experts, tau));
}

// Per sector, ranks every expert beam by the UEs it served for that sector
// during the expert sweeps and keeps the n best (ties: lower pool index).
// A beam listed in several expert codebooks scores its best sweep.
inline SolverResult greedy_topk(const GainMatrix& gains, const std::vector<Codebook>& experts, int n, double tau,
                                const ExpertSweep& sweep) {
  std::vector<int> candidates;
  for (const auto& cb : experts) candidates.insert(candidates.end(), cb.beam_indices.begin(), cb.beam_indices.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (n < 1 || static_cast<int>(candidates.size()) < n)
    throw std::invalid_argument("greedy_topk: fewer candidate beams than codebook size");

  SolverResult r;
  r.label = "greedy";
  for (int s = 0; s < gains.num_sectors; ++s) {
    const auto& counts = sweep.observations[static_cast<std::size_t>(s)].counts;
    std::vector<int> score(static_cast<std::size_t>(gains.num_beams), -1);
    std::size_t base = 0;
    for (const auto& cb : experts) {
      for (std::size_t j = 0; j < cb.size(); ++j) {
        auto& sc = score[static_cast<std::size_t>(cb.beam_indices[j])];
        sc = std::max(sc, counts[base + j]);
      }
      base += cb.size();
    }
    std::vector<int> ranked = candidates;
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
      return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
    });
    ranked.resize(static_cast<std::size_t>(n));
    r.deployment.codebooks.push_back({ranked, "greedy"});
  }
  r.coverage = coverage(gains, r.deployment, tau);
  return r;
}

inline SolverResult greedy_topk(const GainMatrix& gains, const std::vector<Codebook>& experts, int n, double tau) {
  return greedy_topk(gains, experts, n, tau, sweep_experts(gains, experts, tau));
}

// Classical maximum-coverage greedy, run independently per sector on that
// sector's own beams: repeatedly add the candidate covering the most
// not-yet-covered UEs (ties: lower pool index).
inline SolverResult greedy_marginal(const GainMatrix& gains, const std::vector<int>& candidate_beams, int n,
                                    double tau) {
  if (n < 1 || static_cast<int>(candidate_beams.size()) < n)
    throw std::invalid_argument("greedy_marginal: fewer candidate beams than codebook size");
  std::vector<int> candidates = candidate_beams;
  std::sort(candidates.begin(), candidates.end());
  if (std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end())
    throw std::invalid_argument("greedy_marginal: duplicate candidate beams");

  SolverResult r;
  r.label = "greedy_marginal";
  for (int s = 0; s < gains.num_sectors; ++s) {
    std::vector<char> covered(static_cast<std::size_t>(gains.num_ues), 0);
    std::vector<char> used(candidates.size(), 0);
    Codebook cb{{}, "greedy_marginal"};
    for (int step = 0; step < n; ++step) {
      int best = -1, best_gain = -1;
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (used[k]) continue;
        int gain = 0;
        for (int u = 0; u < gains.num_ues; ++u)
          if (!covered[static_cast<std::size_t>(u)] && gains.at(s, u, candidates[k]) >= tau) ++gain;
        if (gain > best_gain) {
          best_gain = gain;
          best = static_cast<int>(k);
        }
      }
      used[static_cast<std::size_t>(best)] = 1;
      const int beam = candidates[static_cast<std::size_t>(best)];
      cb.beam_indices.push_back(beam);
      for (int u = 0; u < gains.num_ues; ++u)
        if (gains.at(s, u, beam) >= tau) covered[static_cast<std::size_t>(u)] = 1;
    }
    r.deployment.codebooks.push_back(std::move(cb));
  }
  r.coverage = coverage(gains, r.deployment, tau);
  return r;
}

// Uniform n-subset of the m pool beams per sector, without replacement.
inline Deployment random_codebook(int m, int n, std::uint64_t seed, int num_sectors) {
  if (n < 1 || n > m) throw std::invalid_argument("random_codebook: need 1 <= n <= m");
  Deployment d;
  for (int s = 0; s < num_sectors; ++s) {
    CounterRng rng(seed, label_of("random-codebook") + static_cast<std::uint64_t>(s));
    d.codebooks.push_back({sample_without_replacement(m, n, rng), "random"});
  }
  return d;
}

inline SolverResult random_baseline(const GainMatrix& gains, int n, double tau, std::uint64_t seed) {
  SolverResult r;
  r.label = "random";
  r.deployment = random_codebook(gains.num_beams, n, seed, gains.num_sectors);
  r.coverage = gains.num_ues > 0 ? coverage(gains, r.deployment, tau) : 0;
  return r;
}

inline double binomial(int m, int n) {
  double c = 1.0;
  for (int i = 1; i <= n; ++i) c = c * (m - n + i) / i;
  return c;
}

// Advances `idx` (strictly increasing, values < m) to the next
// lexicographic combination; false after the last one.
inline bool next_combination(std::vector<int>& idx, int m) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
  if (i < 0) return false;
  ++idx[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

inline constexpr double kBruteForceLimit = 1e6;

// Exact joint optimum over all C(m, n)^sectors deployments. The first
// optimum in lexicographic order (sector 0 slowest) is returned.
inline SolverResult brute_force_oracle(const GainMatrix& gains, int n, double tau,
                                       double max_combinations = kBruteForceLimit) {
  const int m = gains.num_beams;
  if (n < 1 || n > m) throw std::invalid_argument("brute_force_oracle: need 1 <= n <= m");
  const double total = std::pow(binomial(m, n), gains.num_sectors);
  if (total > max_combinations)
    throw std::invalid_argument("brute_force_oracle: " + std::to_string(total) + " joint combinations exceed guard");

  std::vector<int> first(static_cast<std::size_t>(n));
  std::iota(first.begin(), first.end(), 0);
  Deployment cur;
  for (int s = 0; s < gains.num_sectors; ++s) cur.codebooks.push_back({first, "oracle"});

  SolverResult best;
  best.label = "oracle";
  best.deployment = cur;
  best.coverage = gains.num_ues > 0 ? coverage(gains, cur, tau) : 0;
  if (gains.num_ues == 0) return best;
  for (;;) {
    // Odometer over sectors, last sector fastest.
    int s = gains.num_sectors - 1;
    while (s >= 0 && !next_combination(cur.codebooks[static_cast<std::size_t>(s)].beam_indices, m)) {
      cur.codebooks[static_cast<std::size_t>(s)].beam_indices = first;
      --s;
    }
    if (s < 0) break;
    const int c = coverage(gains, cur, tau);
    if (c > best.coverage) {
      best.coverage = c;
      best.deployment = cur;
    }
  }
  return best;
}

}  // namespace ssbcb
