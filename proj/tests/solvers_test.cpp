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

#include <bit>
#include <bitset>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "ssbcb/solvers.hpp"
#include "support.hpp"

namespace ssbcb {
namespace {

using testing::boolean_gains;
using testing::random_gains;
using testing::single;

void expect_valid(const SolverResult& r, int m, int n) {
  for (const auto& cb : r.deployment.codebooks) EXPECT_NO_THROW(cb.validate(m, n)) << r.label;
}

std::vector<Codebook> experts_of(int n, int count) {
  std::vector<Codebook> out;
  for (int k = 0; k < count; ++k) {
    Codebook cb{{}, "c" + std::to_string(k + 1)};
    for (int i = 0; i < n; ++i) cb.beam_indices.push_back(k * n + i);
    out.push_back(cb);
  }
  return out;
}

// Independent exhaustive optimum using per-beam UE bitsets.
int bitset_optimum(const GainMatrix& g, int n, double tau) {
  std::vector<std::bitset<64>> sets(static_cast<std::size_t>(g.num_beams));
  for (int b = 0; b < g.num_beams; ++b)
    for (int u = 0; u < g.num_ues; ++u)
      if (g.at(0, u, b) >= tau) sets[static_cast<std::size_t>(b)].set(static_cast<std::size_t>(u));
  int best = 0;
  for (unsigned mask = 0; mask < (1u << g.num_beams); ++mask) {
    if (std::popcount(mask) != n) continue;
    std::bitset<64> acc;
    for (int b = 0; b < g.num_beams; ++b)
      if (mask >> b & 1u) acc |= sets[static_cast<std::size_t>(b)];
    best = std::max(best, static_cast<int>(acc.count()));
  }
  return best;
}

TEST(Solvers, ExpertBaseline) {
  const GainMatrix g = random_gains(3, 40, 144, 1);
  const auto experts = experts_of(24, 2);
  const auto r = expert_baseline(g, experts[0], -60.0);
  ASSERT_EQ(r.deployment.codebooks.size(), 3u);
  expect_valid(r, 144, 24);
  EXPECT_EQ(r.coverage, testing::scan_coverage(g, r.deployment, -60.0));
  EXPECT_EQ(expert_baseline(GainMatrix::zeros(3, 0, 144), experts[0], -60.0).coverage, 0);
}

TEST(Solvers, NarrowExpertWinsAtCellEdge) {
  const BeamPool pool = build_pool(ArrayGeometry{}, PoolConfig::defaults());
  const auto experts = build_expert_codebooks(pool);
  Scenario sc;
  CounterRng rng(3, "test/edge");
  for (int i = 0; i < 300; ++i) {
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi), r = rng.uniform(95.0, 100.0);
    sc.ues.positions.push_back({r * std::cos(a), r * std::sin(a), 1.5});
    sc.ues.indoor.push_back(0);
    sc.ues.cluster_ids.push_back(-1);
  }
  RadioConfig radio;
  radio.shadowing_stddev_los_db = radio.shadowing_stddev_nlos_db = 0.0;
  radio.detection_threshold_dbm = -75.0;
  const GainMatrix g = build_gain_matrix(sc, pool, radio);
  const int c1 = expert_baseline(g, experts[0], radio.detection_threshold_dbm).coverage;
  const int c2 = expert_baseline(g, experts[1], radio.detection_threshold_dbm).coverage;
  EXPECT_GE(c1, c2);
  EXPECT_GT(c1, 0);
}

TEST(Solvers, MaxOfExpertsPicksLargerSectorCount) {
  // One sector: c1 covers 3 UEs, c2 covers 2.
  GainMatrix g = GainMatrix::zeros(1, 5, 4);
  for (double& v : g.power_dbm) v = -100.0;
  g.at(0, 0, 0) = g.at(0, 1, 0) = g.at(0, 2, 1) = -60.0;
  g.at(0, 3, 2) = g.at(0, 4, 3) = -60.0;
  const std::vector<Codebook> experts{{{0, 1}, "c1"}, {{2, 3}, "c2"}};
  std::vector<int> choices;
  const auto r = max_of_experts(g, experts, -80.0, sweep_experts(g, experts, -80.0), &choices);
  EXPECT_EQ(choices, std::vector<int>{0});
  EXPECT_EQ(r.deployment.codebooks[0].label, "c1");
  // Equal counts: lower index.
  g.at(0, 2, 1) = -100.0;
  max_of_experts(g, experts, -80.0, sweep_experts(g, experts, -80.0), &choices);
  EXPECT_EQ(choices, std::vector<int>{0});
  g.at(0, 0, 0) = -100.0;
  max_of_experts(g, experts, -80.0, sweep_experts(g, experts, -80.0), &choices);
  EXPECT_EQ(choices, std::vector<int>{1});
}

TEST(Solvers, MaxOfExpertsMatchesPerSectorEnumeration) {
  const auto experts = experts_of(6, 2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GainMatrix g = random_gains(3, 60, 12, seed);
    const auto sweep = sweep_experts(g, experts, -58.0);
    std::vector<int> choices;
    const auto r = max_of_experts(g, experts, -58.0, sweep, &choices);
    for (int s = 0; s < 3; ++s) {
      const int a = per_sector_coverage(g, Deployment::uniform(experts[0], 3), -58.0)[static_cast<std::size_t>(s)];
      const int b = per_sector_coverage(g, Deployment::uniform(experts[1], 3), -58.0)[static_cast<std::size_t>(s)];
      ASSERT_EQ(choices[static_cast<std::size_t>(s)], b > a ? 1 : 0);
      ASSERT_GE(sweep.per_sector_counts[static_cast<std::size_t>(choices[static_cast<std::size_t>(s)])][static_cast<std::size_t>(s)],
                std::max(a, b));
    }
    expect_valid(r, 12, 6);
  }
}

TEST(Solvers, MarginalGreedyTextbookInstance) {
  // universe {a..f}; S1 = {a,b,c,d}, S2 = {a,b,e}, S3 = {c,d,f}
  const GainMatrix g = boolean_gains({{0, 1, 2, 3}, {0, 1, 4}, {2, 3, 5}}, 6);
  const auto greedy = greedy_marginal(g, {0, 1, 2}, 2, -80.0);
  EXPECT_EQ(greedy.deployment.codebooks[0].beam_indices[0], 0);
  EXPECT_EQ(greedy.coverage, 5);
  const auto opt = brute_force_oracle(g, 2, -80.0);
  EXPECT_EQ(opt.coverage, 6);
  EXPECT_EQ(opt.deployment.codebooks[0].beam_indices, (std::vector<int>{1, 2}));
  EXPECT_GE(greedy.coverage / 6.0, 1.0 - 1.0 / std::numbers::e);
}

TEST(Solvers, DisjointBeamsTopkAndMarginalAgree) {
  const GainMatrix g = boolean_gains({{0}, {1, 2, 3}, {4, 5}, {6, 7, 8, 9}}, 10);
  const std::vector<Codebook> experts{{{0, 1}, "c1"}, {{2, 3}, "c2"}};
  const auto topk = greedy_topk(g, experts, 2, -80.0);
  const auto marginal = greedy_marginal(g, {0, 1, 2, 3}, 2, -80.0);
  const auto opt = brute_force_oracle(g, 2, -80.0);
  EXPECT_EQ(topk.coverage, 7);
  EXPECT_EQ(marginal.coverage, 7);
  EXPECT_EQ(opt.coverage, 7);
  std::set<int> a(topk.deployment.codebooks[0].beam_indices.begin(), topk.deployment.codebooks[0].beam_indices.end());
  std::set<int> b(marginal.deployment.codebooks[0].beam_indices.begin(), marginal.deployment.codebooks[0].beam_indices.end());
  EXPECT_EQ(a, b);
}

TEST(Solvers, FullCandidateSetReturned) {
  const GainMatrix g = random_gains(2, 10, 6, 7);
  const auto r = greedy_marginal(g, {5, 1, 3}, 3, -70.0);
  for (const auto& cb : r.deployment.codebooks) {
    std::set<int> s(cb.beam_indices.begin(), cb.beam_indices.end());
    EXPECT_EQ(s, (std::set<int>{1, 3, 5}));
  }
  const std::vector<Codebook> experts{{{0, 1}, "c1"}, {{2}, "c2"}};
  const auto t = greedy_topk(g, experts, 3, -70.0);
  for (const auto& cb : t.deployment.codebooks) EXPECT_EQ(cb.size(), 3u);
  EXPECT_THROW(greedy_topk(g, experts, 4, -70.0), std::invalid_argument);
  EXPECT_THROW(greedy_marginal(g, {1, 2}, 3, -70.0), std::invalid_argument);
  EXPECT_THROW(greedy_marginal(g, {1, 1, 2}, 2, -70.0), std::invalid_argument);
}

TEST(Solvers, TopkRanksBySweepCounts) {
  GainMatrix g = GainMatrix::zeros(1, 6, 4);
  for (double& v : g.power_dbm) v = -100.0;
  // beam 3 serves 3 UEs, beam 0 serves 2, beam 2 serves 1, beam 1 none.
  g.at(0, 0, 3) = g.at(0, 1, 3) = g.at(0, 2, 3) = -60.0;
  g.at(0, 3, 0) = g.at(0, 4, 0) = -60.0;
  g.at(0, 5, 2) = -60.0;
  const std::vector<Codebook> experts{{{0, 1}, "c1"}, {{2, 3}, "c2"}};
  const auto r = greedy_topk(g, experts, 2, -80.0);
  EXPECT_EQ(r.deployment.codebooks[0].beam_indices, (std::vector<int>{3, 0}));
  EXPECT_EQ(r.coverage, 5);
}

TEST(Solvers, RandomCodebook) {
  const auto d = random_codebook(144, 24, 9, 3);
  ASSERT_EQ(d.codebooks.size(), 3u);
  for (const auto& cb : d.codebooks) EXPECT_NO_THROW(cb.validate(144, 24));
  EXPECT_NE(d.codebooks[0].beam_indices, d.codebooks[1].beam_indices);
  EXPECT_EQ(random_codebook(144, 24, 9, 3).codebooks[2].beam_indices, d.codebooks[2].beam_indices);
  const auto full = random_codebook(6, 6, 1, 1);
  EXPECT_EQ(std::set<int>(full.codebooks[0].beam_indices.begin(), full.codebooks[0].beam_indices.end()).size(), 6u);
  EXPECT_THROW(random_codebook(6, 7, 1, 1), std::invalid_argument);
}

TEST(Solvers, RandomSubsetsAreUniform) {
  std::map<std::set<int>, int> freq;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto d = random_codebook(6, 2, static_cast<std::uint64_t>(i), 1);
    ++freq[std::set<int>(d.codebooks[0].beam_indices.begin(), d.codebooks[0].beam_indices.end())];
  }
  ASSERT_EQ(freq.size(), 15u);
  const double p = 1.0 / 15.0, sigma = std::sqrt(p * (1 - p) / draws);
  for (const auto& [s, c] : freq) EXPECT_NEAR(c / double(draws), p, 3.0 * sigma);
}

TEST(Solvers, BruteForceAgainstBitsetOracle) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GainMatrix g = random_gains(1, 20, 6, seed);
    const auto r = brute_force_oracle(g, 2, -60.0);
    ASSERT_EQ(r.coverage, bitset_optimum(g, 2, -60.0));
    ASSERT_EQ(r.coverage, testing::scan_coverage(g, r.deployment, -60.0));
  }
}

TEST(Solvers, BruteForceEdgeCases) {
  const GainMatrix g = random_gains(1, 20, 6, 3);
  EXPECT_EQ(brute_force_oracle(g, 6, -60.0).coverage, coverage(g, single({0, 1, 2, 3, 4, 5}), -60.0));
  EXPECT_EQ(brute_force_oracle(g, 3, 0.0).coverage, 0);
  EXPECT_THROW(brute_force_oracle(random_gains(3, 5, 144, 1), 24, -60.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(binomial(6, 2), 15.0);
  EXPECT_NEAR(binomial(144, 24), 2.0e27, 1e27);
}

TEST(Solvers, OracleDominatesAndGreedyGuarantee) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    CounterRng rng(seed, "test/solvers");
    const int m = 4 + static_cast<int>(rng.below(9));
    const int n = 1 + static_cast<int>(rng.below(std::min(4, m)));
    const GainMatrix g = random_gains(1, 10 + static_cast<int>(rng.below(41)), m, seed);
    const double tau = -62.0;
    std::vector<int> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    const auto opt = brute_force_oracle(g, n, tau);
    const auto gm = greedy_marginal(g, all, n, tau);
    const auto rnd = random_baseline(g, n, tau, seed);
    ASSERT_GE(opt.coverage, gm.coverage);
    ASSERT_GE(opt.coverage, rnd.coverage);
    ASSERT_GE(gm.coverage, (1.0 - 1.0 / std::numbers::e) * opt.coverage - 1e-9);
    expect_valid(opt, m, n);
    expect_valid(gm, m, n);
    expect_valid(rnd, m, n);
  }
}

TEST(Solvers, JsonShape) {
  const GainMatrix g = random_gains(2, 10, 6, 1);
  const auto j = to_json(random_baseline(g, 2, -60.0, 4));
  EXPECT_EQ(j.at("label"), "random");
  EXPECT_EQ(j.at("codebooks").size(), 2u);
  EXPECT_EQ(j.at("codebooks")[0].size(), 2u);
}

}  // namespace
}  // namespace ssbcb
