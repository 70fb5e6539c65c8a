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

#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "ssbcb/cellsearch.hpp"
#include "ssbcb/solvers.hpp"
#include "support.hpp"

namespace ssbcb {
namespace {

using testing::random_gains;
using testing::scan_coverage;
using testing::single;

TEST(CellSearch, UnreachableThreshold) {
  const GainMatrix g = random_gains(3, 20, 10, 1);
  const auto cb = Codebook{{0, 1, 2}, "x"};
  const auto a = associate(g, Deployment::uniform(cb, 3), 0.0);
  EXPECT_EQ(a.covered_count, 0);
  for (int u = 0; u < 20; ++u) EXPECT_GE(a.best_sector[static_cast<std::size_t>(u)], 0);
  EXPECT_EQ(coverage(g, Deployment::uniform(cb, 3), std::numeric_limits<double>::infinity()), 0);

  GainMatrix floor = GainMatrix::zeros(1, 2, 2);
  for (double& v : floor.power_dbm) v = kPowerFloorDbm;
  const auto f = associate(floor, single({0, 1}), -1000.0);
  EXPECT_EQ(f.best_sector[0], -1);
  EXPECT_EQ(f.best_beam[1], -1);
  EXPECT_EQ(f.covered_count, 2);  // -400 >= -1000
}

TEST(CellSearch, DirectMax) {
  GainMatrix g = GainMatrix::zeros(1, 1, 3);
  g.at(0, 0, 0) = -70.0;
  g.at(0, 0, 1) = -60.0;
  g.at(0, 0, 2) = -90.0;
  const auto a = associate(g, single({0, 1, 2}), -80.0);
  EXPECT_EQ(a.best_beam[0], 1);
  EXPECT_EQ(a.best_sector[0], 0);
  EXPECT_DOUBLE_EQ(a.best_power_dbm[0], -60.0);
  EXPECT_EQ(a.covered[0], 1);
}

TEST(CellSearch, TieBreaking) {
  GainMatrix g = GainMatrix::zeros(2, 1, 4);
  for (double& v : g.power_dbm) v = -70.0;
  const auto a = associate(g, Deployment{{Codebook{{3, 1}, "a"}, Codebook{{0, 2}, "b"}}}, -80.0);
  EXPECT_EQ(a.best_sector[0], 0);
  EXPECT_EQ(a.best_beam[0], 1);
}

TEST(CellSearch, AssociateMatchesPerUeScan) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const GainMatrix g = random_gains(2, 6, 4, seed);
    std::vector<double> all = g.power_dbm;
    std::nth_element(all.begin(), all.begin() + static_cast<long>(all.size() / 2), all.end());
    const double tau = all[all.size() / 2];
    const Deployment d{{Codebook{{0, 2}, "a"}, Codebook{{1, 3}, "b"}}};
    const auto a = associate(g, d, tau);
    for (int u = 0; u < 6; ++u) {
      int bs = -1, bb = -1;
      double bp = -1e300;
      for (int s = 0; s < 2; ++s)
        for (int b : d.codebooks[static_cast<std::size_t>(s)].beam_indices)
          if (g.at(s, u, b) > bp) {
            bp = g.at(s, u, b);
            bs = s;
            bb = b;
          }
      ASSERT_EQ(a.best_sector[static_cast<std::size_t>(u)], bs);
      ASSERT_EQ(a.best_beam[static_cast<std::size_t>(u)], bb);
      ASSERT_EQ(a.covered[static_cast<std::size_t>(u)], bp >= tau ? 1 : 0);
    }
    ASSERT_EQ(a.covered_count, scan_coverage(g, d, tau));
    ASSERT_EQ(coverage(g, d, tau), a.covered_count);
  }
}

TEST(CellSearch, EmptyDeploymentRejected) {
  const GainMatrix g = random_gains(1, 3, 3, 2);
  EXPECT_THROW(associate(g, Deployment{}, -80.0), std::invalid_argument);
  EXPECT_THROW(associate(g, single({}), -80.0), std::invalid_argument);
  EXPECT_THROW(coverage(g, single({5}), -80.0), std::invalid_argument);
  EXPECT_THROW(coverage(g, Deployment::uniform(Codebook{{0}, "x"}, 2), -80.0), std::invalid_argument);
}

TEST(CellSearch, DisjointCoverage) {
  const GainMatrix g = testing::boolean_gains({{0}, {1}, {2}}, 3);
  EXPECT_EQ(coverage(g, single({0, 1, 2}), -80.0), 3);
}

TEST(CellSearch, CoverageEqualsEnumerationOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GainMatrix g = random_gains(1, 8, 6, seed);
    std::vector<int> idx{0, 1};
    int n = 0;
    do {
      ++n;
      ASSERT_EQ(coverage(g, single(idx), -75.0), scan_coverage(g, single(idx), -75.0));
    } while (next_combination(idx, 6));
    ASSERT_EQ(n, 15);
  }
}

TEST(CellSearch, PerSectorCoverage) {
  GainMatrix g = GainMatrix::zeros(3, 4, 2);
  for (double& v : g.power_dbm) v = -100.0;
  for (int u = 0; u < 4; ++u) g.at(0, u, 0) = -60.0;
  const auto d = Deployment::uniform(Codebook{{0, 1}, "x"}, 3);
  EXPECT_EQ(per_sector_coverage(g, d, -80.0), (std::vector<int>{4, 0, 0}));

  // Hand-set two-sector example.
  GainMatrix h = GainMatrix::zeros(2, 4, 2);
  const double p[2][4][2] = {{{-60, -90}, {-85, -95}, {-70, -70}, {-99, -99}},
                             {{-65, -91}, {-75, -70}, {-70, -69}, {-99, -82}}};
  for (int s = 0; s < 2; ++s)
    for (int u = 0; u < 4; ++u)
      for (int b = 0; b < 2; ++b) h.at(s, u, b) = p[s][u][b];
  // UE0 -> s0 (-60), UE1 -> s1 b1 (-70), UE2 -> s1 b1 (-69), UE3 -> s1 b1 (-82, below).
  EXPECT_EQ(per_sector_coverage(h, Deployment::uniform(Codebook{{0, 1}, "x"}, 2), -80.0), (std::vector<int>{1, 2}));
}

TEST(CellSearch, PartitionProperty) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const GainMatrix g = random_gains(3, 30, 12, seed);
    CounterRng rng(seed, "test/partition");
    Deployment d;
    for (int s = 0; s < 3; ++s) d.codebooks.push_back({sample_without_replacement(12, 4, rng), "r"});
    const auto ps = per_sector_coverage(g, d, -65.0);
    ASSERT_EQ(ps[0] + ps[1] + ps[2], coverage(g, d, -65.0));
  }
}

TEST(CellSearch, ObservationLayout) {
  GainMatrix g = GainMatrix::zeros(2, 3, 4);
  for (double& v : g.power_dbm) v = -100.0;
  g.at(0, 0, 3) = -60.0;
  g.at(0, 1, 3) = -62.0;
  g.at(0, 2, 3) = -85.0;  // below tau
  const std::vector<Codebook> experts{{{2, 3}, "c1"}, {{0, 1}, "c2"}};
  const auto obs = observe(g, experts, -80.0);
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[0].counts, (std::vector<int>{0, 2, 0, 0}));
  EXPECT_EQ(obs[1].counts, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(obs[0].normalized[1], 2.0 / 3.0);
}

TEST(CellSearch, DefaultObservationLength) {
  const GainMatrix g = random_gains(3, 50, 144, 4);
  std::vector<Codebook> experts(2);
  for (int i = 0; i < 24; ++i) {
    experts[0].beam_indices.push_back(i);
    experts[1].beam_indices.push_back(24 + i);
  }
  const auto sw = sweep_experts(g, experts, -70.0);
  for (const auto& o : sw.observations) EXPECT_EQ(o.counts.size(), 48u);
  // Each sweep's counts add up to that sweep's coverage.
  for (std::size_t e = 0; e < 2; ++e) {
    int total = 0;
    for (const auto& o : sw.observations)
      for (std::size_t j = 0; j < 24; ++j) total += o.counts[e * 24 + j];
    EXPECT_EQ(total, coverage(g, Deployment::uniform(experts[e], 3), -70.0));
  }
}

TEST(CellSearch, ZeroUesGiveZeroObservations) {
  const GainMatrix g = GainMatrix::zeros(3, 0, 10);
  const auto obs = observe(g, {Codebook{{0, 1}, "c1"}}, -80.0);
  for (const auto& o : obs) {
    for (int c : o.counts) EXPECT_EQ(c, 0);
    for (double v : o.normalized) EXPECT_EQ(v, 0.0);
  }
}

TEST(CellSearch, MonotoneAndSubmodularSingleSector) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const GainMatrix g = random_gains(1, 15, 10, seed);
    CounterRng rng(seed, "test/submod");
    const auto perm = sample_without_replacement(10, 10, rng);
    const std::vector<int> A(perm.begin(), perm.begin() + 2), B(perm.begin(), perm.begin() + 5);
    const int x = perm[7];
    auto plus = [&](std::vector<int> s) {
      s.push_back(x);
      return s;
    };
    const double tau = -60.0;
    const int fa = coverage(g, single(A), tau), fb = coverage(g, single(B), tau);
    ASSERT_LE(fa, fb);
    ASSERT_GE(coverage(g, single(plus(A)), tau) - fa, coverage(g, single(plus(B)), tau) - fb);
  }
}

TEST(CellSearch, AssociationCsv) {
  GainMatrix g = GainMatrix::zeros(1, 2, 2);
  g.at(0, 0, 0) = -60.5;
  g.at(0, 0, 1) = -70.0;
  g.at(0, 1, 0) = -99.0;
  g.at(0, 1, 1) = -90.0;
  std::ostringstream os;
  write_association_csv(os, associate(g, single({0, 1}), -80.0));
  EXPECT_EQ(os.str(), "ue_id,sector,beam,power_dbm,covered\n0,0,0,-60.5,1\n1,0,1,-90,0\n");
}

TEST(CellSearch, CalibrateTau) {
  GainMatrix g = GainMatrix::zeros(1, 10, 1);
  for (int u = 0; u < 10; ++u) g.at(0, u, 0) = -50.0 - u;
  const Codebook cb{{0}, "c1"};
  const double tau = calibrate_tau({g}, cb, 0.4);
  EXPECT_DOUBLE_EQ(tau, -53.0);
  EXPECT_EQ(coverage(g, single({0}), tau), 4);
  EXPECT_THROW(calibrate_tau({g}, cb, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace ssbcb
