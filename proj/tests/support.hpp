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

// Shared fixtures and independent reference implementations for the tests.

#include <cstdint>
#include <limits>
#include <vector>

#include "ssbcb/cellsearch.hpp"
#include "ssbcb/propagation.hpp"
#include "ssbcb/rng.hpp"

namespace ssbcb::testing {

// Uniform random dBm entries in [lo, hi].
inline GainMatrix random_gains(int sectors, int ues, int beams, std::uint64_t seed, double lo = -100.0,
                               double hi = -50.0) {
  GainMatrix g = GainMatrix::zeros(sectors, ues, beams, -85.0);
  CounterRng rng(seed, "test/gains");
  for (double& v : g.power_dbm) v = rng.uniform(lo, hi);
  return g;
}

// Coverage-set style instance: entries are either `on` or `off` dBm.
inline GainMatrix boolean_gains(const std::vector<std::vector<int>>& covers, int num_ues, double on = -60.0,
                                double off = -120.0) {
  GainMatrix g = GainMatrix::zeros(1, num_ues, static_cast<int>(covers.size()), -85.0);
  for (double& v : g.power_dbm) v = off;
  for (std::size_t b = 0; b < covers.size(); ++b)
    for (int u : covers[b]) g.at(0, u, static_cast<int>(b)) = on;
  return g;
}

// Per-UE scan: the UE is covered iff some deployed (sector, beam) reaches tau.
inline int scan_coverage(const GainMatrix& g, const Deployment& d, double tau) {
  int covered = 0;
  for (int u = 0; u < g.num_ues; ++u) {
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < g.num_sectors; ++s)
      for (int b : d.codebooks[static_cast<std::size_t>(s)].beam_indices) best = std::max(best, g.at(s, u, b));
    covered += best >= tau ? 1 : 0;
  }
  return covered;
}

inline Deployment single(std::vector<int> beams) { return {{Codebook{std::move(beams), "t"}}}; }

}  // namespace ssbcb::testing
