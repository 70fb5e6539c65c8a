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

// Cell search: each UE picks the strongest deployed (sector, beam) pair and
// associates when that power reaches the detection threshold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssbcb/beams.hpp"
#include "ssbcb/propagation.hpp"
#include "ssbcb/util.hpp"

namespace ssbcb {

// One codebook per sector.
struct Deployment {
  std::vector<Codebook> codebooks;

  static Deployment uniform(const Codebook& cb, int num_sectors) {
    return {std::vector<Codebook>(static_cast<std::size_t>(num_sectors), cb)};
  }
  int num_sectors() const { return static_cast<int>(codebooks.size()); }
};

struct AssociationResult {
  std::vector<int> best_sector;  // -1 when nothing rises above the power floor
  std::vector<int> best_beam;    // pool index, -1 as above
  std::vector<double> best_power_dbm;
  std::vector<std::uint8_t> covered;
  int covered_count = 0;

  int num_ues() const { return static_cast<int>(covered.size()); }
};

namespace detail {

inline void check_deployment(const GainMatrix& gains, const Deployment& dep) {
  if (dep.codebooks.empty()) throw std::invalid_argument("cell search: empty deployment");
  if (dep.num_sectors() != gains.num_sectors)
    throw std::invalid_argument("cell search: deployment has " + std::to_string(dep.num_sectors()) +
                                " sectors, gain matrix has " + std::to_string(gains.num_sectors));
  bool any = false;
  for (const auto& cb : dep.codebooks) {
    for (int b : cb.beam_indices)
      if (b < 0 || b >= gains.num_beams) throw std::invalid_argument("cell search: beam index out of range");
    any = any || !cb.beam_indices.empty();
  }
  if (!any) throw std::invalid_argument("cell search: empty deployment");
}

}  // namespace detail

// Ties on power go to the lower sector index, then the lower pool index.
inline AssociationResult associate(const GainMatrix& gains, const Deployment& dep, double tau) {
  detail::check_deployment(gains, dep);
  const auto U = static_cast<std::size_t>(gains.num_ues);
  AssociationResult r;
  r.best_sector.assign(U, -1);
  r.best_beam.assign(U, -1);
  r.best_power_dbm.assign(U, kPowerFloorDbm);
  r.covered.assign(U, 0);
  for (int u = 0; u < gains.num_ues; ++u) {
    const auto ui = static_cast<std::size_t>(u);
    int bs = -1, bb = -1;
    double bp = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < gains.num_sectors; ++s) {
      const auto row = gains.row(s, u);
      for (int b : dep.codebooks[static_cast<std::size_t>(s)].beam_indices) {
        const double p = row[static_cast<std::size_t>(b)];
        if (p > bp || (p == bp && s == bs && b < bb)) {
          bp = p;
          bs = s;
          bb = b;
        }
      }
    }
    r.best_power_dbm[ui] = std::max(bp, kPowerFloorDbm);
    if (bp > kPowerFloorDbm) {
      r.best_sector[ui] = bs;
      r.best_beam[ui] = bb;
    }
    if (bp >= tau) {
      r.covered[ui] = 1;
      ++r.covered_count;
    }
  }
  return r;
}

inline int coverage(const GainMatrix& gains, const Deployment& dep, double tau) {
  detail::check_deployment(gains, dep);
  int count = 0;
  for (int u = 0; u < gains.num_ues; ++u) {
    bool hit = false;
    for (int s = 0; s < gains.num_sectors && !hit; ++s) {
      const auto row = gains.row(s, u);
      for (int b : dep.codebooks[static_cast<std::size_t>(s)].beam_indices)
        if (row[static_cast<std::size_t>(b)] >= tau) {
          hit = true;
          break;
        }
    }
    count += hit ? 1 : 0;
  }
  return count;
}

// Covered UEs counted at their serving sector; sums to coverage().
inline std::vector<int> per_sector_coverage(const AssociationResult& assoc, int num_sectors) {
  std::vector<int> out(static_cast<std::size_t>(num_sectors), 0);
  for (int u = 0; u < assoc.num_ues(); ++u)
    if (assoc.covered[static_cast<std::size_t>(u)]) ++out[static_cast<std::size_t>(assoc.best_sector[static_cast<std::size_t>(u)])];
  return out;
}

inline std::vector<int> per_sector_coverage(const GainMatrix& gains, const Deployment& dep, double tau) {
  return per_sector_coverage(associate(gains, dep, tau), gains.num_sectors);
}

// Per-sector input to the policy: associated-UE counts for every beam of
// every expert codebook, concatenated in expert order then codebook order.
struct Observation {
  int sector = 0;
  std::vector<int> counts;
  std::vector<double> normalized;  // counts / total UEs
};

// Result of sweeping each expert codebook on all sectors at once, every
// sweep starting from unassociated UEs.
struct ExpertSweep {
  std::vector<AssociationResult> associations;       // one per expert codebook
  std::vector<std::vector<int>> per_sector_counts;   // [expert][sector]
  std::vector<Observation> observations;             // one per sector
};

inline ExpertSweep sweep_experts(const GainMatrix& gains, const std::vector<Codebook>& experts, double tau) {
  if (experts.empty()) throw std::invalid_argument("sweep_experts: need at least one expert codebook");
  const auto S = static_cast<std::size_t>(gains.num_sectors);
  std::size_t obs_len = 0;
  for (const auto& cb : experts) obs_len += cb.size();

  ExpertSweep out;
  out.observations.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    out.observations[s].sector = static_cast<int>(s);
    out.observations[s].counts.assign(obs_len, 0);
  }
  std::size_t base = 0;
  for (const auto& cb : experts) {
    std::vector<int> position(static_cast<std::size_t>(gains.num_beams), -1);
    for (std::size_t j = 0; j < cb.size(); ++j) position[static_cast<std::size_t>(cb.beam_indices[j])] = static_cast<int>(j);
    auto assoc = associate(gains, Deployment::uniform(cb, gains.num_sectors), tau);
    for (int u = 0; u < assoc.num_ues(); ++u) {
      const auto ui = static_cast<std::size_t>(u);
      if (!assoc.covered[ui]) continue;
      const auto s = static_cast<std::size_t>(assoc.best_sector[ui]);
      const auto j = static_cast<std::size_t>(position[static_cast<std::size_t>(assoc.best_beam[ui])]);
      ++out.observations[s].counts[base + j];
    }
    out.per_sector_counts.push_back(per_sector_coverage(assoc, gains.num_sectors));
    out.associations.push_back(std::move(assoc));
    base += cb.size();
  }
  const double scale = gains.num_ues > 0 ? 1.0 / gains.num_ues : 0.0;
  for (auto& o : out.observations) {
    o.normalized.resize(obs_len);
    for (std::size_t i = 0; i < obs_len; ++i) o.normalized[i] = o.counts[i] * scale;
  }
  return out;
}

inline std::vector<Observation> observe(const GainMatrix& gains, const std::vector<Codebook>& experts, double tau) {
  return sweep_experts(gains, experts, tau).observations;
}

// ue_id,sector,beam,power_dbm,covered
inline void write_association_csv(std::ostream& os, const AssociationResult& a) {
  os << "ue_id,sector,beam,power_dbm,covered\n";
  for (int u = 0; u < a.num_ues(); ++u) {
    const auto ui = static_cast<std::size_t>(u);
    os << u << ',' << a.best_sector[ui] << ',' << a.best_beam[ui] << ',' << format_double(a.best_power_dbm[ui]) << ','
       << static_cast<int>(a.covered[ui]) << '\n';
  }
}

// Threshold at which `cb`, deployed on every sector, covers
// `target_fraction` of the UEs pooled across `gain_matrices`: the k-th
// largest best-beam power with k = round(target * total UEs).
inline double calibrate_tau(const std::vector<GainMatrix>& gain_matrices, const Codebook& cb, double target_fraction) {
  if (!(target_fraction > 0.0 && target_fraction <= 1.0))
    throw std::invalid_argument("calibrate_tau: target fraction must lie in (0, 1]");
  std::vector<double> best;
  for (const auto& gm : gain_matrices) {
    const auto a = associate(gm, Deployment::uniform(cb, gm.num_sectors), -std::numeric_limits<double>::infinity());
    best.insert(best.end(), a.best_power_dbm.begin(), a.best_power_dbm.end());
  }
  if (best.empty()) throw std::invalid_argument("calibrate_tau: no UEs");
  std::sort(best.begin(), best.end(), std::greater<>());
  auto k = static_cast<std::size_t>(std::llround(target_fraction * static_cast<double>(best.size())));
  k = std::clamp<std::size_t>(k, 1, best.size());
  return best[k - 1];
}

}  // namespace ssbcb
