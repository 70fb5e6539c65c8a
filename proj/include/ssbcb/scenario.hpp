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

// Single-site, multi-sector deployments with clustered UE hotspots.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbcb/rng.hpp"

namespace ssbcb {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double horizontal_norm() const { return std::hypot(x, y); }
};

inline double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0) w += 360.0;
  return w;
}

// Absolute angular distance on the circle, in [0, 180].
inline double angular_distance_deg(double a, double b) {
  const double d = wrap_degrees(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

struct SiteLayout {
  Vec3 site_position{};                       // ground point below the mast
  std::vector<double> sector_azimuths{0.0, 120.0, 240.0};
  double sector_downtilt = 6.0;               // mechanical, degrees below horizon
  double bs_height = 25.0;
  double isd = 200.0;                         // deployment disc radius is isd/2

  double cell_radius() const { return isd / 2.0; }
  int num_sectors() const { return static_cast<int>(sector_azimuths.size()); }
  Vec3 antenna_position() const { return site_position + Vec3{0.0, 0.0, bs_height}; }

  void validate() const {
    if (sector_azimuths.empty()) throw std::invalid_argument("SiteLayout: need at least one sector");
    if (!(isd > 0.0)) throw std::invalid_argument("SiteLayout: isd must be positive");
    for (std::size_t i = 0; i < sector_azimuths.size(); ++i)
      for (std::size_t j = i + 1; j < sector_azimuths.size(); ++j)
        if (angular_distance_deg(sector_azimuths[i], sector_azimuths[j]) < 1e-9)
          throw std::invalid_argument("SiteLayout: sector azimuths must be distinct modulo 360");
  }
};

struct ScenarioConfig {
  int num_ues = 2000;
  int num_clusters = 5;
  std::optional<double> cluster_stddev;  // unset: isd / 20
  double clustered_fraction = 0.7;       // share of UEs drawn around cluster centers
  double indoor_fraction = 0.8;
  double ue_height = 1.5;
  std::uint64_t seed = 0;

  double resolved_cluster_stddev(const SiteLayout& layout) const {
    return cluster_stddev.value_or(layout.isd / 20.0);
  }
};

struct UePopulation {
  std::vector<Vec3> positions;
  std::vector<std::uint8_t> indoor;
  std::vector<int> cluster_ids;  // -1: uniform background

  std::size_t size() const { return positions.size(); }
  std::size_t indoor_count() const {
    return static_cast<std::size_t>(std::count(indoor.begin(), indoor.end(), std::uint8_t{1}));
  }
};

struct Scenario {
  SiteLayout layout;
  UePopulation ues;
  std::vector<Vec3> cluster_centers;
};

namespace detail {

inline Vec3 uniform_in_disc(const Vec3& center, double radius, double z, CounterRng& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + r * std::cos(phi), center.y + r * std::sin(phi), z};
}

inline bool inside_disc(const Vec3& p, const Vec3& center, double radius) {
  return std::hypot(p.x - center.x, p.y - center.y) <= radius;
}

}  // namespace detail

// Draw order (each from its own stream of cfg.seed): cluster centers, then
// cluster members, then uniform background, then the indoor permutation.
// Gaussian members landing outside the disc are redrawn.
inline Scenario generate_scenario(const ScenarioConfig& cfg, const SiteLayout& layout) {
  layout.validate();
  if (cfg.num_ues <= 0) throw std::invalid_argument("generate_scenario: num_ues must be positive");
  if (cfg.num_clusters < 0) throw std::invalid_argument("generate_scenario: num_clusters must be >= 0");
  if (!(cfg.indoor_fraction >= 0.0 && cfg.indoor_fraction <= 1.0))
    throw std::invalid_argument("generate_scenario: indoor_fraction must lie in [0, 1]");
  if (!(cfg.clustered_fraction >= 0.0 && cfg.clustered_fraction <= 1.0))
    throw std::invalid_argument("generate_scenario: clustered_fraction must lie in [0, 1]");
  const double stddev = cfg.resolved_cluster_stddev(layout);
  if (cfg.num_clusters > 0 && !(stddev > 0.0))
    throw std::invalid_argument("generate_scenario: cluster_stddev must be positive when clusters are used");

  const double radius = layout.cell_radius();
  const Vec3 center = layout.site_position;
  const double z = layout.site_position.z + cfg.ue_height;
  const auto num_ues = static_cast<std::size_t>(cfg.num_ues);

  Scenario out;
  out.layout = layout;
  auto& ues = out.ues;
  ues.positions.reserve(num_ues);
  ues.cluster_ids.reserve(num_ues);

  CounterRng center_rng(cfg.seed, "scenario/centers");
  for (int c = 0; c < cfg.num_clusters; ++c)
    out.cluster_centers.push_back(detail::uniform_in_disc(center, radius, z, center_rng));

  const std::size_t clustered =
      cfg.num_clusters > 0
          ? static_cast<std::size_t>(std::llround(cfg.clustered_fraction * static_cast<double>(num_ues)))
          : 0;
  CounterRng member_rng(cfg.seed, "scenario/members");
  for (std::size_t i = 0; i < clustered; ++i) {
    const int cid = static_cast<int>(member_rng.below(static_cast<std::uint64_t>(cfg.num_clusters)));
    const Vec3& cc = out.cluster_centers[static_cast<std::size_t>(cid)];
    Vec3 p = cc;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec3 q{cc.x + stddev * member_rng.normal(), cc.y + stddev * member_rng.normal(), z};
      if (detail::inside_disc(q, center, radius)) {
        p = q;
        break;
      }
    }
    ues.positions.push_back(p);
    ues.cluster_ids.push_back(cid);
  }

  CounterRng background_rng(cfg.seed, "scenario/background");
  for (std::size_t i = clustered; i < num_ues; ++i) {
    ues.positions.push_back(detail::uniform_in_disc(center, radius, z, background_rng));
    ues.cluster_ids.push_back(-1);
  }

  // Exact indoor count: permute, then mark the first k.
  const auto indoor_count =
      static_cast<std::size_t>(std::llround(cfg.indoor_fraction * static_cast<double>(num_ues)));
  std::vector<std::size_t> order(num_ues);
  for (std::size_t i = 0; i < num_ues; ++i) order[i] = i;
  CounterRng indoor_rng(cfg.seed, "scenario/indoor");
  indoor_rng.shuffle(std::span<std::size_t>(order));
  ues.indoor.assign(num_ues, 0);
  for (std::size_t i = 0; i < indoor_count; ++i) ues.indoor[order[i]] = 1;
  return out;
}

// Sector whose boresight is angularly closest to the position's azimuth
// seen from the site. Ties go to the lower index.
inline int sector_of(const Vec3& position, const SiteLayout& layout) {
  const Vec3 d = position - layout.site_position;
  if (d.horizontal_norm() == 0.0) throw std::invalid_argument("sector_of: position is on the site axis");
  const double az = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
  int best = 0;
  double best_dist = angular_distance_deg(az, layout.sector_azimuths[0]);
  for (int s = 1; s < layout.num_sectors(); ++s) {
    const double dist = angular_distance_deg(az, layout.sector_azimuths[static_cast<std::size_t>(s)]);
    if (dist < best_dist) {
      best = s;
      best_dist = dist;
    }
  }
  return best;
}

inline nlohmann::json to_json(const SiteLayout& layout) {
  return {{"site_position", {layout.site_position.x, layout.site_position.y, layout.site_position.z}},
          {"sector_azimuths", layout.sector_azimuths},
          {"sector_downtilt", layout.sector_downtilt},
          {"bs_height", layout.bs_height},
          {"isd", layout.isd}};
}

inline SiteLayout layout_from_json(const nlohmann::json& j) {
  SiteLayout l;
  const auto& p = j.at("site_position");
  l.site_position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
  l.sector_azimuths = j.at("sector_azimuths").get<std::vector<double>>();
  l.sector_downtilt = j.at("sector_downtilt").get<double>();
  l.bs_height = j.at("bs_height").get<double>();
  l.isd = j.at("isd").get<double>();
  l.validate();
  return l;
}

// One document: layout block, cluster centers, then one record per UE as
// [x, y, z, indoor, cluster_id].
inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json ues = nlohmann::json::array();
  for (std::size_t i = 0; i < sc.ues.size(); ++i) {
    const auto& p = sc.ues.positions[i];
    ues.push_back({p.x, p.y, p.z, static_cast<int>(sc.ues.indoor[i]), sc.ues.cluster_ids[i]});
  }
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : sc.cluster_centers) centers.push_back({c.x, c.y, c.z});
  return {{"layout", to_json(sc.layout)}, {"cluster_centers", centers}, {"ues", ues}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.layout = layout_from_json(j.at("layout"));
  for (const auto& c : j.at("cluster_centers"))
    sc.cluster_centers.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
  for (const auto& r : j.at("ues")) {
    sc.ues.positions.push_back({r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()});
    sc.ues.indoor.push_back(static_cast<std::uint8_t>(r.at(3).get<int>() != 0));
    sc.ues.cluster_ids.push_back(r.at(4).get<int>());
  }
  return sc;
}

}  // namespace ssbcb
