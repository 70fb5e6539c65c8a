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

// Expert-style beam pool: steered DFT beams on a dual-polarized planar array.
//
// Element ordering in every length-2*e1*e2 vector is
//   index = pol * (e1 * e2) + row * e2 + col
// with rows along the panel's vertical axis and columns along its
// horizontal axis. Angles are panel-local degrees: azimuth positive toward
// the panel's left, elevation positive above the panel normal.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbcb/error.hpp"

namespace ssbcb {

using cplx = std::complex<double>;

struct ArrayGeometry {
  int e1 = 8;                   // rows (elevation)
  int e2 = 8;                   // columns (azimuth)
  double element_spacing = 0.5; // wavelengths
  double carrier_frequency = 28e9;

  int elements_per_polarization() const { return e1 * e2; }
  int size() const { return 2 * e1 * e2; }
  double wavelength() const { return 299792458.0 / carrier_frequency; }

  void validate() const {
    if (e1 < 1 || e2 < 1) throw std::invalid_argument("ArrayGeometry: e1 and e2 must be >= 1");
    if (!(element_spacing > 0.0)) throw std::invalid_argument("ArrayGeometry: element spacing must be positive");
    if (!(carrier_frequency > 0.0)) throw std::invalid_argument("ArrayGeometry: carrier frequency must be positive");
  }
  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

enum class BeamwidthClass { kNarrow, kWide };

inline const char* to_string(BeamwidthClass c) { return c == BeamwidthClass::kNarrow ? "narrow" : "wide"; }

inline BeamwidthClass beamwidth_class_from_string(const std::string& s) {
  if (s == "narrow") return BeamwidthClass::kNarrow;
  if (s == "wide") return BeamwidthClass::kWide;
  throw std::invalid_argument("unknown beamwidth class '" + s + "'");
}

// Kronecker factors w = pol (x) rows (x) cols. Present for synthesized beams;
// the gain-matrix builder uses them to skip the full inner product.
struct SeparableWeights {
  std::vector<cplx> pol;
  std::vector<cplx> rows;
  std::vector<cplx> cols;
};

struct PrecodingVector {
  std::vector<cplx> weights;
  double steer_azimuth = 0.0;
  double steer_elevation = 0.0;
  BeamwidthClass beamwidth_class = BeamwidthClass::kNarrow;
  int family_id = 0;
  std::optional<SeparableWeights> factors;
};

struct Codebook {
  std::vector<int> beam_indices;
  std::string label;

  std::size_t size() const { return beam_indices.size(); }

  // Exactly n distinct indices, each < m.
  void validate(int m, int n) const {
    if (static_cast<int>(beam_indices.size()) != n)
      throw std::invalid_argument("Codebook '" + label + "': expected " + std::to_string(n) + " beams, got " +
                                  std::to_string(beam_indices.size()));
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    for (int b : beam_indices) {
      if (b < 0 || b >= m) throw std::invalid_argument("Codebook '" + label + "': beam index out of range");
      if (seen[static_cast<std::size_t>(b)]) throw std::invalid_argument("Codebook '" + label + "': duplicate beam");
      seen[static_cast<std::size_t>(b)] = 1;
    }
  }
};

struct BeamPool {
  std::vector<PrecodingVector> beams;
  ArrayGeometry geometry;

  int size() const { return static_cast<int>(beams.size()); }
};

// Spatial frequencies of a panel-local direction.
struct SpatialFrequency {
  double horizontal;  // cos(el) sin(az)
  double vertical;    // sin(el)
};

inline SpatialFrequency spatial_frequency(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  return {std::cos(el) * std::sin(az), std::sin(el)};
}

// Unit-modulus linear-array phases exp(j 2 pi d k f), k = 0..count-1.
inline std::vector<cplx> linear_phases(int count, double spacing, double frequency) {
  std::vector<cplx> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double phase = 2.0 * std::numbers::pi * spacing * k * frequency;
    out[static_cast<std::size_t>(k)] = {std::cos(phase), std::sin(phase)};
  }
  return out;
}

inline std::vector<cplx> expand(const SeparableWeights& f) {
  std::vector<cplx> w;
  w.reserve(f.pol.size() * f.rows.size() * f.cols.size());
  for (const cplx& p : f.pol)
    for (const cplx& r : f.rows)
      for (const cplx& c : f.cols) w.push_back(p * r * c);
  return w;
}

// Ideal far-field response (unit-modulus entries, both polarizations equal)
// toward a panel-local direction given by its spatial frequencies.
inline SeparableWeights steering_factors(const ArrayGeometry& g, SpatialFrequency f) {
  return {{cplx{1.0, 0.0}, cplx{1.0, 0.0}},
          linear_phases(g.e1, g.element_spacing, f.vertical),
          linear_phases(g.e2, g.element_spacing, f.horizontal)};
}

inline std::vector<cplx> steering_vector(const ArrayGeometry& g, double azimuth_deg, double elevation_deg) {
  return expand(steering_factors(g, spatial_frequency(azimuth_deg, elevation_deg)));
}

// Narrow beams use the full aperture. Wide beams drive only the leading
// max(1, e1/2) x max(1, e2/2) block, which roughly doubles the main-lobe
// width on each axis. Both polarizations carry the same weights, 1/sqrt(2)
// each, and the result has unit Euclidean norm.
inline PrecodingVector synthesize_beam(const ArrayGeometry& g, double azimuth_deg, double elevation_deg,
                                       BeamwidthClass cls, int family_id = 0) {
  g.validate();
  if (!(std::abs(azimuth_deg) <= 90.0)) throw std::invalid_argument("synthesize_beam: |azimuth| must be <= 90 deg");
  if (!(std::abs(elevation_deg) <= 90.0)) throw std::invalid_argument("synthesize_beam: |elevation| must be <= 90 deg");

  const SpatialFrequency f = spatial_frequency(azimuth_deg, elevation_deg);
  SeparableWeights w = steering_factors(g, f);
  const int active_rows = cls == BeamwidthClass::kNarrow ? g.e1 : std::max(1, g.e1 / 2);
  const int active_cols = cls == BeamwidthClass::kNarrow ? g.e2 : std::max(1, g.e2 / 2);
  const double row_scale = 1.0 / std::sqrt(static_cast<double>(active_rows));
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(active_cols));
  for (int r = 0; r < g.e1; ++r) w.rows[static_cast<std::size_t>(r)] *= r < active_rows ? row_scale : 0.0;
  for (int c = 0; c < g.e2; ++c) w.cols[static_cast<std::size_t>(c)] *= c < active_cols ? col_scale : 0.0;
  w.pol = {cplx{std::numbers::sqrt2 / 2.0, 0.0}, cplx{std::numbers::sqrt2 / 2.0, 0.0}};

  PrecodingVector out;
  out.weights = expand(w);
  out.steer_azimuth = azimuth_deg;
  out.steer_elevation = elevation_deg;
  out.beamwidth_class = cls;
  out.family_id = family_id;
  out.factors = std::move(w);
  return out;
}

// |a^H w| in dB for the ideal response a toward (azimuth, elevation).
inline double array_gain_db(const PrecodingVector& w, const ArrayGeometry& g, double azimuth_deg,
                            double elevation_deg) {
  const auto a = steering_vector(g, azimuth_deg, elevation_deg);
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * w.weights[i];
  return 20.0 * std::log10(std::max(std::abs(acc), 1e-20));
}

struct BeamFamilySpec {
  BeamwidthClass beamwidth_class = BeamwidthClass::kNarrow;
  double elevation = 0.0;  // electrical tilt, panel-local degrees (negative: downward)
  int num_beams = 24;
  double azimuth_min = -55.0;
  double azimuth_max = 55.0;
};

struct PoolConfig {
  std::vector<BeamFamilySpec> families;
  int pool_size = 144;  // m; families must sum to it

  // Six families of 24. Families 0 and 1 hold the expert codebooks: narrow
  // beams at a shallow tilt for far UEs and wide beams tilted further down
  // for near UEs. The rest are narrow/wide variants at other tilts that no
  // expert codebook uses. Tilts are electrical, on top of the mechanical
  // sector downtilt.
  static PoolConfig defaults() {
    using enum BeamwidthClass;
    PoolConfig cfg;
    cfg.families = {
        {kNarrow, -12.0, 24, -55.0, 55.0}, {kWide, -16.0, 24, -55.0, 55.0},
        {kNarrow, -4.0, 24, -55.0, 55.0},  {kWide, -6.0, 24, -55.0, 55.0},
        {kNarrow, -24.0, 24, -55.0, 55.0}, {kWide, -32.0, 24, -55.0, 55.0},
    };
    cfg.pool_size = 144;
    return cfg;
  }
};

// Beams are laid out family by family; within a family the azimuth grid is
// uniform and strictly increasing over [azimuth_min, azimuth_max].
inline BeamPool build_pool(const ArrayGeometry& g, const PoolConfig& cfg) {
  g.validate();
  int total = 0;
  for (const auto& f : cfg.families) {
    if (f.num_beams < 1) throw std::invalid_argument("build_pool: every family needs at least one beam");
    if (f.num_beams > 1 && !(f.azimuth_max > f.azimuth_min))
      throw std::invalid_argument("build_pool: azimuth_max must exceed azimuth_min");
    total += f.num_beams;
  }
  if (total != cfg.pool_size)
    throw std::invalid_argument("build_pool: family sizes sum to " + std::to_string(total) + ", expected " +
                                std::to_string(cfg.pool_size));
  BeamPool pool;
  pool.geometry = g;
  pool.beams.reserve(static_cast<std::size_t>(total));
  for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
    const auto& f = cfg.families[fi];
    for (int i = 0; i < f.num_beams; ++i) {
      const double az = f.num_beams == 1 ? 0.5 * (f.azimuth_min + f.azimuth_max)
                                          : f.azimuth_min + (f.azimuth_max - f.azimuth_min) * i / (f.num_beams - 1);
      pool.beams.push_back(synthesize_beam(g, az, f.elevation, f.beamwidth_class, static_cast<int>(fi)));
    }
  }
  return pool;
}

// c_k = pool indices [k*n, (k+1)*n), for k < count.
inline std::vector<Codebook> build_expert_codebooks(const BeamPool& pool, int n = 24, int count = 2) {
  if (n < 1 || count < 1) throw std::invalid_argument("build_expert_codebooks: n and count must be positive");
  if (pool.size() < n * count)
    throw std::invalid_argument("build_expert_codebooks: pool has " + std::to_string(pool.size()) +
                                " beams, need " + std::to_string(n * count));
  std::vector<Codebook> out;
  for (int k = 0; k < count; ++k) {
    Codebook cb;
    cb.label = "c" + std::to_string(k + 1);
    for (int i = 0; i < n; ++i) cb.beam_indices.push_back(k * n + i);
    out.push_back(std::move(cb));
  }
  return out;
}

inline std::uint64_t pool_hash(const BeamPool& pool) {
  Fnv1a h;
  h.update_value(pool.geometry.e1);
  h.update_value(pool.geometry.e2);
  h.update_value(pool.geometry.element_spacing);
  h.update_value(pool.geometry.carrier_frequency);
  for (const auto& b : pool.beams) {
    h.update_value(b.family_id);
    h.update_value(static_cast<int>(b.beamwidth_class));
    h.update_value(b.steer_azimuth);
    h.update_value(b.steer_elevation);
    for (const auto& w : b.weights) {
      h.update_value(w.real());
      h.update_value(w.imag());
    }
  }
  return h.digest();
}

inline nlohmann::json to_json(const ArrayGeometry& g) {
  return {{"e1", g.e1}, {"e2", g.e2}, {"element_spacing", g.element_spacing},
          {"carrier_frequency", g.carrier_frequency}};
}

inline ArrayGeometry geometry_from_json(const nlohmann::json& j) {
  ArrayGeometry g;
  g.e1 = j.at("e1").get<int>();
  g.e2 = j.at("e2").get<int>();
  g.element_spacing = j.at("element_spacing").get<double>();
  g.carrier_frequency = j.at("carrier_frequency").get<double>();
  g.validate();
  return g;
}

// Weights are written as an interleaved [re0, im0, re1, im1, ...] list.
inline nlohmann::json to_json(const BeamPool& pool) {
  nlohmann::json beams = nlohmann::json::array();
  for (std::size_t i = 0; i < pool.beams.size(); ++i) {
    const auto& b = pool.beams[i];
    std::vector<double> flat;
    flat.reserve(b.weights.size() * 2);
    for (const auto& w : b.weights) {
      flat.push_back(w.real());
      flat.push_back(w.imag());
    }
    beams.push_back({{"index", i},
                     {"family", b.family_id},
                     {"azimuth", b.steer_azimuth},
                     {"elevation", b.steer_elevation},
                     {"class", to_string(b.beamwidth_class)},
                     {"weights", flat}});
  }
  return {{"format", "ssbcb-pool-1"}, {"geometry", to_json(pool.geometry)}, {"beams", beams}};
}

// Beams whose stored weights coincide with the synthesized beam for their
// recorded angles get their Kronecker factors back; others stay dense.
inline BeamPool pool_from_json(const nlohmann::json& j) {
  BeamPool pool;
  pool.geometry = geometry_from_json(j.at("geometry"));
  const auto expected_len = static_cast<std::size_t>(pool.geometry.size());
  for (const auto& jb : j.at("beams")) {
    PrecodingVector b;
    b.family_id = jb.at("family").get<int>();
    b.steer_azimuth = jb.at("azimuth").get<double>();
    b.steer_elevation = jb.at("elevation").get<double>();
    b.beamwidth_class = beamwidth_class_from_string(jb.at("class").get<std::string>());
    const auto flat = jb.at("weights").get<std::vector<double>>();
    if (flat.size() != 2 * expected_len)
      throw std::invalid_argument("pool_from_json: beam weight list has the wrong length");
    for (std::size_t i = 0; i < expected_len; ++i) b.weights.emplace_back(flat[2 * i], flat[2 * i + 1]);
    if (std::abs(b.steer_azimuth) <= 90.0 && std::abs(b.steer_elevation) <= 90.0) {
      auto ref = synthesize_beam(pool.geometry, b.steer_azimuth, b.steer_elevation, b.beamwidth_class, b.family_id);
      if (ref.weights == b.weights) b.factors = std::move(ref.factors);
    }
    pool.beams.push_back(std::move(b));
  }
  return pool;
}

}  // namespace ssbcb
