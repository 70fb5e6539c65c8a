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

// Received-power model: single-path far-field channel with distance-driven
// LOS probability, log-normal shadowing, flat indoor penetration loss and an
// optional per-element radiation pattern, combined with the ideal array
// response toward each UE.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssbcb/beams.hpp"
#include "ssbcb/error.hpp"
#include "ssbcb/rng.hpp"
#include "ssbcb/scenario.hpp"
#include "ssbcb/util.hpp"

namespace ssbcb {

// Floor applied when |a^H w| vanishes.
inline constexpr double kPowerFloorDbm = -400.0;

struct RadioConfig {
  double tx_power_dbm = 30.0;           // per SSB
  double bandwidth_hz = 100e6;
  double noise_figure_db = 9.0;
  double reference_symbol_power = 1.0;  // broadcast reference signal, unit power
  double detection_threshold_dbm = -66.55;  // c1 covers ~41% at ISD 200
  double shadowing_stddev_los_db = 4.0;
  double shadowing_stddev_nlos_db = 8.0;
  double indoor_penetration_loss_db = 25.0;
  double los_decay_m = 144.0;           // P(LOS) = max(exp(-d/decay), floor) outdoors
  double los_probability_floor = 0.05;
  double indoor_los_radius_m = 5.0;     // indoor UEs farther than this are never LOS
  bool element_pattern = true;
  double element_gain_dbi = 8.0;
  double traffic_bps = 3e8;             // carried as metadata only
  std::uint64_t seed = 0;

  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("RadioConfig: bandwidth must be positive");
    if (!std::isfinite(detection_threshold_dbm)) throw std::invalid_argument("RadioConfig: tau must be finite");
    if (!(reference_symbol_power > 0.0)) throw std::invalid_argument("RadioConfig: reference power must be positive");
    if (shadowing_stddev_los_db < 0.0 || shadowing_stddev_nlos_db < 0.0)
      throw std::invalid_argument("RadioConfig: shadowing stddev must be >= 0");
  }
};

inline double free_space_path_loss_db(double distance_m, double carrier_hz) {
  const double lambda = 299792458.0 / carrier_hz;
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m / lambda);
}

inline double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

// Directional element gain: 8 dBi peak, 65 deg half-power width on both
// axes, 30 dB front-to-back. Angles are panel-local degrees.
inline double element_gain_db(double azimuth_deg, double elevation_deg, double peak_dbi) {
  const double vertical = -std::min(12.0 * std::pow(elevation_deg / 65.0, 2), 30.0);
  const double horizontal = -std::min(12.0 * std::pow(azimuth_deg / 65.0, 2), 30.0);
  return peak_dbi - std::min(-(vertical + horizontal), 30.0);
}

struct PanelDirection {
  double azimuth;    // degrees
  double elevation;  // degrees
};

// Direction of `target` seen from a panel at `origin` whose boresight points
// at `boresight_azimuth` and is tilted `downtilt` degrees below the horizon.
inline PanelDirection panel_direction(const Vec3& origin, const Vec3& target, double boresight_azimuth,
                                      double downtilt) {
  const Vec3 d = target - origin;
  const double r = d.norm();
  const double deg = std::numbers::pi / 180.0;
  const double az = std::atan2(d.y, d.x) - boresight_azimuth * deg;
  const double el = std::asin(std::clamp(d.z / r, -1.0, 1.0));
  const double ct = std::cos(downtilt * deg), st = std::sin(downtilt * deg);
  const double gx = std::cos(el) * std::cos(az), gy = std::cos(el) * std::sin(az), gz = std::sin(el);
  const double lx = gx * ct - gz * st;
  const double ly = gy;
  const double lz = gx * st + gz * ct;
  return {std::atan2(ly, lx) / deg, std::asin(std::clamp(lz, -1.0, 1.0)) / deg};
}

struct ChannelEntry {
  double path_gain_db = 0.0;  // includes element pattern, shadowing and penetration loss
  bool los = false;
  PanelDirection direction{0.0, 0.0};
};

// Per (sector, UE) channel. The array response is not stored: it is the
// ideal steering vector toward `direction`, see array_response().
struct ChannelRealization {
  int num_sectors = 0;
  int num_ues = 0;
  ArrayGeometry geometry;
  std::vector<ChannelEntry> entries;  // index s * num_ues + u

  const ChannelEntry& at(int s, int u) const {
    return entries[static_cast<std::size_t>(s) * static_cast<std::size_t>(num_ues) + static_cast<std::size_t>(u)];
  }
};

inline std::vector<cplx> array_response(const ChannelEntry& e, const ArrayGeometry& g) {
  return steering_vector(g, e.direction.azimuth, e.direction.elevation);
}

inline double los_probability(double distance_2d, bool indoor, const RadioConfig& cfg) {
  if (indoor && distance_2d > cfg.indoor_los_radius_m) return 0.0;
  return std::max(std::exp(-distance_2d / cfg.los_decay_m), cfg.los_probability_floor);
}

// LOS state and shadowing are drawn once per UE (in UE order, two uniforms
// and one normal each, always consumed) and shared by all sectors of the
// site, which sit at the same location.
inline ChannelRealization realize_channels(const Scenario& sc, const ArrayGeometry& g, const RadioConfig& cfg) {
  g.validate();
  cfg.validate();
  ChannelRealization ch;
  ch.num_sectors = sc.layout.num_sectors();
  ch.num_ues = static_cast<int>(sc.ues.size());
  ch.geometry = g;
  ch.entries.resize(static_cast<std::size_t>(ch.num_sectors) * sc.ues.size());

  const Vec3 bs = sc.layout.antenna_position();
  CounterRng rng(cfg.seed, "channel/large-scale");
  for (int u = 0; u < ch.num_ues; ++u) {
    const auto ui = static_cast<std::size_t>(u);
    const Vec3& p = sc.ues.positions[ui];
    const bool indoor = sc.ues.indoor[ui] != 0;
    const Vec3 d = p - bs;
    const double dist = d.norm();
    if (!(dist > 1e-9)) throw std::invalid_argument("realize_channels: UE colocated with the base station");
    const double los_draw = rng.uniform();
    const double shadow_draw = rng.normal();
    const bool los = los_draw < los_probability(d.horizontal_norm(), indoor, cfg);
    const double shadow = shadow_draw * (los ? cfg.shadowing_stddev_los_db : cfg.shadowing_stddev_nlos_db);
    const double common = -free_space_path_loss_db(dist, g.carrier_frequency) + shadow -
                          (indoor ? cfg.indoor_penetration_loss_db : 0.0);
    for (int s = 0; s < ch.num_sectors; ++s) {
      ChannelEntry e;
      e.los = los;
      e.direction = panel_direction(bs, p, sc.layout.sector_azimuths[static_cast<std::size_t>(s)],
                                    sc.layout.sector_downtilt);
      e.path_gain_db =
          common +
          (cfg.element_pattern ? element_gain_db(e.direction.azimuth, e.direction.elevation, cfg.element_gain_dbi)
                               : 0.0);
      ch.entries[static_cast<std::size_t>(s) * sc.ues.size() + ui] = e;
    }
  }
  return ch;
}

inline double amplitude_to_dbm(double amplitude, double tx_power_dbm, double path_gain_db,
                               double reference_symbol_power) {
  if (!(amplitude > 0.0)) return kPowerFloorDbm;
  const double p = tx_power_dbm + path_gain_db + 10.0 * std::log10(reference_symbol_power) +
                   20.0 * std::log10(amplitude);
  return std::max(p, kPowerFloorDbm);
}

// tx + path gain + 20 log10 |a^H w|, with a the ideal response.
inline double received_power(const ChannelEntry& h, const ArrayGeometry& g, const PrecodingVector& w,
                             const RadioConfig& cfg) {
  if (w.weights.empty()) throw std::invalid_argument("received_power: empty precoding vector");
  const auto a = array_response(h, g);
  if (a.size() != w.weights.size()) throw std::invalid_argument("received_power: vector length mismatch");
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * w.weights[i];
  return amplitude_to_dbm(std::abs(acc), cfg.tx_power_dbm, h.path_gain_db, cfg.reference_symbol_power);
}

// Received powers in dBm, [sector][ue][beam] row-major, plus the thermal
// noise floor (identical for every UE).
struct GainMatrix {
  int num_sectors = 0;
  int num_ues = 0;
  int num_beams = 0;
  double noise_dbm = 0.0;
  std::vector<double> power_dbm;

  std::size_t offset(int s, int u) const {
    return (static_cast<std::size_t>(s) * static_cast<std::size_t>(num_ues) + static_cast<std::size_t>(u)) *
           static_cast<std::size_t>(num_beams);
  }
  double at(int s, int u, int b) const { return power_dbm[offset(s, u) + static_cast<std::size_t>(b)]; }
  double& at(int s, int u, int b) { return power_dbm[offset(s, u) + static_cast<std::size_t>(b)]; }
  std::span<const double> row(int s, int u) const {
    return {power_dbm.data() + offset(s, u), static_cast<std::size_t>(num_beams)};
  }
  double snr_db(int s, int u, int b) const { return at(s, u, b) - noise_dbm; }

  static GainMatrix zeros(int sectors, int ues, int beams, double noise_dbm = 0.0) {
    GainMatrix g;
    g.num_sectors = sectors;
    g.num_ues = ues;
    g.num_beams = beams;
    g.noise_dbm = noise_dbm;
    g.power_dbm.assign(static_cast<std::size_t>(sectors) * static_cast<std::size_t>(ues) *
                           static_cast<std::size_t>(beams),
                       0.0);
    return g;
  }
};

inline std::uint64_t gain_matrix_hash(const GainMatrix& g) {
  Fnv1a h;
  h.update_value(g.num_sectors);
  h.update_value(g.num_ues);
  h.update_value(g.num_beams);
  h.update_value(g.noise_dbm);
  h.update(g.power_dbm.data(), g.power_dbm.size() * sizeof(double));
  return h.digest();
}

namespace detail {

inline cplx conj_dot(std::span<const cplx> a, std::span<const cplx> w) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // conj(a) * w
    re += a[i].real() * w[i].real() + a[i].imag() * w[i].imag();
    im += a[i].real() * w[i].imag() - a[i].imag() * w[i].real();
  }
  return {re, im};
}

}  // namespace detail

// Rows are independent, so `threads` > 1 splits UEs across workers without
// changing any value.
inline GainMatrix build_gain_matrix(const ChannelRealization& ch, const BeamPool& pool, const RadioConfig& cfg,
                                    int threads = 1) {
  if (!(ch.geometry == pool.geometry)) throw std::invalid_argument("build_gain_matrix: geometry mismatch");
  GainMatrix gm = GainMatrix::zeros(ch.num_sectors, ch.num_ues, pool.size(),
                                    thermal_noise_dbm(cfg.bandwidth_hz, cfg.noise_figure_db));
  const ArrayGeometry& g = pool.geometry;
  parallel_for(static_cast<std::size_t>(ch.num_ues), threads, [&](std::size_t ui) {
    const int u = static_cast<int>(ui);
    for (int s = 0; s < ch.num_sectors; ++s) {
      const ChannelEntry& e = ch.at(s, u);
      const SeparableWeights resp = steering_factors(g, spatial_frequency(e.direction.azimuth, e.direction.elevation));
      std::vector<cplx> dense;  // built on first non-separable beam
      for (int b = 0; b < pool.size(); ++b) {
        const PrecodingVector& w = pool.beams[static_cast<std::size_t>(b)];
        double amplitude;
        if (w.factors) {
          const cplx p = detail::conj_dot(resp.pol, w.factors->pol);
          const cplx r = detail::conj_dot(resp.rows, w.factors->rows);
          const cplx c = detail::conj_dot(resp.cols, w.factors->cols);
          amplitude = std::abs(p * r * c);
        } else {
          if (dense.empty()) dense = expand(resp);
          if (dense.size() != w.weights.size()) throw std::invalid_argument("build_gain_matrix: beam length mismatch");
          amplitude = std::abs(detail::conj_dot(dense, w.weights));
        }
        gm.at(s, u, b) = amplitude_to_dbm(amplitude, cfg.tx_power_dbm, e.path_gain_db, cfg.reference_symbol_power);
      }
    }
  });
  return gm;
}

inline GainMatrix build_gain_matrix(const Scenario& sc, const BeamPool& pool, const RadioConfig& cfg,
                                    int threads = 1) {
  return build_gain_matrix(realize_channels(sc, pool.geometry, cfg), pool, cfg, threads);
}

// GMX1 cache: "GMX1", then sectors, UEs, beams as little-endian uint32,
// then float32 dBm values in [sector][ue][beam] order, little-endian.
namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw std::runtime_error("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

}  // namespace detail

inline void write_gmx(std::ostream& os, const GainMatrix& gm) {
  os.write("GMX1", 4);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(gm.num_sectors));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(gm.num_ues));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(gm.num_beams));
  for (double v : gm.power_dbm) detail::put_le<float>(os, static_cast<float>(v));
}

// The noise floor is not part of the file; callers pass the one implied by
// their radio configuration.
inline GainMatrix read_gmx(std::istream& is, double noise_dbm) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "GMX1", 4) != 0)
    throw IncompatibleError("read_gmx: missing GMX1 magic");
  const auto s = detail::get_le<std::uint32_t>(is);
  const auto u = detail::get_le<std::uint32_t>(is);
  const auto b = detail::get_le<std::uint32_t>(is);
  GainMatrix gm = GainMatrix::zeros(static_cast<int>(s), static_cast<int>(u), static_cast<int>(b), noise_dbm);
  for (double& v : gm.power_dbm) v = static_cast<double>(detail::get_le<float>(is));
  return gm;
}

}  // namespace ssbcb
