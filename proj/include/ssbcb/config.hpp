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

// INI-style experiment configuration:
//
//   [section]
//   key = value     ; or # comments
//
// Every key is tracked with its source line so that bad values point back
// at the file. `--set section.key=value` overrides are applied on top.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssbcb/agent.hpp"
#include "ssbcb/beams.hpp"
#include "ssbcb/error.hpp"
#include "ssbcb/evaluation.hpp"
#include "ssbcb/propagation.hpp"
#include "ssbcb/scenario.hpp"
#include "ssbcb/trainer.hpp"

namespace ssbcb {

struct IniValue {
  std::string text;
  int line = 0;  // 0: command-line override
};

class IniDocument {
 public:
  using Section = std::map<std::string, IniValue>;

  static IniDocument parse(std::istream& is) {
    IniDocument doc;
    std::string raw, current;
    int lineno = 0;
    while (std::getline(is, raw)) {
      ++lineno;
      std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
        current = trim(line.substr(1, line.size() - 2));
        if (current.empty()) throw ConfigError("empty section name", lineno);
        if (doc.sections_.count(current)) throw ConfigError("section [" + current + "] appears twice", lineno);
        doc.sections_[current];
        doc.section_lines_[current] = lineno;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
      if (current.empty()) throw ConfigError("key outside of any section", lineno);
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("empty key", lineno);
      auto& sec = doc.sections_[current];
      if (sec.count(key)) throw ConfigError("key '" + key + "' repeated in [" + current + "]", lineno);
      sec[key] = {trim(line.substr(eq + 1)), lineno};
    }
    return doc;
  }

  static IniDocument parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static IniDocument load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse(f);
  }

  // "section.key=value"
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    if (section.empty() || key.empty()) throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    sections_[section][key] = {trim(assignment.substr(eq + 1)), 0};
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
  const Section& section(const std::string& s) const {
    const auto it = sections_.find(s);
    if (it == sections_.end()) throw ConfigError("missing section [" + s + "]");
    return it->second;
  }
  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto p = s.find_first_of(";#");
    return p == std::string::npos ? s : s.substr(0, p);
  }
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  std::map<std::string, Section> sections_;
  std::map<std::string, int> section_lines_;
};

// Typed reads from one section; every key must be consumed, so typos fail.
class SectionReader {
 public:
  SectionReader(const IniDocument& doc, std::string name) : name_(std::move(name)), sec_(doc.section(name_)) {}

  ~SectionReader() = default;

  template <class T>
  void read(const std::string& key, T& out) {
    const auto it = sec_.find(key);
    if (it == sec_.end()) return;
    used_.insert(key);
    out = convert<T>(it->second, key);
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    const auto it = sec_.find(key);
    if (it == sec_.end()) return;
    used_.insert(key);
    if (it->second.text == "auto") out.reset();
    else out = convert<T>(it->second, key);
  }

  template <class T>
  void read_list(const std::string& key, std::vector<T>& out) {
    const auto it = sec_.find(key);
    if (it == sec_.end()) return;
    used_.insert(key);
    out = convert_list<T>(it->second, key);
  }

  std::vector<std::pair<std::string, IniValue>> with_prefix(const std::string& prefix) {
    std::vector<std::pair<std::string, IniValue>> out;
    for (const auto& [k, v] : sec_)
      if (k.rfind(prefix, 0) == 0) {
        out.emplace_back(k, v);
        used_.insert(k);
      }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : sec_)
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name_ + "]", v.line);
  }

  template <class T>
  T convert(const IniValue& v, const std::string& key) const {
    const std::string& s = v.text;
    const auto fail = [&]() -> ConfigError {
      return ConfigError("[" + name_ + "] " + key + ": cannot parse '" + s + "'", v.line);
    };
    if constexpr (std::is_same_v<T, std::string>) {
      return s;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
      throw fail();
    } else {
      T x{};
      const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw fail();
      return x;
    }
  }

  template <class T>
  std::vector<T> convert_list(const IniValue& v, const std::string& key) const {
    std::vector<T> out;
    std::stringstream ss(v.text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
      out.push_back(convert<T>({item, v.line}, key));
    }
    return out;
  }

 private:
  std::string name_;
  const IniDocument::Section& sec_;
  std::set<std::string> used_;
};

struct EvalSettings {
  int instances = 200;
  std::uint64_t seed_begin = 1'000'000'000;
  std::string methods = "all";
  double isd = 200.0;
};

struct ExperimentConfig {
  SiteLayout layout;
  ScenarioConfig scenario;
  RadioConfig radio;
  ArrayGeometry geometry;
  PoolConfig pool = PoolConfig::defaults();
  int codebook_size = 24;  // n
  int expert_codebooks = 2;
  TrainConfig train;
  EvalSettings eval;

  BeamPool build_beam_pool() const { return build_pool(geometry, pool); }

  Environment environment() const {
    Environment env;
    env.layout = layout;
    env.scenario = scenario;
    env.radio = radio;
    env.pool = build_beam_pool();
    env.experts = build_expert_codebooks(env.pool, codebook_size, expert_codebooks);
    env.n = codebook_size;
    return env;
  }
};

namespace detail {

inline BeamFamilySpec parse_family(const SectionReader& r, const std::string& key, const IniValue& v) {
  const auto parts = r.convert_list<std::string>(v, key);
  if (parts.size() != 5) throw ConfigError("[pool] " + key + ": expected 'class, tilt, beams, az_min, az_max'", v.line);
  BeamFamilySpec f;
  if (parts[0] == "narrow") f.beamwidth_class = BeamwidthClass::kNarrow;
  else if (parts[0] == "wide") f.beamwidth_class = BeamwidthClass::kWide;
  else throw ConfigError("[pool] " + key + ": beam class must be narrow or wide", v.line);
  f.elevation = r.convert<double>({parts[1], v.line}, key);
  f.num_beams = r.convert<int>({parts[2], v.line}, key);
  f.azimuth_min = r.convert<double>({parts[3], v.line}, key);
  f.azimuth_max = r.convert<double>({parts[4], v.line}, key);
  return f;
}

}  // namespace detail

inline const std::vector<std::string>& required_sections() {
  static const std::vector<std::string> kSections{"layout", "scenario", "radio", "pool", "train", "eval"};
  return kSections;
}

inline ExperimentConfig config_from_ini(const IniDocument& doc) {
  for (const auto& [name, sec] : doc.sections())
    if (std::find(required_sections().begin(), required_sections().end(), name) == required_sections().end()) {
      const int line = sec.empty() ? 0 : sec.begin()->second.line;
      throw ConfigError("unknown section [" + name + "]", line);
    }
  ExperimentConfig c;
  {
    SectionReader r(doc, "layout");
    r.read("isd", c.layout.isd);
    r.read("bs_height", c.layout.bs_height);
    r.read("sector_downtilt", c.layout.sector_downtilt);
    r.read_list("sector_azimuths", c.layout.sector_azimuths);
    r.finish();
  }
  {
    SectionReader r(doc, "scenario");
    r.read("num_ues", c.scenario.num_ues);
    r.read("num_clusters", c.scenario.num_clusters);
    r.read("cluster_stddev", c.scenario.cluster_stddev);
    r.read("clustered_fraction", c.scenario.clustered_fraction);
    r.read("indoor_fraction", c.scenario.indoor_fraction);
    r.read("ue_height", c.scenario.ue_height);
    r.read("seed", c.scenario.seed);
    r.finish();
  }
  {
    SectionReader r(doc, "radio");
    r.read("tx_power_dbm", c.radio.tx_power_dbm);
    r.read("bandwidth_hz", c.radio.bandwidth_hz);
    r.read("noise_figure_db", c.radio.noise_figure_db);
    r.read("reference_symbol_power", c.radio.reference_symbol_power);
    r.read("detection_threshold_dbm", c.radio.detection_threshold_dbm);
    r.read("shadowing_stddev_los_db", c.radio.shadowing_stddev_los_db);
    r.read("shadowing_stddev_nlos_db", c.radio.shadowing_stddev_nlos_db);
    r.read("indoor_penetration_loss_db", c.radio.indoor_penetration_loss_db);
    r.read("los_decay_m", c.radio.los_decay_m);
    r.read("los_probability_floor", c.radio.los_probability_floor);
    r.read("indoor_los_radius_m", c.radio.indoor_los_radius_m);
    r.read("element_pattern", c.radio.element_pattern);
    r.read("element_gain_dbi", c.radio.element_gain_dbi);
    r.read("traffic_bps", c.radio.traffic_bps);
    r.finish();
  }
  {
    SectionReader r(doc, "pool");
    r.read("e1", c.geometry.e1);
    r.read("e2", c.geometry.e2);
    r.read("element_spacing", c.geometry.element_spacing);
    r.read("carrier_hz", c.geometry.carrier_frequency);
    r.read("pool_size", c.pool.pool_size);
    r.read("codebook_size", c.codebook_size);
    r.read("expert_codebooks", c.expert_codebooks);
    auto fams = r.with_prefix("family");
    if (!fams.empty()) {
      std::sort(fams.begin(), fams.end(), [](const auto& a, const auto& b) {
        const auto num = [](const std::string& k) {
          int x = -1;
          std::from_chars(k.data() + 6, k.data() + k.size(), x);
          return x;
        };
        return num(a.first) < num(b.first);
      });
      c.pool.families.clear();
      for (const auto& [k, v] : fams) c.pool.families.push_back(detail::parse_family(r, k, v));
    }
    r.finish();
  }
  {
    SectionReader r(doc, "train");
    r.read("batch_size", c.train.batch_size);
    r.read("iterations", c.train.iterations);
    r.read("actor_learning_rate", c.train.actor_learning_rate);
    r.read("critic_learning_rate", c.train.critic_learning_rate);
    r.read("advantage_clamp", c.train.advantage_clamp);
    r.read("entropy_bonus", c.train.entropy_bonus);
    r.read("seed", c.train.seed);
    r.read_list("actor_hidden", c.train.actor_hidden);
    r.read_list("critic_hidden", c.train.critic_hidden);
    r.read("convergence_window", c.train.convergence_window);
    r.read("convergence_tolerance", c.train.convergence_tolerance);
    r.read("checkpoint_every", c.train.checkpoint_every);
    r.read("env_seed_offset", c.train.env_seed_offset);
    r.finish();
  }
  {
    SectionReader r(doc, "eval");
    r.read("instances", c.eval.instances);
    r.read("seed_begin", c.eval.seed_begin);
    r.read("methods", c.eval.methods);
    r.read("isd", c.eval.isd);
    r.finish();
  }
  try {
    c.layout.validate();
    c.radio.validate();
    c.geometry.validate();
    c.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.codebook_size < 1) throw ConfigError("[pool] codebook_size must be >= 1");
  if (c.expert_codebooks < 1) throw ConfigError("[pool] expert_codebooks must be >= 1");
  if (c.scenario.num_ues < 0) throw ConfigError("[scenario] num_ues must be >= 0");
  if (c.eval.instances < 1) throw ConfigError("[eval] instances must be >= 1");
  parse_methods(c.eval.methods);
  return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  IniDocument doc = IniDocument::load(path);
  for (const auto& o : overrides) doc.apply_override(o);
  return config_from_ini(doc);
}

}  // namespace ssbcb
