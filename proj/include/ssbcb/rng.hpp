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

// Counter-based random numbers.
//
// Every draw is a pure function of (seed, stream, counter):
//
//   key    = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019))
//   draw_i = splitmix64(key + i * 0x9e3779b97f4a7c15)
//
// where splitmix64 is the finalizer
//
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   z =  z ^ (z >> 31)
//
// Uniform reals take the top 53 bits: (draw >> 11) * 2^-53, in [0, 1).
// Normals use Box-Muller on two consecutive uniforms (u1 mapped to (0, 1]),
// returning the cosine branch only, so each normal consumes two counters.
// No std:: distribution is used anywhere; their output is
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace ssbcb {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child seed from a parent seed and a label. Used to give each
// subsystem (scenario, shadowing, sampling, ...) an independent stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept {
  return splitmix64(seed ^ splitmix64(label + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t label_of(std::string_view text) noexcept {
  // FNV-1a, so labels can be spelled as strings.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(derive_seed(seed, stream)) {}
  CounterRng(std::uint64_t seed, std::string_view stream) noexcept
      : CounterRng(seed, label_of(stream)) {}

  std::uint64_t next_u64() noexcept {
    return splitmix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  // [0, 1)
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  // Uniform integer in [0, bound). Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("CounterRng::below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// First k entries of a partial Fisher-Yates shuffle of 0..n-1, in draw order.
inline std::vector<int> sample_without_replacement(int n, int k, CounterRng& rng) {
  if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace ssbcb
