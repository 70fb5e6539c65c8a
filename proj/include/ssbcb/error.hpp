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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssbcb {

// Process exit codes shared by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kIncompatible = 3,
  kNumeric = 4,
};

// Malformed or missing configuration. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Artifacts that do not belong together (pool hash, dimensions, seed ranges).
class IncompatibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values in training or evaluation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a content hash.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) noexcept { update(s.data(), s.size()); }
  template <class T>
  void update_value(const T& v) noexcept {
    update(&v, sizeof(T));
  }
  std::uint64_t digest() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace ssbcb
