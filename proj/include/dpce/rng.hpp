//
// Copyright 2026 The dpce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace dpce {

// Seed derivation. Every random stage draws from its own stream whose seed is
//   split(master, tag, i0, i1, ...)
// computed by folding splitmix64 over the master seed, an FNV-1a hash of the
// stage tag, and the indices (trial, AP, round, ...). Streams never share
// state, so trials can run in any order or in parallel.
namespace seeds {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t split(std::uint64_t master, std::string_view tag,
                           std::initializer_list<std::uint64_t> idx = {}) {
  std::uint64_t h = splitmix64(master ^ fnv1a(tag));
  for (std::uint64_t i : idx) h = splitmix64(h ^ splitmix64(i + 1));
  return h;
}

}  // namespace seeds

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return std_normal_(engine_); }

  // Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> cnormal(double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = std_normal_(engine_);
    const double im = std_normal_(engine_);
    return {s * re, s * im};
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(engine_);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

}  // namespace dpce
