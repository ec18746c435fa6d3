// Copyright 2026 The xres Authors
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

#ifndef XRES_RNG_HPP_
#define XRES_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

namespace xres {

// Counter-based random streams.
//
// Every stream is keyed by a SeedPath, so the values drawn for a given
// (master seed, path) never depend on which other streams were consumed
// first or on which thread consumed them. The generator is fully specified
// here (and not delegated to <random> distributions) so that independent
// implementations can reproduce it bit-for-bit:
//
//   mix(z)        = splitmix64 finalizer
//   key(seed, p)  = fold: k0 = mix(seed); k_{i+1} = mix(k_i ^ mix(p_i + GOLDEN))
//   u64 #n        = mix(key + (n + 1) * GOLDEN)
//   uniform       = (u64 >> 11) * 2^-53                      in [0, 1)
//   normal        = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)        (one per pair)
//   below(n)      = u64 % n

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn string identifiers into stream path components.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

class SeedPath {
 public:
  SeedPath() = default;
  explicit SeedPath(std::uint64_t master, std::vector<std::uint64_t> path = {})
      : master_(master), path_(std::move(path)) {}

  SeedPath child(std::uint64_t component) const {
    SeedPath out = *this;
    out.path_.push_back(component);
    return out;
  }

  std::uint64_t master() const { return master_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t key() const {
    std::uint64_t k = mix64(master_);
    for (std::uint64_t p : path_) k = mix64(k ^ mix64(p + kGolden));
    return k;
  }

  friend bool operator==(const SeedPath&, const SeedPath&) = default;

 private:
  std::uint64_t master_ = 0;
  std::vector<std::uint64_t> path_;
};

/// Satisfies std::uniform_random_bit_generator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  explicit CounterRng(const SeedPath& seed) : key_(seed.key()) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Fisher-Yates, drawing j = below(i + 1) for i = n-1 .. 1.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      using std::swap;
      swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace xres

#endif  // XRES_RNG_HPP_
