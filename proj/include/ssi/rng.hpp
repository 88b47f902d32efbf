// Copyright 2026 The SSI Authors
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

#pragma once

// Counter-based random streams (Philox4x32-10). Every draw is a pure
// function of (key, counter), so any execution order of a schedule sees
// the same numbers.

#include <array>
#include <cstdint>

namespace ssi {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Lane tags separate draw purposes that share a (stream, step) pair.
enum class Lane : std::uint32_t { sample = 0, schedule = 1, init = 2 };

/// Uniform draws addressed by (stream id, step, lane) under a 64-bit seed.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent generator for a sub-experiment (e.g. one ensemble trial).
  StreamRng derive(std::uint64_t index) const noexcept {
    return StreamRng(splitmix64(seed_ ^ splitmix64(index + 0x5851F42D4C957F2Dull)));
  }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t step,
                 Lane lane = Lane::sample) const noexcept {
    const auto out = raw(stream, step, lane);
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(out[0]) << 21) ^ (out[1] >> 11);
    return static_cast<double>(bits & ((1ull << 53) - 1)) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound, std::uint64_t stream,
                      std::uint64_t step, Lane lane) const noexcept {
    const auto out = raw(stream, step, lane);
    const std::uint64_t x =
        (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(x) * bound) >> 64);
  }

  Philox4x32::Counter raw(std::uint64_t stream, std::uint64_t step,
                          Lane lane) const noexcept {
    // Stream ids are below 2^32 in practice; the lane occupies the top bits.
    const auto hi = static_cast<std::uint32_t>(stream >> 32) ^
                    (static_cast<std::uint32_t>(lane) << 28);
    return Philox4x32::block({static_cast<std::uint32_t>(step),
                              static_cast<std::uint32_t>(step >> 32),
                              static_cast<std::uint32_t>(stream), hi},
                             key_);
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t seed_;
};

}  // namespace ssi
