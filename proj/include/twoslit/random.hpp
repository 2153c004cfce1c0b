// Copyright 2026 The twoslit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file random.hpp
 * Per-trial random streams derived from a master seed.
 *
 * The stream for trial i is a std::mt19937_64 seeded with
 *
 *     seed_i = splitmix64(master_seed ^ splitmix64(i + 0x9E3779B97F4A7C15))
 *
 * so trial i never depends on which other trials run or in what order.
 * This mixing function is part of the reproducibility contract; changing it
 * changes every sampled outcome.
 */
#pragma once

#include <cstdint>
#include <random>

namespace twoslit {

/// One step of the splitmix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return splitmix64(master_seed ^ splitmix64(trial_index + 0x9E3779B97F4A7C15ULL));
}

class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  [[nodiscard]] RandomStream stream() const { return RandomStream(mix_seed(master_seed, trial_index)); }
};

inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  return SeedSpec{master_seed, trial_index}.stream();
}

} // namespace twoslit
