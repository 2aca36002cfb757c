// Copyright (C) 2026 thzsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef THZ_RNG_HPP
#define THZ_RNG_HPP

#include <cstdint>
#include <random>

#include "thz/types.hpp"

namespace thz {

// Splittable counter-style seeding: a master seed plus stream coordinates are
// mixed through splitmix64 so any (trial, purpose) substream is reproducible
// in isolation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

// Stream ids for the distinct random purposes inside one Monte-Carlo trial.
enum class StreamId : std::uint64_t {
  channel = 0x11,
  frame = 0x22,
  noise = 0x33,
  data = 0x44,
};

inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t trial, StreamId id) {
  return std::mt19937_64(derive_seed(master, trial, static_cast<std::uint64_t>(id)));
}

inline std::mt19937_64 make_stream(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

/// One draw from CN(0, sigma2): circularly-symmetric complex Gaussian.
inline cdouble complex_gaussian(std::mt19937_64& rng, double sigma2) {
  std::normal_distribution<double> n(0.0, std::sqrt(sigma2 / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace thz

#endif  // THZ_RNG_HPP
