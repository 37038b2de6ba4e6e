// Copyright 2026 The DriverSense Authors
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

#ifndef DRIVERSENSE_RANDOM_HPP_
#define DRIVERSENSE_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace driversense {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t HashName(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed of the named sub-stream `name`/`index` under a root seed. Streams with
// different names or indices are decorrelated through SplitMix64.
inline constexpr std::uint64_t DeriveSeed(std::uint64_t root,
                                          std::string_view name,
                                          std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(root ^ HashName(name)) + index);
}

inline Rng MakeRng(std::uint64_t root, std::string_view name,
                   std::uint64_t index = 0) {
  return Rng(DeriveSeed(root, name, index));
}

}  // namespace driversense

#endif  // DRIVERSENSE_RANDOM_HPP_
