// Copyright 2026 The pepr Authors
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

#ifndef PEPR_RANDOM_H_
#define PEPR_RANDOM_H_

#include <cstdint>
#include <random>

namespace pepr {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for (experiment seed, trajectory id, stream tag).
/// The engine seed is splitmix64(splitmix64(splitmix64(seed) ^ id) ^ stream),
/// so streams never depend on scheduling or thread count.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t id, std::uint64_t stream = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ id) ^ stream);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t id, std::uint64_t stream = 0) {
  return Rng(stream_seed(seed, id, stream));
}

}  // namespace pepr

#endif  // PEPR_RANDOM_H_
