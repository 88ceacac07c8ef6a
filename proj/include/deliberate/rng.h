// Copyright 2026 The Deliberate Authors.
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

#ifndef DELIBERATE_RNG_H_
#define DELIBERATE_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace deliberate {

// 64-bit FNV-1a over bytes.
uint64_t Fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

uint64_t SplitMix64(uint64_t x);

// Seeds an independent stream from a session seed, a purpose tag and an index,
// so every consumer of randomness is replayable without persisting engine
// state.
uint64_t DeriveSeed(uint64_t base, std::string_view stream, uint64_t index = 0);

// Platform-stable random source: the distributions below are implemented here
// rather than through <random> distributions, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t Uniform(uint64_t bound);

  // Uniform real in [0, 1).
  double UniformReal();

  // Standard normal via Box-Muller.
  double Normal();

  // k distinct indices drawn uniformly from [0, n), in draw order.
  std::vector<size_t> SampleWithoutReplacement(size_t n, size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace deliberate

#endif  // DELIBERATE_RNG_H_
