// Copyright 2026 The XIR Authors.
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

#ifndef XIR_RANDOM_H_
#define XIR_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace xir {

// Mixes a list of integers into a 64-bit seed. Used to derive independent
// streams from (run seed, purpose, step, row) tuples.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Thin wrapper over mt19937_64. The conversions to doubles and bounded
// integers are done here rather than through <random> distributions so that
// sample streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller.
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xir

#endif  // XIR_RANDOM_H_
