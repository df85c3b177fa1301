// Copyright 2026 The Collective Alchemy Authors. All rights reserved.
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

#ifndef ALCHEMY_RNG_H_
#define ALCHEMY_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace alchemy {

// Seeded random stream. Wraps mt19937_64 (whose output sequence is fixed by
// the standard) with distribution helpers whose results do not depend on the
// standard library implementation, so event logs stay byte-identical across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::size_t uniform_index(std::size_t bound);

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform_real();

  bool bernoulli(double p) { return uniform_real() < p; }

  // Index drawn proportionally to non-negative weights. Total must be positive.
  std::size_t weighted_index(const std::vector<double>& weights);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Mixes a base seed with a list of labels into an independent stream seed
// (splitmix64 finalizer applied per label).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels);

}  // namespace alchemy

#endif  // ALCHEMY_RNG_H_
