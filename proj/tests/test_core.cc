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

#include <map>
#include <set>

#include <doctest.h>

#include "alchemy/core.h"
#include "alchemy/hash.h"
#include "alchemy/rng.h"

namespace alchemy {
namespace {

TEST_CASE("item pairs are canonical") {
  const ItemPair p(item_at(7), item_at(3));
  CHECK(p.first() == item_at(3));
  CHECK(p.second() == item_at(7));
  CHECK(p == ItemPair(item_at(3), item_at(7)));
  CHECK(p.key() == ItemPair(item_at(3), item_at(7)).key());
  CHECK(ItemPair(item_at(2), item_at(2)).is_self_pair());
  CHECK(p.contains(item_at(7)));
  CHECK_FALSE(p.contains(item_at(4)));
}

TEST_CASE("name normalization") {
  CHECK(normalize_name("  Fire ") == "fire");
  CHECK(normalize_name("Atomic\t  BOMB") == "atomic bomb");
  CHECK(normalize_name("   ").empty());
}

TEST_CASE("sha256 of a known message") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("").size() == 64);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(42).next_u64() != c.next_u64());
  // mt19937_64 output is fixed by the standard: the 10000th value for the
  // default seed is 9981545732273789042.
  Rng fixed(5489u);
  for (int i = 0; i < 9999; ++i) fixed.next_u64();
  CHECK(fixed.next_u64() == 9981545732273789042ull);
}

TEST_CASE("uniform_index stays in range and covers it evenly") {
  Rng rng(7);
  std::vector<int> counts(6, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const auto k = rng.uniform_index(6);
    REQUIRE(k < 6);
    ++counts[k];
  }
  // binomial sd = sqrt(n p (1-p)) ~ 91; allow 4 sd
  for (int c : counts) CHECK(std::abs(c - draws / 6) < 370);
  CHECK_THROWS_AS(rng.uniform_index(0), ContractViolation);
}

TEST_CASE("uniform_real lies in [0, 1)") {
  Rng rng(9);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform_real();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("weighted_index follows the weights") {
  Rng rng(11);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 40000; ++i) ++counts[rng.weighted_index({1.0, 0.0, 3.0})];
  CHECK(counts[1] == 0);
  CHECK(counts[2] / static_cast<double>(counts[0]) == doctest::Approx(3.0).epsilon(0.08));
}

TEST_CASE("derive_seed separates labels") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 10; ++t) {
    for (std::uint64_t a = 0; a < 10; ++a) seen.insert(derive_seed(1, {t, a}));
  }
  CHECK(seen.size() == 100);
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(3);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  rng.shuffle(v);
  std::multiset<int> s(v.begin(), v.end());
  CHECK(s == std::multiset<int>{1, 2, 3, 4, 5, 6, 7, 8});
}

}  // namespace
}  // namespace alchemy
