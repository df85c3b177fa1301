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

#ifndef ALCHEMY_CORE_H_
#define ALCHEMY_CORE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace alchemy {

// Dense item index assigned by a KnowledgeGraph. Only meaningful together
// with the graph that issued it.
enum class ItemId : std::uint32_t {};

constexpr std::size_t index_of(ItemId id) { return static_cast<std::size_t>(id); }
constexpr ItemId item_at(std::size_t index) {
  return static_cast<ItemId>(static_cast<std::uint32_t>(index));
}

// Unordered pair of items, always stored with the smaller id first.
class ItemPair {
 public:
  constexpr ItemPair(ItemId a, ItemId b)
      : first_(a < b ? a : b), second_(a < b ? b : a) {}

  constexpr ItemId first() const { return first_; }
  constexpr ItemId second() const { return second_; }
  constexpr bool is_self_pair() const { return first_ == second_; }
  constexpr bool contains(ItemId id) const { return first_ == id || second_ == id; }

  // Packs the pair into a single key usable in hash maps.
  constexpr std::uint64_t key() const {
    return (static_cast<std::uint64_t>(first_) << 32) | static_cast<std::uint64_t>(second_);
  }

  friend constexpr auto operator<=>(const ItemPair&, const ItemPair&) = default;

 private:
  ItemId first_;
  ItemId second_;
};

// Broken precondition in a caller. Distinct from data errors so tests can
// tell the two apart.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad configuration or input files (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string normalize_name(std::string_view raw);

}  // namespace alchemy

template <>
struct std::hash<alchemy::ItemPair> {
  std::size_t operator()(const alchemy::ItemPair& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.key());
  }
};

#endif  // ALCHEMY_CORE_H_
