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

#ifndef ALCHEMY_KGRAPH_H_
#define ALCHEMY_KGRAPH_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alchemy/core.h"

namespace alchemy::kgraph {

struct Recipe {
  ItemPair pair;
  ItemId result;

  friend bool operator==(const Recipe&, const Recipe&) = default;
};

// Recipe expressed with item names, as it appears in files.
struct NamedRecipe {
  std::string first;
  std::string second;
  std::string result;
};

// Name-level description of a graph. This is what the recipe file holds.
struct GraphSource {
  std::vector<std::string> items;
  std::vector<std::string> base_items;
  std::vector<NamedRecipe> recipes;
};

// Malformed recipe file. line/column are 1-based and 0 when unknown.
class GraphLoadError : public ConfigError {
 public:
  GraphLoadError(const std::string& message, std::size_t line = 0, std::size_t column = 0);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Immutable crafting graph: items with dense ids plus a map from unordered
// item pairs to the single item they produce. Safe to share read-only.
class KnowledgeGraph {
 public:
  struct Partner {
    ItemId other;
    ItemId result;
  };

  // Normalizes names, assigns ids in sorted name order and validates.
  // Throws GraphLoadError on unknown names, duplicate items or conflicting
  // recipes. Recoverable problems are reported through warnings().
  static KnowledgeGraph build(const GraphSource& source);

  std::size_t item_count() const { return names_.size(); }
  std::size_t recipe_count() const { return recipes_.size(); }
  bool is_valid(ItemId id) const { return index_of(id) < names_.size(); }

  // Throws ContractViolation when id is outside [0, item_count).
  void require_valid(ItemId id) const;

  const std::string& name(ItemId id) const;
  std::span<const std::string> names() const { return names_; }

  // Lookup after normalization.
  std::optional<ItemId> find(std::string_view name) const;

  std::optional<ItemId> combine(ItemId a, ItemId b) const;
  std::optional<ItemId> combine(ItemPair pair) const { return combine(pair.first(), pair.second()); }

  // Number of recipe pairs the item participates in; a self-pair counts once.
  int empowerment(ItemId id) const;

  // All recipes, sorted by pair.
  std::span<const Recipe> recipes() const { return recipes_; }
  std::span<const ItemId> base_items() const { return base_items_; }
  bool is_base(ItemId id) const;

  // Pairs involving id. A self-pair appears once with other == id.
  std::span<const Partner> partners(ItemId id) const;
  // Pairs that produce id.
  std::span<const ItemPair> producers(ItemId id) const;

  std::span<const std::string> warnings() const { return warnings_; }

  GraphSource to_source() const;

  // Same structure under new names, ids unchanged. names[i] renames item i.
  KnowledgeGraph renamed(const std::vector<std::string>& names) const;

 private:
  KnowledgeGraph() = default;
  void index();

  std::vector<std::string> names_;
  std::unordered_map<std::string, ItemId> by_name_;
  std::vector<Recipe> recipes_;
  std::unordered_map<std::uint64_t, ItemId> by_pair_;
  std::vector<ItemId> base_items_;
  std::vector<int> empowerment_;
  std::vector<std::vector<Partner>> partners_;
  std::vector<std::vector<ItemPair>> producers_;
  std::vector<std::string> warnings_;
};

// Parses the canonical recipe file: {"items": [...], "base_items": [...],
// "recipes": [{"first", "second", "result"}, ...]}.
KnowledgeGraph load_graph(std::string_view bytes);
KnowledgeGraph load_graph_file(const std::filesystem::path& path);

// Serializes to the canonical recipe file schema (pretty printed, stable).
std::string dump_graph(const KnowledgeGraph& graph);

// Reads Wordcraft-style JSON ({"entities": {name: {"recipes": [[a, b], ...]}}})
// into the canonical form. Pairs that yield several items keep only the
// lexicographically smallest result; each collapse adds a warning.
GraphSource convert_wordcraft(std::string_view bytes, std::vector<std::string>* warnings);

// layer[0] = seed, layer[k+1] = layer[k] plus everything craftable from it.
// Stops once a layer repeats, so the result holds min(max_steps, f) + 1 sorted
// layers where f is the first step at which the fixpoint shows.
std::vector<std::vector<ItemId>> reachable_closure(const KnowledgeGraph& graph,
                                                   std::span<const ItemId> seed, int max_steps);

// Fewest crafting steps (one new item per step, products reusable) needed to
// obtain target from seed, or nullopt if more than cap are needed.
std::optional<int> min_craft_depth(const KnowledgeGraph& graph, std::span<const ItemId> seed,
                                   ItemId target, int cap);

struct ScrambledGraph {
  KnowledgeGraph graph;
  std::map<std::string, std::string> mapping;  // original name -> scrambled name
};

// Renames every item to a distinct random five-letter lowercase string. Ids
// and recipe structure are preserved.
ScrambledGraph scramble_semantics(const KnowledgeGraph& graph, std::uint64_t seed);

std::string dump_mapping(const std::map<std::string, std::string>& mapping);

struct SurrogateParams {
  std::size_t item_count = 720;
  std::size_t recipe_count = 3452;
  double final_fraction = 0.2;  // share of generated items never used as ingredients
  std::uint64_t seed = 2024;
};

// Stand-in for the Little Alchemy 2 graph: a hand-written core of familiar
// combinations starting from air, earth, fire and water, grown with
// procedurally named items until item_count and recipe_count are met. Every
// item is craftable from the four base items.
GraphSource make_surrogate_graph(const SurrogateParams& params);

}  // namespace alchemy::kgraph

#endif  // ALCHEMY_KGRAPH_H_
