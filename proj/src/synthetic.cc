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

#include <algorithm>
#include <array>
#include <set>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "alchemy/kgraph.h"
#include "alchemy/rng.h"

namespace alchemy::kgraph {

namespace {

struct CoreRecipe {
  std::string_view first;
  std::string_view second;
  std::string_view result;
};

// Listed in crafting order: every ingredient appears before it is used.
constexpr CoreRecipe kCore[] = {
    {"air", "air", "pressure"},       {"air", "earth", "dust"},
    {"air", "fire", "energy"},        {"air", "water", "mist"},
    {"earth", "earth", "land"},       {"earth", "fire", "lava"},
    {"earth", "water", "mud"},        {"fire", "fire", "energy"},
    {"fire", "water", "steam"},       {"water", "water", "puddle"},
    {"puddle", "water", "pond"},      {"pond", "water", "lake"},
    {"lake", "water", "sea"},         {"sea", "water", "ocean"},
    {"earth", "pressure", "stone"},   {"air", "lava", "stone"},
    {"fire", "stone", "metal"},       {"air", "stone", "sand"},
    {"fire", "sand", "glass"},        {"lava", "water", "obsidian"},
    {"fire", "mud", "brick"},         {"land", "land", "continent"},
    {"continent", "continent", "planet"}, {"planet", "planet", "solar system"},
    {"air", "pressure", "atmosphere"}, {"atmosphere", "water", "cloud"},
    {"cloud", "water", "rain"},       {"earth", "rain", "plant"},
    {"plant", "plant", "garden"},     {"air", "energy", "wind"},
    {"dust", "fire", "gunpowder"},    {"fire", "gunpowder", "explosion"},
    {"energy", "explosion", "atomic bomb"}, {"earth", "steam", "geyser"},
    {"stone", "stone", "wall"},       {"wall", "wall", "house"},
    {"metal", "stone", "blade"},      {"blade", "blade", "scissors"},
    {"mud", "plant", "swamp"},        {"energy", "swamp", "life"},
    {"land", "life", "soil"},         {"life", "stone", "egg"},
    {"life", "mud", "bacteria"},      {"plant", "soil", "grass"},
    {"mud", "sand", "clay"},          {"clay", "life", "human"},
    {"human", "metal", "tool"},       {"grass", "life", "animal"},
    {"human", "plant", "farmer"},     {"animal", "farmer", "livestock"},
    {"cloud", "livestock", "sheep"},  {"scissors", "sheep", "wool"},
    {"energy", "metal", "electricity"}, {"electricity", "glass", "light bulb"},
    {"air", "cloud", "sky"},          {"fire", "sky", "sun"},
    {"rain", "sun", "rainbow"},       {"earth", "lava", "volcano"},
    {"air", "egg", "bird"},           {"egg", "water", "fish"},
    {"egg", "swamp", "lizard"},       {"glass", "sand", "hourglass"},
    {"metal", "tool", "wire"},        {"human", "tool", "engineer"},
};

constexpr std::string_view kBase[] = {"air", "earth", "fire", "water"};

constexpr std::array<std::string_view, 32> kSyllables = {
    "ka", "lo", "mi", "ra", "ven", "tor", "zel", "qui", "bar", "dun", "fe",
    "gri", "hol", "jas", "mor", "nix", "pel", "sar", "tum", "vor", "wex", "yal",
    "cor", "dra", "el", "fin", "gol", "har", "ist", "lun", "ost", "bri"};

std::string pseudo_word(Rng& rng) {
  const std::size_t parts = 2 + rng.uniform_index(2);
  std::string word;
  for (std::size_t i = 0; i < parts; ++i) word += kSyllables[rng.uniform_index(kSyllables.size())];
  return word;
}

}  // namespace

GraphSource make_surrogate_graph(const SurrogateParams& params) {
  Rng rng(derive_seed(params.seed, {0x1a2b}));

  std::vector<std::string> items;  // creation order
  std::unordered_map<std::string, std::size_t> index;
  std::vector<int> uses;           // times used as an ingredient
  std::vector<char> terminal;      // never used as an ingredient
  auto add_item = [&](std::string name, bool is_terminal) {
    index.emplace(name, items.size());
    items.push_back(std::move(name));
    uses.push_back(0);
    terminal.push_back(is_terminal ? 1 : 0);
  };

  GraphSource source;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  auto add_recipe = [&](std::size_t a, std::size_t b, std::size_t result) {
    if (b < a) std::swap(a, b);
    if (!pairs.emplace(a, b).second) return false;
    ++uses[a];
    if (a != b) ++uses[b];
    source.recipes.push_back({items[a], items[b], items[result]});
    return true;
  };

  for (auto base : kBase) add_item(std::string(base), false);
  for (const auto& r : kCore) {
    if (!index.count(std::string(r.result))) add_item(std::string(r.result), false);
    add_recipe(index.at(std::string(r.first)), index.at(std::string(r.second)),
               index.at(std::string(r.result)));
  }
  if (params.item_count < items.size()) {
    throw ContractViolation("surrogate graph needs at least " + std::to_string(items.size()) + " items");
  }

  const std::size_t fresh = params.item_count - items.size();
  const std::size_t budget =
      params.recipe_count > source.recipes.size() ? params.recipe_count - source.recipes.size() : 0;
  const double mean_recipes = fresh > 0 ? static_cast<double>(budget) / static_cast<double>(fresh) : 0.0;

  // Ingredients favour frequently used items (heavy-tailed empowerment) and
  // recently created ones (deep recipe chains).
  auto pick_ingredient = [&](std::size_t limit, bool recent) {
    const std::size_t window = 60;
    const std::size_t lo = recent && limit > window ? limit - window : 0;
    std::vector<double> weights(limit, 0.0);
    for (std::size_t i = lo; i < limit; ++i) {
      if (!terminal[i]) weights[i] = 1.0 + static_cast<double>(uses[i]);
    }
    return rng.weighted_index(weights);
  };

  std::size_t remaining_budget = budget;
  std::unordered_set<std::string> taken(items.begin(), items.end());
  for (std::size_t k = 0; k < fresh; ++k) {
    std::string name;
    do {
      name = pseudo_word(rng);
    } while (taken.count(name));
    taken.insert(name);
    const std::size_t created = items.size();
    add_item(name, rng.bernoulli(params.final_fraction));

    // Recipes per item: 1 + geometric tail with the right mean.
    const std::size_t items_left = fresh - k;
    std::size_t count = 1;
    const double extra_mean = std::max(0.0, mean_recipes - 1.0);
    const double p_more = extra_mean / (1.0 + extra_mean);
    while (rng.bernoulli(p_more) && count < 40) ++count;
    count = std::min(count, remaining_budget > items_left - 1 ? remaining_budget - (items_left - 1) : 1);
    if (k + 1 == fresh) count = std::max<std::size_t>(count, remaining_budget);

    std::size_t made = 0;
    for (int guard = 0; made < count && guard < 1000; ++guard) {
      const std::size_t a = pick_ingredient(created, rng.bernoulli(0.6));
      const std::size_t b = pick_ingredient(created, false);
      if (add_recipe(a, b, created)) ++made;
    }
    remaining_budget -= std::min(remaining_budget, made);
  }

  source.items = items;
  for (auto base : kBase) source.base_items.emplace_back(base);
  return source;
}

}  // namespace alchemy::kgraph
