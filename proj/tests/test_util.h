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

#ifndef ALCHEMY_TESTS_TEST_UTIL_H_
#define ALCHEMY_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "alchemy/kgraph.h"
#include "alchemy/rng.h"

namespace alchemy::testing {

using RecipeList = std::vector<std::tuple<std::string, std::string, std::string>>;

// Items are collected from the recipes plus any extra names.
inline kgraph::KnowledgeGraph make_graph(const RecipeList& recipes, std::vector<std::string> base,
                                         std::vector<std::string> extra = {}) {
  kgraph::GraphSource src;
  std::set<std::string> items(base.begin(), base.end());
  items.insert(extra.begin(), extra.end());
  for (const auto& [a, b, r] : recipes) {
    items.insert(a);
    items.insert(b);
    items.insert(r);
    src.recipes.push_back({a, b, r});
  }
  src.items.assign(items.begin(), items.end());
  src.base_items = std::move(base);
  return kgraph::KnowledgeGraph::build(src);
}

// air, earth, fire, water and a handful of familiar combinations.
inline kgraph::KnowledgeGraph elements_graph() {
  return make_graph({{"fire", "water", "steam"},
                     {"earth", "water", "mud"},
                     {"air", "fire", "energy"},
                     {"earth", "fire", "lava"},
                     {"air", "water", "rain"},
                     {"air", "earth", "dust"},
                     {"air", "lava", "stone"},
                     {"stone", "stone", "wall"},
                     {"fire", "stone", "metal"},
                     {"energy", "steam", "engine"}},
                    {"air", "earth", "fire", "water"});
}

// Random graph: the first `base` items are base items; every pair of items
// is a recipe with probability density, result drawn uniformly.
inline kgraph::KnowledgeGraph random_graph(std::uint64_t seed, int items, int base, double density) {
  Rng rng(seed);
  kgraph::GraphSource src;
  for (int i = 0; i < items; ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "i%02d", i);
    src.items.push_back(name);
  }
  for (int i = 0; i < base; ++i) src.base_items.push_back(src.items[static_cast<std::size_t>(i)]);
  for (int a = 0; a < items; ++a) {
    for (int b = a; b < items; ++b) {
      if (!rng.bernoulli(density)) continue;
      const auto r = rng.uniform_index(static_cast<std::size_t>(items));
      src.recipes.push_back({src.items[static_cast<std::size_t>(a)], src.items[static_cast<std::size_t>(b)],
                             src.items[r]});
    }
  }
  return kgraph::KnowledgeGraph::build(src);
}

// Fewest crafting steps by breadth-first search over inventory sets, each
// step adding one craftable item. Exponential; small graphs only.
inline std::optional<int> bfs_depth(const kgraph::KnowledgeGraph& g, const std::vector<ItemId>& seed, ItemId target,
                                    int cap) {
  std::set<ItemId> start(seed.begin(), seed.end());
  if (start.count(target)) return 0;
  std::set<std::set<ItemId>> frontier{start};
  for (int depth = 1; depth <= cap; ++depth) {
    std::set<std::set<ItemId>> next;
    for (const auto& inv : frontier) {
      for (auto a = inv.begin(); a != inv.end(); ++a) {
        for (auto b = a; b != inv.end(); ++b) {
          auto r = g.combine(*a, *b);
          if (!r || inv.count(*r)) continue;
          if (*r == target) return depth;
          auto grown = inv;
          grown.insert(*r);
          next.insert(std::move(grown));
        }
      }
    }
    if (next.empty()) return std::nullopt;
    frontier = std::move(next);
  }
  return std::nullopt;
}

// Shared surrogate graph, built once per test binary.
inline const kgraph::KnowledgeGraph& surrogate() {
  static const kgraph::KnowledgeGraph graph = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  return graph;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("alchemy_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<ItemId> ids(const kgraph::KnowledgeGraph& g, const std::vector<std::string>& names) {
  std::vector<ItemId> out;
  for (const auto& n : names) out.push_back(*g.find(n));
  return out;
}

}  // namespace alchemy::testing

#endif  // ALCHEMY_TESTS_TEST_UTIL_H_
