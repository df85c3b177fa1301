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

#include "alchemy/kgraph.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alchemy/rng.h"

namespace alchemy::kgraph {

using nlohmann::json;

namespace {

std::string quoted_pair(std::string_view a, std::string_view b) {
  std::string out = "('";
  out.append(a);
  out.append("', '");
  out.append(b);
  out.append("')");
  return out;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = locate(bytes, offset);
    std::ostringstream msg;
    msg << "recipe file is not valid JSON at line " << line << ", column " << column << " (byte "
        << offset << ")";
    throw GraphLoadError(msg.str(), line, column);
  }
}

const std::string& require_string(const json& value, const std::string& where) {
  if (!value.is_string()) throw GraphLoadError(where + ": expected a string");
  return value.get_ref<const std::string&>();
}

const json& require_array(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) throw GraphLoadError(std::string("missing field '") + key + "'");
  if (!it->is_array()) throw GraphLoadError(std::string("field '") + key + "' must be an array");
  return *it;
}

}  // namespace

GraphLoadError::GraphLoadError(const std::string& message, std::size_t line, std::size_t column)
    : ConfigError(message), line_(line), column_(column) {}

KnowledgeGraph KnowledgeGraph::build(const GraphSource& source) {
  KnowledgeGraph graph;

  std::vector<std::string> names;
  names.reserve(source.items.size());
  for (const auto& raw : source.items) {
    std::string name = normalize_name(raw);
    if (name.empty()) throw GraphLoadError("empty item name");
    names.push_back(std::move(name));
  }
  std::sort(names.begin(), names.end());
  if (auto dup = std::adjacent_find(names.begin(), names.end()); dup != names.end()) {
    throw GraphLoadError("duplicate item '" + *dup + "' after normalization");
  }
  graph.names_ = std::move(names);
  for (std::size_t i = 0; i < graph.names_.size(); ++i) {
    graph.by_name_.emplace(graph.names_[i], item_at(i));
  }

  auto resolve = [&graph](const std::string& raw, const char* role) {
    auto id = graph.find(raw);
    if (!id) throw GraphLoadError(std::string("unknown item '") + raw + "' used as " + role);
    return *id;
  };

  for (const auto& raw : source.base_items) graph.base_items_.push_back(resolve(raw, "base item"));
  std::sort(graph.base_items_.begin(), graph.base_items_.end());
  graph.base_items_.erase(std::unique(graph.base_items_.begin(), graph.base_items_.end()),
                          graph.base_items_.end());

  for (const auto& r : source.recipes) {
    ItemPair pair(resolve(r.first, "ingredient"), resolve(r.second, "ingredient"));
    ItemId result = resolve(r.result, "result");
    auto [it, inserted] = graph.by_pair_.emplace(pair.key(), result);
    if (inserted) {
      graph.recipes_.push_back({pair, result});
      continue;
    }
    const std::string pair_text = quoted_pair(graph.name(pair.first()), graph.name(pair.second()));
    if (it->second != result) {
      throw GraphLoadError("conflicting recipes for pair " + pair_text + ": '" +
                           graph.name(it->second) + "' vs '" + graph.name(result) + "'");
    }
    graph.warnings_.push_back("duplicate recipe for pair " + pair_text + " ignored");
  }
  std::sort(graph.recipes_.begin(), graph.recipes_.end(),
            [](const Recipe& a, const Recipe& b) { return a.pair < b.pair; });

  graph.index();
  for (ItemId base : graph.base_items_) {
    if (!graph.producers(base).empty()) {
      graph.warnings_.push_back("base item '" + graph.name(base) + "' is produced by " +
                                std::to_string(graph.producers(base).size()) + " recipe(s)");
    }
  }
  return graph;
}

void KnowledgeGraph::index() {
  const std::size_t n = names_.size();
  empowerment_.assign(n, 0);
  partners_.assign(n, {});
  producers_.assign(n, {});
  for (const auto& r : recipes_) {
    const ItemId a = r.pair.first();
    const ItemId b = r.pair.second();
    ++empowerment_[index_of(a)];
    partners_[index_of(a)].push_back({b, r.result});
    if (a != b) {
      ++empowerment_[index_of(b)];
      partners_[index_of(b)].push_back({a, r.result});
    }
    producers_[index_of(r.result)].push_back(r.pair);
  }
}

void KnowledgeGraph::require_valid(ItemId id) const {
  if (!is_valid(id)) {
    throw ContractViolation("item id " + std::to_string(index_of(id)) + " out of range [0, " +
                            std::to_string(names_.size()) + ")");
  }
}

const std::string& KnowledgeGraph::name(ItemId id) const {
  require_valid(id);
  return names_[index_of(id)];
}

std::optional<ItemId> KnowledgeGraph::find(std::string_view name) const {
  auto it = by_name_.find(normalize_name(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemId> KnowledgeGraph::combine(ItemId a, ItemId b) const {
  require_valid(a);
  require_valid(b);
  auto it = by_pair_.find(ItemPair(a, b).key());
  if (it == by_pair_.end()) return std::nullopt;
  return it->second;
}

int KnowledgeGraph::empowerment(ItemId id) const {
  require_valid(id);
  return empowerment_[index_of(id)];
}

bool KnowledgeGraph::is_base(ItemId id) const {
  return std::binary_search(base_items_.begin(), base_items_.end(), id);
}

std::span<const KnowledgeGraph::Partner> KnowledgeGraph::partners(ItemId id) const {
  require_valid(id);
  return partners_[index_of(id)];
}

std::span<const ItemPair> KnowledgeGraph::producers(ItemId id) const {
  require_valid(id);
  return producers_[index_of(id)];
}

GraphSource KnowledgeGraph::to_source() const {
  GraphSource source;
  source.items = names_;
  std::sort(source.items.begin(), source.items.end());
  for (ItemId id : base_items_) source.base_items.push_back(name(id));
  std::sort(source.base_items.begin(), source.base_items.end());
  for (const auto& r : recipes_) {
    source.recipes.push_back({name(r.pair.first()), name(r.pair.second()), name(r.result)});
  }
  std::sort(source.recipes.begin(), source.recipes.end(), [](const auto& x, const auto& y) {
    return std::tie(x.first, x.second, x.result) < std::tie(y.first, y.second, y.result);
  });
  return source;
}

KnowledgeGraph KnowledgeGraph::renamed(const std::vector<std::string>& names) const {
  if (names.size() != names_.size()) {
    throw ContractViolation("renamed: expected " + std::to_string(names_.size()) + " names");
  }
  KnowledgeGraph graph = *this;
  graph.warnings_.clear();
  graph.by_name_.clear();
  for (std::size_t i = 0; i < names.size(); ++i) {
    graph.names_[i] = normalize_name(names[i]);
    if (graph.names_[i].empty() || !graph.by_name_.emplace(graph.names_[i], item_at(i)).second) {
      throw ContractViolation("renamed: names must be non-empty and distinct");
    }
  }
  return graph;
}

KnowledgeGraph load_graph(std::string_view bytes) {
  const json doc = parse_json(bytes);
  if (!doc.is_object()) throw GraphLoadError("recipe file must hold a JSON object", 1, 1);
  GraphSource source;
  const json& items = require_array(doc, "items");
  for (std::size_t i = 0; i < items.size(); ++i) {
    source.items.push_back(require_string(items[i], "/items/" + std::to_string(i)));
  }
  if (doc.contains("base_items")) {
    const json& base = require_array(doc, "base_items");
    for (std::size_t i = 0; i < base.size(); ++i) {
      source.base_items.push_back(require_string(base[i], "/base_items/" + std::to_string(i)));
    }
  }
  const json& recipes = require_array(doc, "recipes");
  for (std::size_t i = 0; i < recipes.size(); ++i) {
    const std::string where = "/recipes/" + std::to_string(i);
    const json& r = recipes[i];
    if (!r.is_object()) throw GraphLoadError(where + ": expected an object");
    auto field = [&](const char* key) {
      auto it = r.find(key);
      if (it == r.end()) throw GraphLoadError(where + ": missing field '" + key + "'");
      return require_string(*it, where + "/" + key);
    };
    source.recipes.push_back({field("first"), field("second"), field("result")});
  }
  return KnowledgeGraph::build(source);
}

KnowledgeGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open recipe file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_graph(buffer.str());
}

std::string dump_graph(const KnowledgeGraph& graph) {
  const GraphSource source = graph.to_source();
  json doc;
  doc["items"] = source.items;
  doc["base_items"] = source.base_items;
  json recipes = json::array();
  for (const auto& r : source.recipes) {
    recipes.push_back({{"first", r.first}, {"second", r.second}, {"result", r.result}});
  }
  doc["recipes"] = std::move(recipes);
  return doc.dump(1) + "\n";
}

GraphSource convert_wordcraft(std::string_view bytes, std::vector<std::string>* warnings) {
  const json doc = parse_json(bytes);
  const json* entities = &doc;
  if (doc.is_object() && doc.contains("entities")) entities = &doc["entities"];
  if (!entities->is_object()) throw GraphLoadError("wordcraft file must map entity names to objects");

  std::set<std::string> items;
  std::set<std::string> base;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> results;
  for (const auto& [raw_name, entity] : entities->items()) {
    const std::string name = normalize_name(raw_name);
    if (name.empty()) throw GraphLoadError("empty entity name");
    items.insert(name);
    const json* recipes = nullptr;
    if (entity.is_object() && entity.contains("recipes")) recipes = &entity["recipes"];
    if (recipes == nullptr || (recipes->is_array() && recipes->empty())) {
      base.insert(name);
      continue;
    }
    if (!recipes->is_array()) throw GraphLoadError("/entities/" + raw_name + "/recipes must be an array");
    for (std::size_t i = 0; i < recipes->size(); ++i) {
      const json& pair = (*recipes)[i];
      const std::string where = "/entities/" + raw_name + "/recipes/" + std::to_string(i);
      if (!pair.is_array() || pair.size() != 2) throw GraphLoadError(where + ": expected [first, second]");
      std::string a = normalize_name(require_string(pair[0], where + "/0"));
      std::string b = normalize_name(require_string(pair[1], where + "/1"));
      if (b < a) std::swap(a, b);
      items.insert(a);
      items.insert(b);
      results[{a, b}].insert(name);
    }
  }

  GraphSource source;
  source.items.assign(items.begin(), items.end());
  source.base_items.assign(base.begin(), base.end());
  for (const auto& [pair, outs] : results) {
    const std::string& kept = *outs.begin();
    if (outs.size() > 1 && warnings != nullptr) {
      std::string dropped;
      for (auto it = std::next(outs.begin()); it != outs.end(); ++it) {
        dropped += (dropped.empty() ? "'" : ", '") + *it + "'";
      }
      warnings->push_back("pair " + quoted_pair(pair.first, pair.second) + " yields " +
                          std::to_string(outs.size()) + " items; kept '" + kept + "', dropped " +
                          dropped);
    }
    source.recipes.push_back({pair.first, pair.second, kept});
  }
  return source;
}

std::vector<std::vector<ItemId>> reachable_closure(const KnowledgeGraph& graph,
                                                   std::span<const ItemId> seed, int max_steps) {
  if (seed.empty()) throw ContractViolation("reachable_closure: seed must be nonempty");
  if (max_steps < 0) throw ContractViolation("reachable_closure: max_steps must be >= 0");
  std::vector<char> member(graph.item_count(), 0);
  std::vector<ItemId> layer;
  for (ItemId id : seed) {
    graph.require_valid(id);
    if (!member[index_of(id)]) {
      member[index_of(id)] = 1;
      layer.push_back(id);
    }
  }
  std::sort(layer.begin(), layer.end());
  std::vector<std::vector<ItemId>> layers{layer};
  for (int step = 0; step < max_steps; ++step) {
    std::vector<ItemId> next = layers.back();
    for (ItemId a : layers.back()) {
      for (const auto& p : graph.partners(a)) {
        if (member[index_of(p.other)] && !member[index_of(p.result)]) next.push_back(p.result);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    const bool fixpoint = next.size() == layers.back().size();
    for (ItemId id : next) member[index_of(id)] = 1;
    layers.push_back(std::move(next));
    if (fixpoint) break;
  }
  return layers;
}

namespace {

// Iterative-deepening search over crafting sequences. A state is the set of
// owned items; each move adds one craftable item.
class DepthSearch {
 public:
  DepthSearch(const KnowledgeGraph& graph, ItemId target) : graph_(graph), target_(target) {}

  bool reachable_within(std::vector<ItemId> owned, int budget) {
    std::sort(owned.begin(), owned.end());
    return search(owned, budget);
  }

 private:
  std::vector<ItemId> craftable(const std::vector<ItemId>& owned) const {
    std::vector<ItemId> out;
    for (ItemId a : owned) {
      for (const auto& p : graph_.partners(a)) {
        if (std::binary_search(owned.begin(), owned.end(), p.other) &&
            !std::binary_search(owned.begin(), owned.end(), p.result)) {
          out.push_back(p.result);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool search(const std::vector<ItemId>& owned, int budget) {
    const std::vector<ItemId> next = craftable(owned);
    if (std::binary_search(next.begin(), next.end(), target_)) return true;
    if (budget <= 1 || next.empty()) return false;

    // Parallel-round closure over-approximates sequential reach.
    auto layers = reachable_closure(graph_, owned, budget);
    if (!std::binary_search(layers.back().begin(), layers.back().end(), target_)) return false;

    auto& failed = failed_[budget];
    if (failed.count(owned)) return false;
    for (ItemId item : next) {
      std::vector<ItemId> grown = owned;
      grown.insert(std::upper_bound(grown.begin(), grown.end(), item), item);
      if (search(grown, budget - 1)) return true;
    }
    failed.insert(owned);
    return false;
  }

  const KnowledgeGraph& graph_;
  ItemId target_;
  std::map<int, std::set<std::vector<ItemId>>> failed_;
};

}  // namespace

std::optional<int> min_craft_depth(const KnowledgeGraph& graph, std::span<const ItemId> seed,
                                   ItemId target, int cap) {
  graph.require_valid(target);
  std::vector<ItemId> owned(seed.begin(), seed.end());
  for (ItemId id : owned) {
    graph.require_valid(id);
    if (id == target) throw ContractViolation("min_craft_depth: target already in seed");
  }
  std::sort(owned.begin(), owned.end());
  owned.erase(std::unique(owned.begin(), owned.end()), owned.end());
  if (owned.empty()) return std::nullopt;
  DepthSearch search(graph, target);
  for (int depth = 1; depth <= cap; ++depth) {
    if (search.reachable_within(owned, depth)) return depth;
  }
  return std::nullopt;
}

ScrambledGraph scramble_semantics(const KnowledgeGraph& graph, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x5c4a3b1e}));
  std::set<std::string> used;
  std::vector<std::string> names;
  names.reserve(graph.item_count());
  for (std::size_t i = 0; i < graph.item_count(); ++i) {
    std::string candidate;
    do {
      candidate.clear();
      for (int k = 0; k < 5; ++k) candidate.push_back(static_cast<char>('a' + rng.uniform_index(26)));
    } while (!used.insert(candidate).second);
    names.push_back(std::move(candidate));
  }
  ScrambledGraph out{graph.renamed(names), {}};
  for (std::size_t i = 0; i < names.size(); ++i) out.mapping.emplace(graph.names()[i], names[i]);
  return out;
}

std::string dump_mapping(const std::map<std::string, std::string>& mapping) {
  json doc = json::object();
  for (const auto& [from, to] : mapping) doc[from] = to;
  return doc.dump(1) + "\n";
}

}  // namespace alchemy::kgraph
