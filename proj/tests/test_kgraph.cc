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
#include <regex>
#include <set>

#include <doctest.h>

#include "alchemy/kgraph.h"
#include "test_util.h"

namespace alchemy::kgraph {
namespace {

using testing::elements_graph;
using testing::ids;
using testing::make_graph;
using testing::random_graph;

TEST_CASE("fire and water make steam") {
  const KnowledgeGraph g = elements_graph();
  const ItemId fire = *g.find("fire");
  const ItemId water = *g.find("water");
  REQUIRE(g.combine(fire, water));
  CHECK(g.name(*g.combine(fire, water)) == "steam");
  CHECK(g.combine(water, fire) == g.combine(fire, water));
  CHECK_FALSE(g.combine(fire, fire));
  CHECK(g.find("  FIRE ") == fire);
  CHECK_FALSE(g.find("dragon"));
}

TEST_CASE("ids follow sorted names and cover [0, n)") {
  const KnowledgeGraph g = elements_graph();
  for (std::size_t i = 0; i < g.item_count(); ++i) {
    CHECK(g.find(g.name(item_at(i))) == item_at(i));
    if (i > 0) CHECK(g.name(item_at(i - 1)) < g.name(item_at(i)));
  }
  CHECK_THROWS_AS(g.combine(item_at(g.item_count()), item_at(0)), ContractViolation);
  CHECK_THROWS_AS(g.empowerment(item_at(g.item_count())), ContractViolation);
}

TEST_CASE("empty recipe list") {
  const KnowledgeGraph g = load_graph(R"({"items": ["air", "earth", "fire", "water"], "recipes": []})");
  CHECK(g.item_count() == 4);
  CHECK(g.recipe_count() == 0);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) CHECK_FALSE(g.combine(item_at(a), item_at(b)));
  }
}

TEST_CASE("malformed JSON reports line and column") {
  try {
    load_graph("{\n  \"items\": [\"a\",\n  ]\n}");
    FAIL("expected GraphLoadError");
  } catch (const GraphLoadError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("schema errors name the offending location") {
  auto message = [](const char* text) {
    try {
      load_graph(text);
    } catch (const GraphLoadError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"recipes": []})").find("items") != std::string::npos);
  CHECK(message(R"({"items": ["a"], "recipes": [{"first": "a", "second": "a"}]})").find("/recipes/0") !=
        std::string::npos);
  CHECK(message(R"({"items": ["a", 3], "recipes": []})").find("/items/1") != std::string::npos);
  CHECK(message(R"({"items": ["a"], "recipes": [{"first": "a", "second": "b", "result": "a"}]})")
            .find("unknown item 'b'") != std::string::npos);
  CHECK(message(R"({"items": ["a", " A "], "recipes": []})").find("duplicate item") != std::string::npos);
}

TEST_CASE("conflicting duplicate recipes are an error naming the pair") {
  const char* text = R"({"items": ["a", "b", "c", "d"], "recipes": [
      {"first": "a", "second": "b", "result": "c"},
      {"first": "b", "second": "a", "result": "d"}]})";
  try {
    load_graph(text);
    FAIL("expected GraphLoadError");
  } catch (const GraphLoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'a'") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
  }
}

TEST_CASE("identical duplicates and produced base items only warn") {
  const KnowledgeGraph g = load_graph(R"({"items": ["a", "b", "c"], "base_items": ["a", "c"], "recipes": [
      {"first": "a", "second": "b", "result": "c"},
      {"first": "b", "second": "a", "result": "c"}]})");
  CHECK(g.recipe_count() == 1);
  REQUIRE(g.warnings().size() == 2);
  CHECK(g.warnings()[0].find("duplicate") != std::string::npos);
  CHECK(g.warnings()[1].find("'c'") != std::string::npos);
}

TEST_CASE("dump and load round trip") {
  const KnowledgeGraph g = elements_graph();
  const KnowledgeGraph h = load_graph(dump_graph(g));
  CHECK(dump_graph(h) == dump_graph(g));
  CHECK(h.recipe_count() == g.recipe_count());
  CHECK(h.base_items().size() == 4);
}

TEST_CASE("combine matches the recipe table row for row") {
  const KnowledgeGraph g = random_graph(5, 10, 3, 0.3);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> table;
  for (const auto& r : g.to_source().recipes) {
    auto a = index_of(*g.find(r.first)), b = index_of(*g.find(r.second));
    table[std::minmax(a, b)] = index_of(*g.find(r.result));
  }
  for (std::size_t a = 0; a < g.item_count(); ++a) {
    for (std::size_t b = 0; b < g.item_count(); ++b) {
      auto got = g.combine(item_at(a), item_at(b));
      auto it = table.find(std::minmax(a, b));
      if (it == table.end()) {
        CHECK_FALSE(got);
      } else {
        REQUIRE(got);
        CHECK(index_of(*got) == it->second);
      }
      CHECK(got == g.combine(item_at(b), item_at(a)));
    }
  }
}

TEST_CASE("empowerment examples") {
  const KnowledgeGraph g = make_graph({{"x", "a", "p"}, {"x", "x", "q"}}, {"a", "x"}, {"lonely"});
  CHECK(g.empowerment(*g.find("x")) == 2);
  CHECK(g.empowerment(*g.find("a")) == 1);
  CHECK(g.empowerment(*g.find("lonely")) == 0);
  CHECK(g.empowerment(*g.find("q")) == 0);
}

TEST_CASE("empowerment equals a brute-force pair count on random graphs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const KnowledgeGraph g = random_graph(seed, 5 + static_cast<int>(seed % 26), 3, 0.15);
    long total = 0;
    long expected_total = 0;
    for (std::size_t i = 0; i < g.item_count(); ++i) {
      int count = 0;
      for (std::size_t a = 0; a < g.item_count(); ++a) {
        for (std::size_t b = a; b < g.item_count(); ++b) {
          if ((a == i || b == i) && g.combine(item_at(a), item_at(b))) ++count;
        }
      }
      CHECK(g.empowerment(item_at(i)) == count);
      total += g.empowerment(item_at(i));
    }
    for (const auto& r : g.recipes()) expected_total += r.pair.is_self_pair() ? 1 : 2;
    CHECK(total == expected_total);
  }
}

TEST_CASE("reachable_closure examples") {
  const KnowledgeGraph g = make_graph({{"a", "b", "c"}}, {"a", "b"});
  const auto seed = ids(g, {"a", "b"});
  const auto zero = reachable_closure(g, seed, 0);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0] == seed);
  const auto layers = reachable_closure(g, seed, 5);
  REQUIRE(layers.size() >= 2);
  CHECK(layers[1] == ids(g, {"a", "b", "c"}));
  CHECK(layers.back() == layers[1]);
  CHECK_THROWS_AS(reachable_closure(g, std::vector<ItemId>{}, 1), ContractViolation);
}

TEST_CASE("reachable_closure layers are monotone on random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const KnowledgeGraph g = random_graph(seed, 25, 3, 0.08);
    const auto layers = reachable_closure(g, ids(g, {"i00", "i01", "i02"}), 30);
    for (std::size_t k = 1; k < layers.size(); ++k) {
      CHECK(std::includes(layers[k].begin(), layers[k].end(), layers[k - 1].begin(), layers[k - 1].end()));
    }
    CHECK(layers.size() <= g.item_count() + 1);
  }
}

TEST_CASE("min_craft_depth examples") {
  const KnowledgeGraph g = make_graph({{"a", "b", "x"}, {"x", "c", "t"}}, {"a", "b", "c"}, {"island"});
  const auto seed = ids(g, {"a", "b", "c"});
  CHECK(min_craft_depth(g, seed, *g.find("x"), 4) == 1);
  CHECK(min_craft_depth(g, seed, *g.find("t"), 4) == 2);
  CHECK(min_craft_depth(g, seed, *g.find("t"), 1) == std::nullopt);
  CHECK(min_craft_depth(g, seed, *g.find("island"), 4) == std::nullopt);
  CHECK_THROWS_AS(min_craft_depth(g, seed, *g.find("a"), 4), ContractViolation);
}

TEST_CASE("min_craft_depth agrees with breadth-first search over inventories") {
  int defined = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const KnowledgeGraph g = random_graph(100 + seed, 14, 3, 0.1);
    const auto start = ids(g, {"i00", "i01", "i02"});
    for (std::size_t t = 3; t < g.item_count(); ++t) {
      const auto expected = testing::bfs_depth(g, start, item_at(t), 3);
      const auto got = min_craft_depth(g, start, item_at(t), 3);
      CHECK(got == expected);
      if (got) {
        ++defined;
        CHECK(*got >= 1);
      }
    }
  }
  CHECK(defined > 20);
}

TEST_CASE("removing a recipe never decreases depth") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KnowledgeGraph g = random_graph(300 + seed, 12, 3, 0.12);
    GraphSource src = g.to_source();
    if (src.recipes.empty()) continue;
    src.recipes.erase(src.recipes.begin() + static_cast<long>(seed % src.recipes.size()));
    const KnowledgeGraph h = KnowledgeGraph::build(src);
    const auto start = ids(g, {"i00", "i01", "i02"});
    for (std::size_t t = 3; t < g.item_count(); ++t) {
      const auto before = min_craft_depth(g, start, item_at(t), 4);
      const auto after = min_craft_depth(h, start, item_at(t), 4);
      if (after) {
        REQUIRE(before);
        CHECK(*after >= *before);
      }
    }
  }
}

TEST_CASE("scrambling is a deterministic isomorphism to five-letter names") {
  const KnowledgeGraph g = elements_graph();
  const ScrambledGraph s = scramble_semantics(g, 17);
  const ScrambledGraph again = scramble_semantics(g, 17);
  CHECK(s.mapping == again.mapping);
  CHECK(scramble_semantics(g, 18).mapping != s.mapping);
  const std::regex five("[a-z]{5}");
  std::set<std::string> names;
  for (const auto& [from, to] : s.mapping) {
    CHECK(std::regex_match(to, five));
    names.insert(to);
  }
  CHECK(names.size() == g.item_count());
  for (std::size_t a = 0; a < g.item_count(); ++a) {
    CHECK(s.mapping.at(g.name(item_at(a))) == s.graph.name(item_at(a)));
    for (std::size_t b = 0; b < g.item_count(); ++b) {
      CHECK(g.combine(item_at(a), item_at(b)) == s.graph.combine(item_at(a), item_at(b)));
    }
    CHECK(g.empowerment(item_at(a)) == s.graph.empowerment(item_at(a)));
  }
  CHECK(dump_mapping(s.mapping).find("\"steam\"") != std::string::npos);
}

TEST_CASE("wordcraft conversion collapses multi-result pairs") {
  const char* text = R"({"entities": {
      "fire": {"recipes": []}, "water": {"recipes": []},
      "steam": {"recipes": [["fire", "water"]]},
      "cloud": {"recipes": [["Water", "Fire"]]},
      "mist": {"recipes": [["water", "water"]]}}})";
  std::vector<std::string> warnings;
  const KnowledgeGraph g = KnowledgeGraph::build(convert_wordcraft(text, &warnings));
  CHECK(g.item_count() == 5);
  CHECK(g.name(*g.combine(*g.find("fire"), *g.find("water"))) == "cloud");
  CHECK(g.name(*g.combine(*g.find("water"), *g.find("water"))) == "mist");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("'steam'") != std::string::npos);
  CHECK(g.is_base(*g.find("fire")));
}

TEST_CASE("surrogate graph matches the advertised size and is fully reachable") {
  const KnowledgeGraph g = KnowledgeGraph::build(make_surrogate_graph({}));
  CHECK(g.item_count() == 720);
  CHECK(g.recipe_count() == 3452);
  CHECK(g.warnings().empty());
  std::vector<ItemId> base(g.base_items().begin(), g.base_items().end());
  CHECK(base == ids(g, {"air", "earth", "fire", "water"}));
  const auto layers = reachable_closure(g, base, 1000);
  CHECK(layers.back().size() == 720);
  CHECK(g.name(*g.combine(*g.find("fire"), *g.find("water"))) == "steam");
  CHECK(dump_graph(g) == dump_graph(KnowledgeGraph::build(make_surrogate_graph({}))));
}

TEST_CASE("shipped surrogate file equals the generator output") {
  const KnowledgeGraph shipped = load_graph_file(ALCHEMY_DATA_DIR "/la2_surrogate.json");
  CHECK(dump_graph(shipped) == dump_graph(KnowledgeGraph::build(make_surrogate_graph({}))));
}

}  // namespace
}  // namespace alchemy::kgraph
