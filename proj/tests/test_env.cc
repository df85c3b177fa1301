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

#include <set>

#include <doctest.h>

#include "alchemy/env.h"
#include "golden_fixtures.h"
#include "test_util.h"

namespace alchemy::env {
namespace {

using testing::elements_graph;
using testing::ids;
using testing::make_graph;

Task task_with(const kgraph::KnowledgeGraph& g, std::vector<std::string> items, std::optional<std::string> target,
               int horizon) {
  Task t;
  t.initial_items = ids(g, items);
  if (target) t.target = *g.find(*target);
  t.horizon = horizon;
  return t;
}

TEST_CASE("fire and water craft steam") {
  const auto g = elements_graph();
  const Task t = task_with(g, {"fire", "water"}, "steam", 6);
  EpisodeState s = EpisodeState::start(t, g.item_count());
  CHECK_FALSE(is_success(t, s));
  auto r = step(g, s, ItemPair(*g.find("water"), *g.find("fire")));
  CHECK(r.outcome.kind == StepOutcome::Kind::kNewItem);
  CHECK(r.outcome.item == g.find("steam"));
  CHECK(r.outcome.step_index == 0);
  CHECK(r.state.has(*g.find("steam")));
  CHECK(r.state.step() == 1);
  CHECK(r.state.remaining() == 5);
  CHECK(is_success(t, r.state));
  // the input state is untouched
  CHECK(s.step() == 0);
  CHECK_FALSE(s.has(*g.find("steam")));
}

TEST_CASE("repeated attempts do not consume a step") {
  const auto g = elements_graph();
  const Task t = task_with(g, {"fire", "water"}, std::nullopt, 6);
  const ItemPair fw(*g.find("fire"), *g.find("water"));
  auto r1 = step(g, EpisodeState::start(t, g.item_count()), fw);
  auto r2 = step(g, r1.state, fw);
  CHECK(r2.outcome.kind == StepOutcome::Kind::kRepeatedAttempt);
  CHECK(r2.state.step() == 1);
  CHECK(r2.state.repetition_count() == 1);
  CHECK(r2.state.inventory() == r1.state.inventory());
  CHECK(r2.state.valid_attempts() == r1.state.valid_attempts());
  r2.state.spend_step();
  CHECK(r2.state.step() == 2);
}

TEST_CASE("invalid combinations and duplicate results consume a step") {
  const auto g = make_graph({{"a", "b", "c"}, {"a", "a", "c"}}, {"a", "b"});
  const Task t = task_with(g, {"a", "b"}, std::nullopt, 5);
  auto r = step(g, EpisodeState::start(t, g.item_count()), ItemPair(*g.find("a"), *g.find("b")));
  CHECK(r.outcome.kind == StepOutcome::Kind::kNewItem);
  r = step(g, r.state, ItemPair(*g.find("a"), *g.find("a")));
  CHECK(r.outcome.kind == StepOutcome::Kind::kDuplicateResult);
  CHECK(r.outcome.item == g.find("c"));
  CHECK(r.state.inventory_size() == 3);
  CHECK(r.state.valid_attempts().size() == 2);
  r = step(g, r.state, ItemPair(*g.find("b"), *g.find("b")));
  CHECK(r.outcome.kind == StepOutcome::Kind::kInvalidCombo);
  CHECK_FALSE(r.outcome.item);
  CHECK(r.state.invalid_attempts().size() == 1);
  CHECK(r.state.step() == 3);
}

TEST_CASE("step contract violations") {
  const auto g = elements_graph();
  const Task t = task_with(g, {"fire", "water"}, std::nullopt, 1);
  EpisodeState s = EpisodeState::start(t, g.item_count());
  CHECK_THROWS_AS(step(g, s, ItemPair(*g.find("fire"), *g.find("earth"))), ContractViolation);
  s = step(g, s, ItemPair(*g.find("fire"), *g.find("fire"))).state;
  CHECK(s.finished());
  CHECK_THROWS_AS(step(g, s, ItemPair(*g.find("fire"), *g.find("water"))), ContractViolation);
  CHECK_THROWS_AS(s.spend_step(), ContractViolation);
  CHECK_THROWS_AS(is_success(t, s), ContractViolation);
}

TEST_CASE("random walks keep the episode invariants") {
  const auto g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Task t = make_open_ended_task(g, {"air", "earth", "fire", "water"}, 60);
    EpisodeState s = EpisodeState::start(t, g.item_count());
    std::size_t last_size = s.inventory_size();
    while (!s.finished()) {
      const auto inv = s.inventory();
      const ItemPair a(inv[rng.uniform_index(inv.size())], inv[rng.uniform_index(inv.size())]);
      auto r = step(g, s, a);
      s = std::move(r.state);
      if (r.outcome.kind == StepOutcome::Kind::kRepeatedAttempt) s.spend_step();
      REQUIRE(s.inventory_size() >= last_size);
      last_size = s.inventory_size();
    }
    std::set<ItemId> allowed(t.initial_items.begin(), t.initial_items.end());
    std::set<std::uint64_t> pairs;
    for (const auto& v : s.valid_attempts()) {
      CHECK(g.combine(v.pair) == v.result);
      allowed.insert(v.result);
      CHECK(pairs.insert(v.pair.key()).second);
    }
    for (const auto& v : s.invalid_attempts()) {
      CHECK_FALSE(g.combine(v.pair));
      CHECK(pairs.insert(v.pair.key()).second);
    }
    const auto inv = s.inventory();
    CHECK(std::set<ItemId>(inv.begin(), inv.end()) == allowed);
    CHECK(s.step() <= s.horizon());
  }
}

TEST_CASE("depth-1 task with five initial items") {
  const auto g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  Rng rng(1);
  const Task t = sample_targeted_task(g, 1, 3, rng);
  CHECK(t.initial_items.size() == 5);
  CHECK(t.depth == 1);
  CHECK(t.distractors == 3);
  CHECK(t.horizon == 6);
  REQUIRE(t.target);
  CHECK(std::find(t.initial_items.begin(), t.initial_items.end(), *t.target) == t.initial_items.end());
  CHECK(kgraph::min_craft_depth(g, t.initial_items, *t.target, 4) == 1);
}

TEST_CASE("forced task on a single-recipe graph") {
  const auto g = make_graph({{"a", "b", "t"}}, {"a", "b"});
  Rng rng(3);
  const Task t = sample_targeted_task(g, 1, 0, rng);
  CHECK(std::set<ItemId>(t.initial_items.begin(), t.initial_items.end()) == std::set<ItemId>{*g.find("a"), *g.find("b")});
  CHECK(t.target == g.find("t"));
  CHECK_THROWS_AS(sample_targeted_task(g, 2, 0, rng), TaskGenerationError);
  CHECK_THROWS_AS(sample_targeted_task(g, 1, 5, rng), TaskGenerationError);
  CHECK_THROWS_AS(sample_targeted_task(g, 0, 0, rng), ContractViolation);
}

TEST_CASE("distractors never open another minimal path") {
  // t = (a + b) + c, and also t = (x + a) + c; y and z are unrelated
  const auto g = make_graph({{"a", "b", "m"}, {"m", "c", "t"}, {"x", "a", "n"}, {"n", "c", "t"}, {"y", "y", "z"}},
                            {"a", "b", "c", "x", "y"});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const Task t = sample_targeted_task(g, 2, 1, rng);
    const std::set<ItemId> items(t.initial_items.begin(), t.initial_items.end());
    CHECK(t.target == g.find("t"));
    CHECK_FALSE((items.count(*g.find("b")) && items.count(*g.find("x"))));
    CHECK((items.count(*g.find("y")) + items.count(*g.find("z"))) == 1);
  }
}

TEST_CASE("depth-1 distractors never pair into the target") {
  const auto g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  Rng rng(8);
  for (const auto& t : sample_task_batch(g, 1, 6, 200, rng)) {
    int target_pairs = 0;
    for (std::size_t i = 0; i < t.initial_items.size(); ++i) {
      for (std::size_t j = i; j < t.initial_items.size(); ++j) {
        target_pairs += g.combine(t.initial_items[i], t.initial_items[j]) == t.target;
      }
    }
    CHECK(target_pairs == 1);
  }
}

TEST_CASE("sampled depth-2 tasks are certified by an independent search") {
  const auto g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  Rng rng(2);
  const auto tasks = sample_task_batch(g, 2, 3, 100, rng);
  REQUIRE(tasks.size() == 100);
  for (const auto& t : tasks) {
    CHECK(t.initial_items.size() == 6);
    CHECK(testing::bfs_depth(g, t.initial_items, *t.target, 3) == 2);
  }
}

TEST_CASE("task sampling is deterministic and ids are stable") {
  const auto g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  Rng a(5), b(5);
  const auto x = sample_task_batch(g, 1, 3, 10, a);
  const auto y = sample_task_batch(g, 1, 3, 10, b);
  CHECK(x == y);
  for (const auto& t : x) CHECK(t.task_id == compute_task_id(g, t));
  const Task o1 = make_open_ended_task(g, {"air", "earth", "fire", "water"}, 200);
  const Task o2 = make_open_ended_task(g, {"air", "earth", "fire", "water"}, 200);
  CHECK(o1.task_id == o2.task_id);
  CHECK(o1.is_open_ended());
  CHECK(o1.horizon == 200);
  CHECK_FALSE(o1.depth);
}

TEST_CASE("open-ended tasks") {
  const auto g = elements_graph();
  const Task single = make_open_ended_task(g, {"fire"}, 1);
  EpisodeState s = EpisodeState::start(single, g.item_count());
  CHECK(s.inventory_size() == 1);
  try {
    make_open_ended_task(g, {"fire", "dragon", "unicorn"}, 10);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'dragon'") != std::string::npos);
    CHECK(msg.find("'unicorn'") != std::string::npos);
  }
}

TEST_CASE("task batches round trip through names") {
  const auto g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph({}));
  Rng rng(8);
  const auto tasks = sample_task_batch(g, 1, 6, 5, rng);
  const auto loaded = load_tasks(g, dump_tasks(g, tasks));
  CHECK(loaded == tasks);
  CHECK_THROWS_AS(load_tasks(g, "{}"), ConfigError);
  CHECK_THROWS_AS(load_tasks(g, R"([{"initial_items": ["nope"], "horizon": 6}])"), ConfigError);
}

TEST_CASE("state prompt fields") {
  const auto g = elements_graph();
  const Task open = make_open_ended_task(g, {"air", "earth", "fire", "water"}, 200);
  const std::string fresh = render_state_prompt(g, open, EpisodeState::start(open, g.item_count()), nullptr);
  CHECK(fresh.find("Target:") == std::string::npos);
  CHECK(fresh.find("Remaining rounds: 200") != std::string::npos);
  CHECK(fresh.find("Task valid combinations: []") != std::string::npos);
  CHECK(fresh.find("Task invalid combinations: []") != std::string::npos);
  CHECK(fresh.find("Other players'") == std::string::npos);
  const SocialView empty;
  CHECK(render_state_prompt(g, open, EpisodeState::start(open, g.item_count()), &empty)
            .find("Other players' valid combinations: []") != std::string::npos);
}

TEST_CASE("state prompt snapshot for a scripted three-step episode") {
  const std::string snapshot = testing::state_prompt_snapshot();
  CHECK(testing::matches_golden("state_prompt.txt", snapshot));
  CHECK(testing::state_prompt_snapshot() == snapshot);
  CHECK(snapshot.find("Target: 'engine'") != std::string::npos);
}

TEST_CASE("outcome names round trip") {
  for (auto k : {StepOutcome::Kind::kNewItem, StepOutcome::Kind::kDuplicateResult, StepOutcome::Kind::kInvalidCombo,
                 StepOutcome::Kind::kRepeatedAttempt}) {
    CHECK(outcome_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(outcome_kind_from_string("Bogus"));
}

}  // namespace
}  // namespace alchemy::env
