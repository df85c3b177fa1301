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

#include "alchemy/env.h"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alchemy/hash.h"

namespace alchemy::env {

using kgraph::KnowledgeGraph;
using nlohmann::json;

EpisodeState EpisodeState::start(const Task& task, std::size_t item_count) {
  EpisodeState state;
  state.owned_.assign(item_count, 0);
  state.horizon_ = task.horizon;
  for (ItemId id : task.initial_items) {
    if (index_of(id) >= item_count) throw ContractViolation("initial item outside the graph");
    if (!state.has(id)) state.add({id, -1, Acquisition::kInitial, -1});
  }
  return state;
}

std::vector<ItemId> EpisodeState::inventory() const {
  std::vector<ItemId> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.item);
  return out;
}

bool EpisodeState::has(ItemId item) const {
  return index_of(item) < owned_.size() && owned_[index_of(item)] != 0;
}

void EpisodeState::add(InventoryEntry entry) {
  owned_[index_of(entry.item)] = 1;
  entries_.push_back(entry);
}

bool EpisodeState::receive_copy(ItemId item, int step, int source_agent) {
  if (index_of(item) >= owned_.size()) throw ContractViolation("copied item outside the graph");
  if (has(item)) return false;
  add({item, step, Acquisition::kCopied, source_agent});
  return true;
}

void EpisodeState::spend_step() {
  if (finished()) throw ContractViolation("spend_step: episode already finished");
  ++step_;
}

const char* to_string(StepOutcome::Kind kind) {
  switch (kind) {
    case StepOutcome::Kind::kNewItem: return "NewItem";
    case StepOutcome::Kind::kDuplicateResult: return "DuplicateResult";
    case StepOutcome::Kind::kInvalidCombo: return "InvalidCombo";
    case StepOutcome::Kind::kRepeatedAttempt: return "RepeatedAttempt";
  }
  return "?";
}

std::optional<StepOutcome::Kind> outcome_kind_from_string(std::string_view text) {
  for (auto kind : {StepOutcome::Kind::kNewItem, StepOutcome::Kind::kDuplicateResult,
                    StepOutcome::Kind::kInvalidCombo, StepOutcome::Kind::kRepeatedAttempt}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

StepResult step(const KnowledgeGraph& graph, EpisodeState state, Action action) {
  if (state.finished()) throw ContractViolation("step: episode is over");
  for (ItemId id : {action.first(), action.second()}) {
    graph.require_valid(id);
    if (!state.has(id)) {
      throw ContractViolation("step: item '" + graph.name(id) + "' is not in the inventory");
    }
  }
  const int at = state.step_;
  if (state.attempted(action)) {
    ++state.repetition_count_;
    return {std::move(state), {StepOutcome::Kind::kRepeatedAttempt, std::nullopt, at}};
  }
  state.attempted_.insert(action.key());
  ++state.step_;
  auto result = graph.combine(action);
  if (!result) {
    state.invalid_.push_back({action, at});
    return {std::move(state), {StepOutcome::Kind::kInvalidCombo, std::nullopt, at}};
  }
  state.valid_.push_back({action, *result, at});
  if (state.has(*result)) {
    return {std::move(state), {StepOutcome::Kind::kDuplicateResult, result, at}};
  }
  state.add({*result, at, Acquisition::kCrafted, -1});
  return {std::move(state), {StepOutcome::Kind::kNewItem, result, at}};
}

namespace {

constexpr int kMaxTaskRetries = 100;
constexpr int kMaxDepth = 4;

// Recipe tree with `depth` internal nodes, returned as its distinct leaves.
std::optional<std::vector<ItemId>> sample_recipe_tree(const KnowledgeGraph& graph, ItemId target,
                                                      int depth, Rng& rng) {
  auto producers = graph.producers(target);
  const ItemPair root = producers[rng.uniform_index(producers.size())];
  std::vector<ItemId> leaves{root.first(), root.second()};
  for (int level = 1; level < depth; ++level) {
    std::vector<std::size_t> expandable;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!graph.producers(leaves[i]).empty() && !graph.is_base(leaves[i])) expandable.push_back(i);
    }
    if (expandable.empty()) return std::nullopt;
    const std::size_t pick = expandable[rng.uniform_index(expandable.size())];
    auto sub = graph.producers(leaves[pick]);
    const ItemPair pair = sub[rng.uniform_index(sub.size())];
    leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
    leaves.push_back(pair.first());
    leaves.push_back(pair.second());
  }
  std::vector<ItemId> sorted = leaves;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return std::nullopt;
  if (std::binary_search(sorted.begin(), sorted.end(), target)) return std::nullopt;
  return leaves;
}

bool keeps_depth(const KnowledgeGraph& graph, const std::vector<ItemId>& items, ItemId target,
                 int depth) {
  return kgraph::min_craft_depth(graph, items, target, depth) == depth;
}

// True when some crafting sequence of exactly `depth` steps reaches the
// target with `candidate` among its ingredients. Items derived from the
// candidate are tracked as tainted.
bool on_minimal_path(const KnowledgeGraph& graph, const std::vector<ItemId>& items, ItemId candidate,
                     ItemId target, int depth) {
  using Inventory = std::vector<std::pair<ItemId, bool>>;
  std::set<Inventory> seen;
  std::function<bool(const Inventory&, int)> search = [&](const Inventory& inv, int left) {
    if (!seen.insert(inv).second) return false;
    for (std::size_t i = 0; i < inv.size(); ++i) {
      for (std::size_t j = i; j < inv.size(); ++j) {
        const auto result = graph.combine(inv[i].first, inv[j].first);
        if (!result) continue;
        const bool tainted = inv[i].second || inv[j].second;
        if (*result == target) {
          if (tainted && left == 1) return true;
          continue;
        }
        if (left == 1) continue;
        auto owned = std::find_if(inv.begin(), inv.end(), [&](const auto& e) { return e.first == *result; });
        if (owned != inv.end()) continue;
        Inventory next = inv;
        next.insert(std::upper_bound(next.begin(), next.end(), std::pair{*result, tainted}), {*result, tainted});
        if (search(next, left - 1)) return true;
      }
    }
    return false;
  };
  Inventory start;
  for (ItemId id : items) start.emplace_back(id, id == candidate);
  std::sort(start.begin(), start.end());
  return search(start, depth);
}

}  // namespace

Task sample_targeted_task(const KnowledgeGraph& graph, int depth, int distractors, Rng& rng,
                          int horizon) {
  if (depth < 1 || depth > kMaxDepth) {
    throw ContractViolation("sample_targeted_task: depth must lie in [1, 4]");
  }
  if (distractors < 0) throw ContractViolation("sample_targeted_task: distractors must be >= 0");
  if (horizon <= 0) throw ContractViolation("sample_targeted_task: horizon must be positive");

  std::vector<ItemId> targets;
  for (std::size_t i = 0; i < graph.item_count(); ++i) {
    if (!graph.producers(item_at(i)).empty() && !graph.is_base(item_at(i))) {
      targets.push_back(item_at(i));
    }
  }
  if (targets.empty()) throw TaskGenerationError("graph has no craftable items");

  for (int attempt = 0; attempt < kMaxTaskRetries; ++attempt) {
    const ItemId target = targets[rng.uniform_index(targets.size())];
    auto leaves = sample_recipe_tree(graph, target, depth, rng);
    if (!leaves || !keeps_depth(graph, *leaves, target, depth)) continue;

    std::vector<ItemId> items = *leaves;
    std::vector<char> excluded(graph.item_count(), 0);
    excluded[index_of(target)] = 1;
    for (ItemId id : items) excluded[index_of(id)] = 1;
    std::size_t available = 0;
    for (char e : excluded) available += e ? 0 : 1;

    int added = 0;
    int tries = 0;
    const int max_tries = 100 + 50 * distractors;
    while (added < distractors && available > 0 && tries < max_tries) {
      ++tries;
      const ItemId candidate = item_at(rng.uniform_index(graph.item_count()));
      if (excluded[index_of(candidate)]) continue;
      excluded[index_of(candidate)] = 1;
      --available;
      items.push_back(candidate);
      if (keeps_depth(graph, items, target, depth) && !on_minimal_path(graph, items, candidate, target, depth)) {
        ++added;
      } else {
        items.pop_back();
      }
    }
    if (added < distractors) continue;

    rng.shuffle(items);
    Task task;
    task.initial_items = std::move(items);
    task.target = target;
    task.horizon = horizon;
    task.depth = depth;
    task.distractors = distractors;
    task.task_id = compute_task_id(graph, task);
    return task;
  }
  throw TaskGenerationError("could not generate a depth-" + std::to_string(depth) + " task with " +
                            std::to_string(distractors) + " distractors after " +
                            std::to_string(kMaxTaskRetries) + " attempts");
}

std::vector<Task> sample_task_batch(const KnowledgeGraph& graph, int depth, int distractors,
                                    int count, Rng& rng, int horizon) {
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    tasks.push_back(sample_targeted_task(graph, depth, distractors, rng, horizon));
  }
  return tasks;
}

Task make_open_ended_task(const KnowledgeGraph& graph, const std::vector<std::string>& initial_names,
                          int horizon) {
  if (horizon <= 0) throw ConfigError("open-ended task horizon must be positive");
  Task task;
  std::string unknown;
  for (const auto& name : initial_names) {
    auto id = graph.find(name);
    if (!id) {
      unknown += (unknown.empty() ? "'" : ", '") + name + "'";
      continue;
    }
    if (std::find(task.initial_items.begin(), task.initial_items.end(), *id) ==
        task.initial_items.end()) {
      task.initial_items.push_back(*id);
    }
  }
  if (!unknown.empty()) throw ConfigError("unknown initial items: " + unknown);
  if (task.initial_items.empty()) throw ConfigError("open-ended task needs at least one item");
  task.horizon = horizon;
  task.task_id = compute_task_id(graph, task);
  return task;
}

std::string compute_task_id(const KnowledgeGraph& graph, const Task& task) {
  std::ostringstream key;
  key << (task.is_open_ended() ? "open" : "targeted") << '|';
  for (ItemId id : task.initial_items) key << graph.name(id) << ',';
  key << '|' << (task.target ? graph.name(*task.target) : "") << '|' << task.horizon << '|'
      << task.depth.value_or(-1) << '|' << task.distractors.value_or(-1);
  return "task-" + sha256_hex(key.str()).substr(0, 12);
}

bool is_success(const Task& task, const EpisodeState& state) {
  if (!task.target) throw ContractViolation("is_success: open-ended tasks have no target");
  return state.has(*task.target);
}

namespace {

std::string quote(const KnowledgeGraph& graph, ItemId id) { return "'" + graph.name(id) + "'"; }

std::string render_pair(const KnowledgeGraph& graph, ItemPair pair) {
  return quote(graph, pair.first()) + " and " + quote(graph, pair.second());
}

template <typename Seq, typename Fn>
std::string bracketed(const Seq& seq, Fn&& fn) {
  std::string out = "[";
  bool first = true;
  for (const auto& v : seq) {
    if (!first) out += ", ";
    out += fn(v);
    first = false;
  }
  return out + "]";
}

}  // namespace

std::string render_state_prompt(const KnowledgeGraph& graph, const Task& task,
                                const EpisodeState& state, const SocialView* social) {
  auto valid = [&](const ValidAttempt& a) {
    return render_pair(graph, a.pair) + " -> " + quote(graph, a.result);
  };
  auto invalid = [&](const InvalidAttempt& a) { return render_pair(graph, a.pair); };

  std::string out = "<Current task>\n";
  out += "Inventory: " +
         bracketed(state.entries(), [&](const InventoryEntry& e) { return quote(graph, e.item); }) +
         "\n";
  if (task.target) out += "Target: " + quote(graph, *task.target) + "\n";
  out += "Remaining rounds: " + std::to_string(state.remaining()) + "\n";
  out += "Task valid combinations: " + bracketed(state.valid_attempts(), valid) + "\n";
  out += "Task invalid combinations: " + bracketed(state.invalid_attempts(), invalid) + "\n";
  if (social != nullptr) {
    out += "Other players' valid combinations: " + bracketed(social->others_valid, valid) + "\n";
    out += "Other players' invalid combinations: " + bracketed(social->others_invalid, invalid) +
           "\n";
  }
  return out;
}

std::string dump_tasks(const KnowledgeGraph& graph, const std::vector<Task>& tasks) {
  json doc = json::array();
  for (const auto& task : tasks) {
    json record;
    record["task_id"] = task.task_id;
    json initial = json::array();
    for (ItemId id : task.initial_items) initial.push_back(graph.name(id));
    record["initial_items"] = std::move(initial);
    record["target"] = task.target ? json(graph.name(*task.target)) : json(nullptr);
    record["horizon"] = task.horizon;
    record["depth"] = task.depth ? json(*task.depth) : json(nullptr);
    record["distractors"] = task.distractors ? json(*task.distractors) : json(nullptr);
    doc.push_back(std::move(record));
  }
  return doc.dump(1) + "\n";
}

std::vector<Task> load_tasks(const KnowledgeGraph& graph, std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("task batch is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError("task batch must be a JSON array");
  auto resolve = [&graph](const json& value) {
    if (!value.is_string()) throw ConfigError("task item names must be strings");
    auto id = graph.find(value.get<std::string>());
    if (!id) throw ConfigError("task refers to unknown item '" + value.get<std::string>() + "'");
    return *id;
  };
  std::vector<Task> tasks;
  for (const auto& record : doc) {
    try {
      Task task;
      for (const auto& name : record.at("initial_items")) task.initial_items.push_back(resolve(name));
      if (!record.at("target").is_null()) task.target = resolve(record.at("target"));
      task.horizon = record.at("horizon").get<int>();
      if (record.contains("depth") && !record["depth"].is_null()) task.depth = record["depth"].get<int>();
      if (record.contains("distractors") && !record["distractors"].is_null()) {
        task.distractors = record["distractors"].get<int>();
      }
      task.task_id = record.contains("task_id") ? record["task_id"].get<std::string>()
                                                : compute_task_id(graph, task);
      if (task.target && std::find(task.initial_items.begin(), task.initial_items.end(),
                                   *task.target) != task.initial_items.end()) {
        throw ConfigError("task " + task.task_id + " lists its target among the initial items");
      }
      tasks.push_back(std::move(task));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed task record: ") + e.what());
    }
  }
  return tasks;
}

}  // namespace alchemy::env
