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

#ifndef ALCHEMY_ENV_H_
#define ALCHEMY_ENV_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "alchemy/core.h"
#include "alchemy/kgraph.h"
#include "alchemy/rng.h"

namespace alchemy::env {

struct Task {
  std::vector<ItemId> initial_items;  // presentation order
  std::optional<ItemId> target;       // absent for open-ended tasks
  int horizon = 0;
  std::optional<int> depth;
  std::optional<int> distractors;
  std::string task_id;

  bool is_open_ended() const { return !target.has_value(); }

  friend bool operator==(const Task&, const Task&) = default;
};

// A crafting action is the unordered pair of items to combine.
using Action = ItemPair;

enum class Acquisition { kInitial, kCrafted, kCopied };

struct InventoryEntry {
  ItemId item;
  int step;          // step during which the item arrived; -1 for initial items
  Acquisition how;
  int source_agent;  // agent the copy came from, -1 otherwise

  friend bool operator==(const InventoryEntry&, const InventoryEntry&) = default;
};

struct ValidAttempt {
  ItemPair pair;
  ItemId result;
  int step;

  friend bool operator==(const ValidAttempt&, const ValidAttempt&) = default;
};

struct InvalidAttempt {
  ItemPair pair;
  int step;

  friend bool operator==(const InvalidAttempt&, const InvalidAttempt&) = default;
};

// Combinations tried by an agent's neighbors, as shown in its prompt.
struct SocialView {
  std::vector<ValidAttempt> others_valid;
  std::vector<InvalidAttempt> others_invalid;

  friend bool operator==(const SocialView&, const SocialView&) = default;
};

class EpisodeState;
struct StepResult;
StepResult step(const kgraph::KnowledgeGraph& graph, EpisodeState state, Action action);

// One agent's progress through one task. Inventory keeps insertion order.
class EpisodeState {
 public:
  static EpisodeState start(const Task& task, std::size_t item_count);

  std::vector<ItemId> inventory() const;
  const std::vector<InventoryEntry>& entries() const { return entries_; }
  std::size_t inventory_size() const { return entries_.size(); }
  bool has(ItemId item) const;
  bool attempted(ItemPair pair) const { return attempted_.count(pair.key()) != 0; }

  const std::vector<ValidAttempt>& valid_attempts() const { return valid_; }
  const std::vector<InvalidAttempt>& invalid_attempts() const { return invalid_; }
  int step() const { return step_; }
  int horizon() const { return horizon_; }
  int remaining() const { return horizon_ - step_; }
  bool finished() const { return step_ >= horizon_; }
  int repetition_count() const { return repetition_count_; }

  // Perfect-copy receipt. Returns false when the item was already owned.
  bool receive_copy(ItemId item, int step, int source_agent);

  // Consumes one step without an attempt; used by the agent loop when a
  // repeated combination is finally executed.
  void spend_step();

  friend bool operator==(const EpisodeState& a, const EpisodeState& b) {
    return a.entries_ == b.entries_ && a.valid_ == b.valid_ && a.invalid_ == b.invalid_ &&
           a.step_ == b.step_ && a.horizon_ == b.horizon_ &&
           a.repetition_count_ == b.repetition_count_;
  }

 private:
  friend StepResult step(const kgraph::KnowledgeGraph&, EpisodeState, Action);

  void add(InventoryEntry entry);

  std::vector<InventoryEntry> entries_;
  std::vector<char> owned_;
  std::unordered_set<std::uint64_t> attempted_;
  std::vector<ValidAttempt> valid_;
  std::vector<InvalidAttempt> invalid_;
  int step_ = 0;
  int horizon_ = 0;
  int repetition_count_ = 0;
};

struct StepOutcome {
  enum class Kind { kNewItem, kDuplicateResult, kInvalidCombo, kRepeatedAttempt };

  Kind kind;
  std::optional<ItemId> item;
  int step_index;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

const char* to_string(StepOutcome::Kind kind);
std::optional<StepOutcome::Kind> outcome_kind_from_string(std::string_view text);

struct StepResult {
  EpisodeState state;
  StepOutcome outcome;
};

// Applies one crafting attempt. A pair that was already attempted returns
// kRepeatedAttempt and only bumps the repetition counter; everything else
// consumes a step. Throws ContractViolation when the episode is over or an
// action item is not owned.
StepResult step(const kgraph::KnowledgeGraph& graph, EpisodeState state, Action action);

class TaskGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backward-samples a recipe tree of the requested depth, certifies the depth
// by forward search and pads with admissible distractors. Initial items are
// returned in shuffled order.
Task sample_targeted_task(const kgraph::KnowledgeGraph& graph, int depth, int distractors, Rng& rng,
                          int horizon = 6);

std::vector<Task> sample_task_batch(const kgraph::KnowledgeGraph& graph, int depth, int distractors,
                                    int count, Rng& rng, int horizon = 6);

// Throws ConfigError listing every name that does not resolve.
Task make_open_ended_task(const kgraph::KnowledgeGraph& graph,
                          const std::vector<std::string>& initial_names, int horizon);

// Content-derived identifier, stable across runs and graph reloads.
std::string compute_task_id(const kgraph::KnowledgeGraph& graph, const Task& task);

// Throws ContractViolation for open-ended tasks.
bool is_success(const Task& task, const EpisodeState& state);

std::string render_state_prompt(const kgraph::KnowledgeGraph& graph, const Task& task,
                                const EpisodeState& state, const SocialView* social);

// Task batch file: JSON array of tasks written with item names.
std::string dump_tasks(const kgraph::KnowledgeGraph& graph, const std::vector<Task>& tasks);
std::vector<Task> load_tasks(const kgraph::KnowledgeGraph& graph, std::string_view bytes);

}  // namespace alchemy::env

#endif  // ALCHEMY_ENV_H_
