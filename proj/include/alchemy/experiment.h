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

#ifndef ALCHEMY_EXPERIMENT_H_
#define ALCHEMY_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alchemy/agents.h"
#include "alchemy/collective.h"
#include "alchemy/env.h"
#include "alchemy/event_log.h"
#include "alchemy/kgraph.h"
#include "alchemy/llm_client.h"
#include "alchemy/metrics.h"

namespace alchemy::xrun {

enum class AgentKind { kRandom, kEmpowered, kLlm };
enum class LlmMode { kLive, kRecord, kReplay };

const char* to_string(AgentKind kind);
const char* to_string(LlmMode mode);

struct TaskSpec {
  bool open_ended = false;
  // targeted
  int depth = 1;
  int distractors = 3;
  int tasks_per_trial = 50;
  std::string task_file;  // optional pre-generated batch, overrides sampling
  // open-ended
  std::vector<std::string> initial_items = {"air", "earth", "fire", "water"};
  // 6 for targeted and 200 for open-ended tasks when unset
  std::optional<int> horizon;

  int effective_horizon() const { return horizon.value_or(open_ended ? 200 : 6); }
};

struct AgentSpec {
  AgentKind kind = AgentKind::kRandom;
  // Softmax temperature for empowered agents (0.1 when unset), sampling
  // temperature for LLM agents (1.0 when unset).
  std::optional<double> temperature;
  double top_p = 1.0;
  int max_reprompts = 6;
  int max_tokens = 256;
  std::string model;
  agents::ParseTolerance tolerance = agents::ParseTolerance::kLenient;
  LlmMode mode = LlmMode::kReplay;
  std::string transcripts;  // directory holding agent_<k>.jsonl
  std::string prompt_dir;   // empty: built-in prompts
  std::string prompt_version = "v1";

  double effective_temperature() const {
    return temperature.value_or(kind == AgentKind::kEmpowered ? 0.1 : 1.0);
  }
  agents::SamplingConfig sampling() const;
};

struct GroupSpec {
  int size = 1;
  collective::TopologyConfig topology;
  bool copy_mechanism = false;
  bool social_information = true;
  bool concurrent_decisions = false;
};

struct RunConfig {
  std::string graph;
  TaskSpec task;
  AgentSpec agent;
  GroupSpec group;
  int trials = 10;
  std::uint64_t seed = 0;
  std::string output_dir;
  int workers = 1;  // trials simulated in parallel; does not change results

  // Result-determining fields only (output_dir and workers are left out).
  nlohmann::json to_json() const;
  // Throws ConfigError on unknown keys, wrong types or out-of-range values.
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::filesystem::path& path);
  void validate() const;
  std::string content_hash() const;
};

// Builds one chat client per agent for LLM runs.
using ClientFactory = std::function<std::unique_ptr<llm::ChatClient>(int agent)>;

// live: HTTP endpoint from the environment; record: the same, with every
// exchange appended to <transcripts>/agent_<k>.jsonl; replay: scripted
// clients reading those files.
ClientFactory default_client_factory(const RunConfig& cfg);

struct RunResult {
  EventLog log;
  MetricsSummary summary;
};

// Task batch for a config: loaded from task_file, sampled once from the
// config seed, or the single open-ended task.
std::vector<env::Task> make_task_batch(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph);

// Runs every trial over the same task batch. tasks overrides the batch when
// given; clients is required for LLM agents (default_client_factory when
// empty).
RunResult run_experiment(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph,
                         const std::optional<std::vector<env::Task>>& tasks = std::nullopt,
                         ClientFactory clients = {});

// Writes events.jsonl and summary.json under dir.
void write_run_outputs(const RunResult& result, const std::filesystem::path& dir);

class ReplayMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Re-simulates a logged run from its decisions and visits and returns the
// regenerated log. Throws ReplayMismatch when the simulation diverges from
// the recorded topology.
EventLog replay_log(const kgraph::KnowledgeGraph& graph, const EventLog& original);

// Hash of the graph's canonical serialization.
std::string graph_hash(const kgraph::KnowledgeGraph& graph);

}  // namespace alchemy::xrun

#endif  // ALCHEMY_EXPERIMENT_H_
