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

#ifndef ALCHEMY_PROBES_H_
#define ALCHEMY_PROBES_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "alchemy/agents.h"
#include "alchemy/experiment.h"
#include "alchemy/kgraph.h"
#include "alchemy/llm_client.h"

namespace alchemy::xrun {

struct SemanticsProbeResult {
  RunResult original;
  RunResult scrambled;
  std::map<std::string, std::string> mapping;
};

// Runs the config's task batch on the graph and on a scrambled copy. LLM
// agents read transcripts from <transcripts>/original and
// <transcripts>/scrambled unless client factories are given.
SemanticsProbeResult probe_semantics(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph,
                                     std::uint64_t scramble_seed, ClientFactory original_clients = {},
                                     ClientFactory scrambled_clients = {});

// Similarity of a predicted name to the true result, in [0, 1].
using Scorer = std::function<double(std::string_view predicted, std::string_view actual)>;

// 1 when the names are equal after normalization, else 0.
double exact_match(std::string_view predicted, std::string_view actual);

struct PredictionRow {
  std::string first;
  std::string second;
  std::string actual;
  std::optional<std::string> predicted;  // nullopt when unparseable
  double score = 0;
  bool flagged = false;
  std::string baseline;  // uniformly drawn graph item
  double baseline_score = 0;
};

struct PredictionProbeResult {
  std::vector<PredictionRow> rows;
  double mean_score = 0;
  double baseline_mean_score = 0;
  std::size_t flagged = 0;

  nlohmann::json to_json() const;
};

// Distinct valid combinations met by empowered agents exploring open-ended
// from the base items. Returns fewer when the rollouts find fewer.
std::vector<ItemPair> sample_valid_combinations(const kgraph::KnowledgeGraph& graph, std::size_t count,
                                                std::uint64_t seed, int rollout_steps = 200);

// One prompt per combination. rng draws the random-baseline items.
PredictionProbeResult probe_prediction(const kgraph::KnowledgeGraph& graph, const std::vector<ItemPair>& combos,
                                       llm::ChatClient& client, const Scorer& scorer, Rng& rng,
                                       const agents::PromptAssets& prompts = agents::PromptAssets::builtin(),
                                       const agents::SamplingConfig& sampling = {});

}  // namespace alchemy::xrun

#endif  // ALCHEMY_PROBES_H_
