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

#include "alchemy/probes.h"

#include <set>

namespace alchemy::xrun {

using nlohmann::json;

SemanticsProbeResult probe_semantics(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph,
                                     std::uint64_t scramble_seed, ClientFactory original_clients,
                                     ClientFactory scrambled_clients) {
  if (cfg.task.open_ended) throw ConfigError("the semantics probe needs a targeted task spec");
  kgraph::ScrambledGraph scrambled = kgraph::scramble_semantics(graph, scramble_seed);
  const std::vector<env::Task> tasks = make_task_batch(cfg, graph);

  RunConfig original_cfg = cfg;
  RunConfig scrambled_cfg = cfg;
  if (cfg.agent.kind == AgentKind::kLlm && !cfg.agent.transcripts.empty()) {
    original_cfg.agent.transcripts = (std::filesystem::path(cfg.agent.transcripts) / "original").string();
    scrambled_cfg.agent.transcripts = (std::filesystem::path(cfg.agent.transcripts) / "scrambled").string();
  }
  SemanticsProbeResult out;
  out.original = run_experiment(original_cfg, graph, tasks, std::move(original_clients));
  out.scrambled = run_experiment(scrambled_cfg, scrambled.graph, tasks, std::move(scrambled_clients));
  out.mapping = std::move(scrambled.mapping);
  return out;
}

double exact_match(std::string_view predicted, std::string_view actual) {
  return normalize_name(predicted) == normalize_name(actual) ? 1.0 : 0.0;
}

std::vector<ItemPair> sample_valid_combinations(const kgraph::KnowledgeGraph& graph, std::size_t count,
                                                std::uint64_t seed, int rollout_steps) {
  std::vector<ItemPair> out;
  std::set<ItemPair> seen;
  std::vector<ItemId> base(graph.base_items().begin(), graph.base_items().end());
  if (base.empty()) return out;
  env::Task task{base, std::nullopt, rollout_steps};
  agents::EmpoweredPolicy policy(graph, 1.0);
  // A rollout that finds nothing new ends the search.
  for (std::uint64_t rollout = 0; out.size() < count; ++rollout) {
    Rng rng(derive_seed(seed, {rollout}));
    env::EpisodeState state = env::EpisodeState::start(task, graph.item_count());
    const std::size_t before = out.size();
    while (!state.finished() && out.size() < count) {
      agents::Decision d = policy.decide({task, state, nullptr}, rng);
      env::StepResult r = env::step(graph, std::move(state), d.action);
      state = std::move(r.state);
      if (r.outcome.kind == env::StepOutcome::Kind::kRepeatedAttempt) state.spend_step();
      if (r.outcome.item && seen.insert(d.action).second) out.push_back(d.action);
    }
    if (out.size() == before) break;
  }
  return out;
}

PredictionProbeResult probe_prediction(const kgraph::KnowledgeGraph& graph, const std::vector<ItemPair>& combos,
                                       llm::ChatClient& client, const Scorer& scorer, Rng& rng,
                                       const agents::PromptAssets& prompts,
                                       const agents::SamplingConfig& sampling) {
  PredictionProbeResult out;
  for (const ItemPair& pair : combos) {
    auto result = graph.combine(pair);
    if (!result) {
      throw ContractViolation("not a valid combination: '" + graph.name(pair.first()) + "' and '" +
                              graph.name(pair.second()) + "'");
    }
    PredictionRow row;
    row.first = graph.name(pair.first());
    row.second = graph.name(pair.second());
    row.actual = graph.name(*result);

    llm::ChatRequest request;
    request.messages = {{llm::Role::kSystem, prompts.prediction},
                        {llm::Role::kUser, agents::render_combination(graph, pair)}};
    request.temperature = sampling.temperature;
    request.top_p = sampling.top_p;
    request.max_tokens = sampling.max_tokens;
    request.model = sampling.model;
    row.predicted = agents::parse_prediction_output(client.complete(request).content);
    if (row.predicted) {
      row.score = scorer(*row.predicted, row.actual);
    } else {
      row.flagged = true;
      ++out.flagged;
    }
    row.baseline = graph.name(item_at(rng.uniform_index(graph.item_count())));
    row.baseline_score = scorer(row.baseline, row.actual);
    out.mean_score += row.score;
    out.baseline_mean_score += row.baseline_score;
    out.rows.push_back(std::move(row));
  }
  if (!out.rows.empty()) {
    out.mean_score /= static_cast<double>(out.rows.size());
    out.baseline_mean_score /= static_cast<double>(out.rows.size());
  }
  return out;
}

json PredictionProbeResult::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"first", r.first},
                         {"second", r.second},
                         {"actual", r.actual},
                         {"predicted", r.predicted ? json(*r.predicted) : json(nullptr)},
                         {"score", r.score},
                         {"flagged", r.flagged},
                         {"baseline", r.baseline},
                         {"baseline_score", r.baseline_score}});
  }
  return {{"rows", rows_json},
          {"mean_score", mean_score},
          {"baseline_mean_score", baseline_mean_score},
          {"flagged", flagged}};
}

}  // namespace alchemy::xrun
