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

#ifndef ALCHEMY_AGENTS_H_
#define ALCHEMY_AGENTS_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "alchemy/env.h"
#include "alchemy/kgraph.h"
#include "alchemy/llm_client.h"
#include "alchemy/rng.h"

namespace alchemy::agents {

// What a policy sees for one decision. References must outlive the call.
struct Observation {
  const env::Task& task;
  const env::EpisodeState& state;
  const env::SocialView* social = nullptr;
};

enum class ParseTolerance {
  kStrict,   // quoted names joined by "and"
  kLenient,  // also unquoted names, comma / "+" / "&" separators
};

struct SamplingConfig {
  double temperature = 1.0;
  double top_p = 1.0;
  int max_reprompts = 6;
  int max_tokens = 256;
  std::string model;
  ParseTolerance tolerance = ParseTolerance::kLenient;
};

struct Reprompt {
  enum class Reason { kUnparseable, kRepeated };

  Reason reason;
  std::string raw_output;
};

const char* to_string(Reprompt::Reason reason);

struct Decision {
  env::Action action;
  std::optional<std::string> reasoning;
  int reprompts_used = 0;
  bool fallback_used = false;
  std::vector<Reprompt> reprompts;
};

// Canonical pairs over the inventory, ordered by inventory position (i <= j).
std::vector<ItemPair> all_pairs(const env::EpisodeState& state);
std::vector<ItemPair> untried_pairs(const env::EpisodeState& state);

// Uniform over untried pairs; uniform over all pairs (fallback) once every
// pair has been tried.
Decision random_policy(const Observation& obs, Rng& rng);

// Scores untried pairs by the empowerment of the item they produce (0 when
// invalid) and samples from a softmax with the given temperature. A
// temperature of zero picks uniformly among the maximizers.
Decision empowered_policy(const kgraph::KnowledgeGraph& graph, const Observation& obs,
                          double temperature, Rng& rng);

// Versioned prompt texts. The corrective-repeat text carries {first} and
// {second} placeholders.
struct PromptAssets {
  std::string version;
  std::string intro;
  std::string corrective_repeat;
  std::string corrective_format;
  std::string prediction;

  std::string content_hash() const;

  static const PromptAssets& builtin();
  // Reads intro_<v>.txt, corrective_repeat_<v>.txt, corrective_format_<v>.txt
  // and prediction_<v>.txt from dir.
  static PromptAssets load(const std::filesystem::path& dir, const std::string& version);
};

// System intro plus the rendered state. No chat history across steps.
std::vector<llm::ChatMessage> build_llm_messages(const kgraph::KnowledgeGraph& graph,
                                                 std::string_view intro, const Observation& obs);

struct ParsedCombination {
  std::string first;
  std::string second;
  std::optional<std::string> reasoning;
};

// Finds the "Combination:" line and resolves both names (normalized) against
// the inventory. Returns nullopt when the line is missing, a name does not
// resolve, or the line does not name exactly two items.
std::optional<ParsedCombination> parse_llm_output(std::string_view text,
                                                  const std::unordered_set<std::string>& inventory,
                                                  ParseTolerance tolerance = ParseTolerance::kLenient);

// Name from a "Result: 'item'" line (prediction probe answers), normalized.
std::optional<std::string> parse_prediction_output(std::string_view text);

// "Combination: 'a' and 'b'", the answer format the intro asks for.
std::string render_combination(const kgraph::KnowledgeGraph& graph, env::Action action);

std::unordered_set<std::string> inventory_names(const kgraph::KnowledgeGraph& graph,
                                                const env::EpisodeState& state);

// Queries the model, re-prompting with a corrective message on unparseable
// or repeated answers up to cfg.max_reprompts times. On exhaustion returns
// the last parseable (repeated) answer, or a random untried pair when none
// parsed; both set fallback_used. Client errors propagate.
Decision llm_policy(llm::ChatClient& client, const kgraph::KnowledgeGraph& graph,
                    const PromptAssets& prompts, const Observation& obs, const SamplingConfig& cfg,
                    Rng& rng);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision decide(const Observation& obs, Rng& rng) = 0;
};

class RandomPolicy : public Policy {
 public:
  Decision decide(const Observation& obs, Rng& rng) override { return random_policy(obs, rng); }
};

class EmpoweredPolicy : public Policy {
 public:
  EmpoweredPolicy(const kgraph::KnowledgeGraph& graph, double temperature)
      : graph_(graph), temperature_(temperature) {}
  Decision decide(const Observation& obs, Rng& rng) override {
    return empowered_policy(graph_, obs, temperature_, rng);
  }

 private:
  const kgraph::KnowledgeGraph& graph_;
  double temperature_;
};

class LlmPolicy : public Policy {
 public:
  LlmPolicy(llm::ChatClient& client, const kgraph::KnowledgeGraph& graph, PromptAssets prompts,
            SamplingConfig cfg)
      : client_(client), graph_(graph), prompts_(std::move(prompts)), cfg_(std::move(cfg)) {}
  Decision decide(const Observation& obs, Rng& rng) override {
    return llm_policy(client_, graph_, prompts_, obs, cfg_, rng);
  }

 private:
  llm::ChatClient& client_;
  const kgraph::KnowledgeGraph& graph_;
  PromptAssets prompts_;
  SamplingConfig cfg_;
};

}  // namespace alchemy::agents

#endif  // ALCHEMY_AGENTS_H_
