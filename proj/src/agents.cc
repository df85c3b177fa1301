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

#include "alchemy/agents.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "alchemy/hash.h"
#include "alchemy/prompt_assets.h"  // generated

namespace alchemy::agents {

using env::EpisodeState;
using kgraph::KnowledgeGraph;

const char* to_string(Reprompt::Reason reason) {
  switch (reason) {
    case Reprompt::Reason::kUnparseable: return "unparseable";
    case Reprompt::Reason::kRepeated: return "repeated";
  }
  return "?";
}

std::vector<ItemPair> all_pairs(const EpisodeState& state) {
  const auto& entries = state.entries();
  std::vector<ItemPair> pairs;
  pairs.reserve(entries.size() * (entries.size() + 1) / 2);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i; j < entries.size(); ++j) pairs.emplace_back(entries[i].item, entries[j].item);
  }
  return pairs;
}

std::vector<ItemPair> untried_pairs(const EpisodeState& state) {
  std::vector<ItemPair> pairs = all_pairs(state);
  std::erase_if(pairs, [&state](const ItemPair& p) { return state.attempted(p); });
  return pairs;
}

namespace {

void require_inventory(const Observation& obs) {
  if (obs.state.inventory_size() == 0) throw ContractViolation("policy called with an empty inventory");
}

Decision fallback_any(const EpisodeState& state, Rng& rng) {
  const auto pairs = all_pairs(state);
  Decision d{pairs[rng.uniform_index(pairs.size())]};
  d.fallback_used = true;
  return d;
}

}  // namespace

Decision random_policy(const Observation& obs, Rng& rng) {
  require_inventory(obs);
  const auto pairs = untried_pairs(obs.state);
  if (pairs.empty()) return fallback_any(obs.state, rng);
  return Decision{pairs[rng.uniform_index(pairs.size())]};
}

Decision empowered_policy(const KnowledgeGraph& graph, const Observation& obs, double temperature,
                          Rng& rng) {
  require_inventory(obs);
  if (temperature < 0.0) throw ContractViolation("empowered_policy: temperature must be >= 0");
  const auto pairs = untried_pairs(obs.state);
  if (pairs.empty()) return fallback_any(obs.state, rng);

  std::vector<double> scores(pairs.size(), 0.0);
  double best = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (auto result = graph.combine(pairs[i])) scores[i] = graph.empowerment(*result);
    best = std::max(best, scores[i]);
  }
  if (temperature == 0.0) {
    std::vector<std::size_t> argmax;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (scores[i] == best) argmax.push_back(i);
    }
    return Decision{pairs[argmax[rng.uniform_index(argmax.size())]]};
  }
  std::vector<double> weights(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) weights[i] = std::exp((scores[i] - best) / temperature);
  return Decision{pairs[rng.weighted_index(weights)]};
}

std::string PromptAssets::content_hash() const {
  std::string data;
  for (const std::string* part : {&version, &intro, &corrective_repeat, &corrective_format, &prediction}) {
    data += *part;
    data.push_back('\x1e');
  }
  return sha256_hex(data);
}

const PromptAssets& PromptAssets::builtin() {
  static const PromptAssets assets{std::string(prompt_assets::kVersion),
                                   std::string(prompt_assets::kIntro),
                                   std::string(prompt_assets::kCorrectiveRepeat),
                                   std::string(prompt_assets::kCorrectiveFormat),
                                   std::string(prompt_assets::kPrediction)};
  return assets;
}

PromptAssets PromptAssets::load(const std::filesystem::path& dir, const std::string& version) {
  auto read = [&](const std::string& stem) {
    const auto path = dir / (stem + "_" + version + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open prompt asset " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  return {version, read("intro"), read("corrective_repeat"), read("corrective_format"),
          read("prediction")};
}

std::vector<llm::ChatMessage> build_llm_messages(const KnowledgeGraph& graph, std::string_view intro,
                                                 const Observation& obs) {
  return {{llm::Role::kSystem, std::string(intro)},
          {llm::Role::kUser, env::render_state_prompt(graph, obs.task, obs.state, obs.social)}};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return !std::isspace(static_cast<unsigned char>(c)); };
  auto begin = std::find_if(s.begin(), s.end(), not_space);
  auto end = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return begin < end ? std::string_view(&*begin, static_cast<std::size_t>(end - begin)) : std::string_view();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Labeled {
  std::string_view rest;   // text after the label on the same line
  std::string_view after;  // everything after that line
};

// Finds a line of the form "<label>: ...", tolerating markdown decoration
// and repeated colons.
std::optional<Labeled> find_label(std::string_view text, std::string_view label) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    const std::size_t next = std::min(end + 1, text.size());
    std::size_t pos = line.find_first_not_of(" \t*_#>-");
    if (pos != std::string_view::npos && line.size() - pos >= label.size() &&
        lower(line.substr(pos, label.size())) == label) {
      pos += label.size();
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '*' || line[pos] == '_')) ++pos;
      if (pos < line.size() && line[pos] == ':') {
        while (pos < line.size() && std::string_view(": \t*_").find(line[pos]) != std::string_view::npos) {
          ++pos;
        }
        return Labeled{line.substr(pos), text.substr(next)};
      }
    }
    if (end >= text.size()) break;
    start = end + 1;
  }
  return std::nullopt;
}

constexpr std::string_view kQuotes[] = {"'", "\"", "`", "\xE2\x80\x98", "\xE2\x80\x99",
                                        "\xE2\x80\x9C", "\xE2\x80\x9D"};

bool strip_quote_prefix(std::string_view& s) {
  for (auto q : kQuotes) {
    if (s.starts_with(q)) {
      s.remove_prefix(q.size());
      return true;
    }
  }
  return false;
}

bool strip_quote_suffix(std::string_view& s) {
  for (auto q : kQuotes) {
    if (s.ends_with(q)) {
      s.remove_suffix(q.size());
      return true;
    }
  }
  return false;
}

// Cleans one side of a combination. Returns nullopt when quotes are required
// but missing.
std::optional<std::string> clean_name(std::string_view raw, bool require_quotes) {
  std::string_view s = trim(raw);
  while (!s.empty() && std::string_view(".;!").find(s.back()) != std::string_view::npos) {
    s.remove_suffix(1);
    s = trim(s);
  }
  const bool opened = strip_quote_prefix(s);
  const bool closed = strip_quote_suffix(s);
  if (require_quotes && !(opened && closed)) return std::nullopt;
  std::string name = normalize_name(s);
  if (name.empty()) return std::nullopt;
  return name;
}

}  // namespace

std::optional<ParsedCombination> parse_llm_output(std::string_view text,
                                                  const std::unordered_set<std::string>& inventory,
                                                  ParseTolerance tolerance) {
  auto combination = find_label(text, "combination");
  if (!combination) return std::nullopt;
  const std::string_view rest = trim(combination->rest);
  const std::string rest_lower = lower(rest);
  const bool strict = tolerance == ParseTolerance::kStrict;

  std::vector<std::string_view> separators{" and "};
  if (!strict) separators.insert(separators.end(), {",", "+", "&"});

  std::set<std::pair<std::string, std::string>> found;
  std::optional<ParsedCombination> parsed;
  for (auto sep : separators) {
    for (std::size_t pos = rest_lower.find(sep); pos != std::string::npos;
         pos = rest_lower.find(sep, pos + 1)) {
      auto first = clean_name(rest.substr(0, pos), strict);
      auto second = clean_name(rest.substr(pos + sep.size()), strict);
      if (!first || !second || !inventory.count(*first) || !inventory.count(*second)) continue;
      auto key = std::minmax(*first, *second);
      if (found.emplace(key.first, key.second).second) parsed = ParsedCombination{*first, *second, {}};
    }
  }
  if (found.size() != 1) return std::nullopt;

  if (auto reasoning = find_label(text, "reasoning")) {
    std::string body(trim(reasoning->rest));
    const std::string_view tail = trim(reasoning->after);
    if (!tail.empty()) {
      if (!body.empty()) body.push_back('\n');
      body.append(tail);
    }
    parsed->reasoning = std::move(body);
  }
  return parsed;
}

std::optional<std::string> parse_prediction_output(std::string_view text) {
  auto result = find_label(text, "result");
  if (!result) return std::nullopt;
  return clean_name(result->rest, false);
}

std::string render_combination(const KnowledgeGraph& graph, env::Action action) {
  return "Combination: '" + graph.name(action.first()) + "' and '" + graph.name(action.second()) + "'";
}

std::unordered_set<std::string> inventory_names(const KnowledgeGraph& graph, const EpisodeState& state) {
  std::unordered_set<std::string> names;
  for (const auto& e : state.entries()) names.insert(graph.name(e.item));
  return names;
}

namespace {

std::string fill_pair(std::string text, const std::string& first, const std::string& second) {
  for (auto [key, value] : {std::pair<std::string_view, const std::string&>{"{first}", first},
                            std::pair<std::string_view, const std::string&>{"{second}", second}}) {
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
      text.replace(pos, key.size(), value);
    }
  }
  return text;
}

}  // namespace

Decision llm_policy(llm::ChatClient& client, const KnowledgeGraph& graph, const PromptAssets& prompts,
                    const Observation& obs, const SamplingConfig& cfg, Rng& rng) {
  require_inventory(obs);
  if (cfg.max_reprompts < 0) throw ContractViolation("max_reprompts must be >= 0");
  const auto names = inventory_names(graph, obs.state);

  llm::ChatRequest request;
  request.messages = build_llm_messages(graph, prompts.intro, obs);
  request.temperature = cfg.temperature;
  request.top_p = cfg.top_p;
  request.max_tokens = cfg.max_tokens;
  request.model = cfg.model;

  std::vector<Reprompt> reprompts;
  std::optional<Decision> last_parsed;
  for (int attempt = 0;; ++attempt) {
    const llm::ChatResponse response = client.complete(request);
    std::string corrective;
    if (auto parsed = parse_llm_output(response.content, names, cfg.tolerance)) {
      const env::Action action(*graph.find(parsed->first), *graph.find(parsed->second));
      if (!obs.state.attempted(action)) {
        Decision d{action, parsed->reasoning, attempt, false, std::move(reprompts)};
        return d;
      }
      last_parsed = Decision{action, parsed->reasoning};
      reprompts.push_back({Reprompt::Reason::kRepeated, response.content});
      corrective = fill_pair(prompts.corrective_repeat, graph.name(action.first()),
                             graph.name(action.second()));
    } else {
      reprompts.push_back({Reprompt::Reason::kUnparseable, response.content});
      corrective = prompts.corrective_format;
    }
    if (attempt >= cfg.max_reprompts) break;
    request.messages.push_back({llm::Role::kAssistant, response.content});
    request.messages.push_back({llm::Role::kUser, corrective});
  }

  Decision d = last_parsed ? *last_parsed : random_policy(obs, rng);
  d.reprompts_used = cfg.max_reprompts;
  d.fallback_used = true;
  d.reprompts = std::move(reprompts);
  return d;
}

}  // namespace alchemy::agents
