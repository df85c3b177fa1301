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

#include "alchemy/llm_client.h"

#include <cstdlib>
#include <sstream>

#include "alchemy/core.h"
#include "alchemy/hash.h"

namespace alchemy::llm {

using nlohmann::json;

const char* to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "?";
}

Role role_from_string(std::string_view text) {
  if (text == "system") return Role::kSystem;
  if (text == "user") return Role::kUser;
  if (text == "assistant") return Role::kAssistant;
  throw ContractViolation("unknown chat role '" + std::string(text) + "'");
}

void validate(const ChatRequest& request) {
  if (request.messages.empty()) throw ContractViolation("chat request needs at least one message");
  if (request.temperature < 0.0) throw ContractViolation("temperature must be non-negative");
  if (!(request.top_p > 0.0 && request.top_p <= 1.0)) throw ContractViolation("top_p must lie in (0, 1]");
  if (request.max_tokens <= 0) throw ContractViolation("max_tokens must be positive");
}

std::string message_fingerprint(const ChatMessage& message) {
  std::string data = to_string(message.role);
  data.push_back('\x1f');
  data += message.content;
  return sha256_hex(data);
}

std::string fingerprint(std::span<const ChatMessage> messages) {
  std::string data;
  for (const auto& m : messages) {
    data += to_string(m.role);
    data.push_back('\x1f');
    data += m.content;
    data.push_back('\x1e');
  }
  return sha256_hex(data);
}

EndpointConfig EndpointConfig::from_env() {
  auto get = [](const char* name) {
    const char* value = std::getenv(name);
    return value != nullptr ? std::string(value) : std::string();
  };
  EndpointConfig config;
  config.url = get("ALCHEMY_LLM_ENDPOINT");
  config.api_key = get("ALCHEMY_LLM_API_KEY");
  config.model = get("ALCHEMY_LLM_MODEL");
  if (config.url.empty()) throw ConfigError("ALCHEMY_LLM_ENDPOINT is not set");
  return config;
}

json to_wire(const ChatRequest& request, const std::string& default_model) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model.empty() ? default_model : request.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"top_p", request.top_p},
          {"max_tokens", request.max_tokens}};
}

ChatResponse from_wire(const json& body) {
  ChatResponse response;
  try {
    const json& message = body.at("choices").at(0).at("message");
    const json& content = message.at("content");
    if (!content.is_string()) throw TransportError("completion has no text content");
    response.content = content.get<std::string>();
    if (body.contains("usage") && body["usage"].is_object()) {
      Usage usage;
      usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
      usage.completion_tokens = body["usage"].value("completion_tokens", 0);
      response.usage = usage;
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected completion payload: ") + e.what());
  }
  return response;
}

Transcript Transcript::parse(std::string_view jsonl) {
  std::vector<TranscriptEntry> entries;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      json doc = json::parse(line.begin(), line.end());
      TranscriptEntry entry;
      entry.fingerprint = doc.at("fingerprint").get<std::string>();
      entry.response = doc.at("response").get<std::string>();
      if (doc.contains("meta")) entry.meta = doc["meta"];
      entries.push_back(std::move(entry));
    } catch (const json::exception& e) {
      throw ConfigError("transcript line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return Transcript(std::move(entries));
}

Transcript Transcript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open transcript " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string Transcript::to_line(const TranscriptEntry& entry) {
  json doc = {{"fingerprint", entry.fingerprint}, {"response", entry.response}, {"meta", entry.meta}};
  return doc.dump() + "\n";
}

ChatResponse ScriptedChatClient::complete(const ChatRequest& request) {
  validate(request);
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string actual = fingerprint(request.messages);
  if (cursor_ >= transcript_.size()) {
    throw ScriptError("transcript exhausted after " + std::to_string(cursor_) +
                      " entries; unexpected request " + actual.substr(0, 16));
  }
  const TranscriptEntry& entry = transcript_.entries()[cursor_];
  if (entry.fingerprint != actual) {
    std::ostringstream msg;
    msg << "transcript entry " << cursor_ << ": fingerprint mismatch (expected "
        << entry.fingerprint.substr(0, 16) << ", got " << actual.substr(0, 16) << ")";
    auto expected = entry.meta.find("message_fingerprints");
    if (expected != entry.meta.end() && expected->is_array()) {
      const std::size_t n = std::max(expected->size(), request.messages.size());
      for (std::size_t i = 0; i < n; ++i) {
        const bool have_expected = i < expected->size();
        const bool have_actual = i < request.messages.size();
        if (have_expected && have_actual &&
            (*expected)[i].get<std::string>() == message_fingerprint(request.messages[i])) {
          continue;
        }
        msg << "; first divergent message #" << i;
        if (have_actual) {
          msg << " (" << to_string(request.messages[i].role) << ": \""
              << request.messages[i].content.substr(0, 60) << "\")";
        } else {
          msg << " (missing from request)";
        }
        break;
      }
    }
    throw ScriptError(msg.str());
  }
  ++cursor_;
  ChatResponse response;
  response.content = entry.response;
  return response;
}

std::size_t ScriptedChatClient::consumed() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cursor_;
}

bool ScriptedChatClient::exhausted() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cursor_ >= transcript_.size();
}

RecordingChatClient::RecordingChatClient(ChatClient& inner, const std::filesystem::path& path)
    : inner_(inner),
      file_(std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app)),
      sink_(file_.get()) {
  if (!*file_) throw std::runtime_error("cannot open transcript sink " + path.string());
}

ChatResponse RecordingChatClient::complete(const ChatRequest& request) {
  ChatResponse response = inner_.complete(request);
  TranscriptEntry entry;
  entry.fingerprint = fingerprint(request.messages);
  entry.response = response.content;
  json per_message = json::array();
  for (const auto& m : request.messages) per_message.push_back(message_fingerprint(m));
  entry.meta["message_fingerprints"] = std::move(per_message);
  if (!request.model.empty()) entry.meta["model"] = request.model;
  if (response.usage) {
    entry.meta["usage"] = {{"prompt_tokens", response.usage->prompt_tokens},
                           {"completion_tokens", response.usage->completion_tokens}};
  }
  std::lock_guard<std::mutex> lock(mutex_);
  *sink_ << Transcript::to_line(entry);
  sink_->flush();
  if (!*sink_) throw std::runtime_error("failed to write transcript entry");
  return response;
}

std::unique_ptr<ScriptedChatClient> replay_transcript(const std::filesystem::path& path) {
  return std::make_unique<ScriptedChatClient>(Transcript::load(path));
}

ChatResponse CannedChatClient::complete(const ChatRequest& request) {
  validate(request);
  requests_.push_back(request);
  if (cursor_ >= replies_.size()) throw ScriptError("canned client ran out of replies");
  ChatResponse response;
  response.content = replies_[cursor_++];
  return response;
}

}  // namespace alchemy::llm
