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

#ifndef ALCHEMY_LLM_CLIENT_H_
#define ALCHEMY_LLM_CLIENT_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace alchemy::llm {

enum class Role { kSystem, kUser, kAssistant };

const char* to_string(Role role);
Role role_from_string(std::string_view text);

struct ChatMessage {
  Role role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 256;
  std::string model;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  std::optional<Usage> usage;
  std::chrono::milliseconds latency{0};
};

// Endpoint unreachable or kept failing after retries.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scripted client saw a request the transcript did not expect, or ran dry.
class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ContractViolation for empty requests or out-of-range sampling values.
void validate(const ChatRequest& request);

// Hash of role and content of every message. Sampling parameters are not
// part of the fingerprint.
std::string fingerprint(std::span<const ChatMessage> messages);
std::string message_fingerprint(const ChatMessage& message);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct EndpointConfig {
  std::string url;  // full chat-completions URL
  std::string api_key;
  std::string model;
  int timeout_seconds = 60;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};

  // ALCHEMY_LLM_ENDPOINT, ALCHEMY_LLM_API_KEY, ALCHEMY_LLM_MODEL.
  static EndpointConfig from_env();
};

// OpenAI-compatible chat-completions endpoint. Transport failures, 429 and
// 5xx responses are retried with exponential backoff.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config);
  ChatResponse complete(const ChatRequest& request) override;

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  std::string base_;
  std::string path_;
};

nlohmann::json to_wire(const ChatRequest& request, const std::string& default_model);
ChatResponse from_wire(const nlohmann::json& body);

struct TranscriptEntry {
  std::string fingerprint;
  std::string response;
  nlohmann::json meta = nlohmann::json::object();
};

// JSONL file, one {fingerprint, response, meta} object per line.
class Transcript {
 public:
  Transcript() = default;
  explicit Transcript(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

  static Transcript parse(std::string_view jsonl);
  static Transcript load(const std::filesystem::path& path);

  std::span<const TranscriptEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  static std::string to_line(const TranscriptEntry& entry);

 private:
  std::vector<TranscriptEntry> entries_;
};

// Replays a transcript strictly in order, checking each request fingerprint.
class ScriptedChatClient : public ChatClient {
 public:
  explicit ScriptedChatClient(Transcript transcript) : transcript_(std::move(transcript)) {}

  ChatResponse complete(const ChatRequest& request) override;

  std::size_t consumed() const;
  bool exhausted() const;

 private:
  Transcript transcript_;
  mutable std::mutex mutex_;
  std::size_t cursor_ = 0;
};

// Wraps another client and appends each exchange to a transcript sink.
class RecordingChatClient : public ChatClient {
 public:
  RecordingChatClient(ChatClient& inner, std::ostream& sink) : inner_(inner), sink_(&sink) {}
  RecordingChatClient(ChatClient& inner, const std::filesystem::path& path);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  ChatClient& inner_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* sink_;
  std::mutex mutex_;
};

std::unique_ptr<ScriptedChatClient> replay_transcript(const std::filesystem::path& path);

// Returns canned replies in order regardless of the request, and keeps the
// requests it was sent. Useful for unit tests of prompt handling.
class CannedChatClient : public ChatClient {
 public:
  explicit CannedChatClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}

  ChatResponse complete(const ChatRequest& request) override;

  const std::vector<ChatRequest>& requests() const { return requests_; }

 private:
  std::vector<std::string> replies_;
  std::vector<ChatRequest> requests_;
  std::size_t cursor_ = 0;
};

}  // namespace alchemy::llm

#endif  // ALCHEMY_LLM_CLIENT_H_
