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

#include <httplib.h>

#include <thread>

#include "alchemy/core.h"
#include "alchemy/llm_client.h"

namespace alchemy::llm {

using nlohmann::json;

HttpChatClient::HttpChatClient(EndpointConfig config) : config_(std::move(config)) {
  const std::size_t scheme = config_.url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + config_.url);
  const std::size_t path = config_.url.find('/', scheme + 3);
  base_ = config_.url.substr(0, path);
  path_ = path == std::string::npos ? "/v1/chat/completions" : config_.url.substr(path);
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
  validate(request);
  const std::string body = to_wire(request, config_.model).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 429 || result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw TransportError("HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 200));
    }
    json parsed;
    try {
      parsed = json::parse(result->body);
    } catch (const json::parse_error& e) {
      throw TransportError(std::string("completion body is not JSON: ") + e.what());
    }
    ChatResponse response = from_wire(parsed);
    response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return response;
  }
  throw TransportError("giving up after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

}  // namespace alchemy::llm
