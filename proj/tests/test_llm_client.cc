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

#include <atomic>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "alchemy/core.h"
#include "alchemy/llm_client.h"

namespace alchemy::llm {
namespace {

using nlohmann::json;

ChatRequest request_of(std::vector<ChatMessage> messages) {
  ChatRequest r;
  r.messages = std::move(messages);
  return r;
}

const std::vector<ChatMessage> kConversation = {
    {Role::kSystem, "rules"}, {Role::kUser, "Inventory: 'fire', 'water'"}};

TEST_CASE("fingerprint covers role and content but not sampling") {
  ChatRequest a = request_of(kConversation);
  ChatRequest b = a;
  b.temperature = 0.0;
  b.top_p = 0.5;
  CHECK(fingerprint(a.messages) == fingerprint(b.messages));
  auto c = kConversation;
  c[1].role = Role::kAssistant;
  CHECK(fingerprint(c) != fingerprint(kConversation));
  auto d = kConversation;
  d[1].content += " ";
  CHECK(fingerprint(d) != fingerprint(kConversation));
  // message boundaries matter
  CHECK(fingerprint(std::vector<ChatMessage>{{Role::kUser, "ab"}}) !=
        fingerprint(std::vector<ChatMessage>{{Role::kUser, "a"}, {Role::kUser, "b"}}));
  CHECK(fingerprint(kConversation).size() == 64);
}

TEST_CASE("request validation") {
  CHECK_THROWS_AS(validate(ChatRequest{}), ContractViolation);
  ChatRequest r = request_of(kConversation);
  CHECK_NOTHROW(validate(r));
  r.temperature = -0.1;
  CHECK_THROWS_AS(validate(r), ContractViolation);
  r.temperature = 0.0;
  r.top_p = 0.0;
  CHECK_THROWS_AS(validate(r), ContractViolation);
  r.top_p = 1.0;
  r.max_tokens = 0;
  CHECK_THROWS_AS(validate(r), ContractViolation);
  CHECK(role_from_string("assistant") == Role::kAssistant);
  CHECK_THROWS_AS(role_from_string("tool"), ContractViolation);
}

TEST_CASE("wire format") {
  ChatRequest r = request_of(kConversation);
  r.temperature = 0.5;
  const json wire = to_wire(r, "default-model");
  CHECK(wire["model"] == "default-model");
  CHECK(wire["messages"][0]["role"] == "system");
  CHECK(wire["messages"][1]["content"] == kConversation[1].content);
  CHECK(wire["temperature"] == 0.5);
  r.model = "other";
  CHECK(to_wire(r, "default-model")["model"] == "other");

  const auto resp = from_wire(json::parse(
      R"({"choices":[{"message":{"role":"assistant","content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})"));
  CHECK(resp.content == "hi");
  REQUIRE(resp.usage);
  CHECK(resp.usage->prompt_tokens == 3);
  CHECK_THROWS_AS(from_wire(json::parse(R"({"choices":[]})")), TransportError);
  CHECK_THROWS_AS(from_wire(json::parse(R"({"choices":[{"message":{"content":null}}]})")), TransportError);
}

TEST_CASE("transcript parsing") {
  const Transcript t = Transcript::parse(
      "{\"fingerprint\":\"aa\",\"response\":\"x\"}\n\n{\"fingerprint\":\"bb\",\"response\":\"y\",\"meta\":{\"k\":1}}\n");
  REQUIRE(t.size() == 2);
  CHECK(t.entries()[1].response == "y");
  CHECK(t.entries()[1].meta["k"] == 1);
  CHECK(Transcript::parse("").size() == 0);
  try {
    Transcript::parse("{\"fingerprint\":\"aa\",\"response\":\"x\"}\n{\"fingerprint\":1}\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(Transcript::load("/nonexistent/transcript.jsonl"), ConfigError);
  const TranscriptEntry e{"ff", "multi\nline", json::object()};
  const Transcript back = Transcript::parse(Transcript::to_line(e));
  CHECK(back.entries()[0].response == "multi\nline");
}

TEST_CASE("record then replay reproduces every response") {
  CannedChatClient canned({"first", "second"});
  std::ostringstream sink;
  RecordingChatClient recorder(canned, sink);
  auto second = kConversation;
  second.push_back({Role::kAssistant, "first"});
  second.push_back({Role::kUser, "again"});
  CHECK(recorder.complete(request_of(kConversation)).content == "first");
  CHECK(recorder.complete(request_of(second)).content == "second");

  ScriptedChatClient replay(Transcript::parse(sink.str()));
  CHECK_FALSE(replay.exhausted());
  ChatRequest r = request_of(kConversation);
  r.temperature = 0.0;
  CHECK(replay.complete(r).content == "first");
  CHECK(replay.complete(request_of(second)).content == "second");
  CHECK(replay.exhausted());
  CHECK(replay.consumed() == 2);
  CHECK_THROWS_AS(replay.complete(request_of(kConversation)), ScriptError);
}

TEST_CASE("scripted client names the first divergent message") {
  CannedChatClient canned({"ok"});
  std::ostringstream sink;
  RecordingChatClient recorder(canned, sink);
  recorder.complete(request_of(kConversation));
  ScriptedChatClient replay(Transcript::parse(sink.str()));
  auto changed = kConversation;
  changed[1].content = "Inventory: 'fire'";
  try {
    replay.complete(request_of(changed));
    FAIL("expected ScriptError");
  } catch (const ScriptError& e) {
    const std::string what = e.what();
    CHECK(what.find("entry 0") != std::string::npos);
    CHECK(what.find("message #1") != std::string::npos);
    CHECK(what.find("Inventory: 'fire'") != std::string::npos);
  }
  CHECK(replay.consumed() == 0);
}

TEST_CASE("tampered and empty transcripts fail loudly") {
  CannedChatClient canned({"ok"});
  std::ostringstream sink;
  RecordingChatClient recorder(canned, sink);
  recorder.complete(request_of(kConversation));
  json line = json::parse(sink.str());
  line["fingerprint"] = std::string(64, '0');
  ScriptedChatClient tampered(Transcript::parse(line.dump()));
  CHECK_THROWS_AS(tampered.complete(request_of(kConversation)), ScriptError);
  ScriptedChatClient empty{Transcript{}};
  CHECK(empty.exhausted());
  CHECK_THROWS_AS(empty.complete(request_of(kConversation)), ScriptError);
}

TEST_CASE("canned client keeps requests and runs dry") {
  CannedChatClient canned({"a"});
  CHECK(canned.complete(request_of(kConversation)).content == "a");
  CHECK(canned.requests().size() == 1);
  CHECK_THROWS_AS(canned.complete(request_of(kConversation)), ScriptError);
  CHECK_THROWS_AS(canned.complete(ChatRequest{}), ContractViolation);
}

class LocalServer {
 public:
  explicit LocalServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

EndpointConfig fast_config(const std::string& url) {
  EndpointConfig c;
  c.url = url;
  c.api_key = "secret";
  c.model = "test-model";
  c.timeout_seconds = 5;
  c.max_retries = 3;
  c.initial_backoff = std::chrono::milliseconds(1);
  return c;
}

TEST_CASE("http client retries 429 and 5xx then succeeds") {
  std::atomic<int> calls{0};
  std::string seen_auth;
  json seen_body;
  LocalServer local([&](httplib::Server& server) {
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      const int n = calls++;
      if (n == 0) {
        res.status = 429;
        return;
      }
      if (n == 1) {
        res.status = 500;
        return;
      }
      seen_auth = req.get_header_value("Authorization");
      seen_body = json::parse(req.body);
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Combination: 'a' and 'b'"}}]})",
                      "application/json");
    });
  });
  HttpChatClient client(fast_config(local.url("/v1/chat/completions")));
  const auto resp = client.complete(request_of(kConversation));
  CHECK(resp.content == "Combination: 'a' and 'b'");
  CHECK(calls == 3);
  CHECK(seen_auth == "Bearer secret");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["messages"].size() == 2);
}

TEST_CASE("http client gives up and reports client errors") {
  std::atomic<int> calls{0};
  LocalServer local([&](httplib::Server& server) {
    server.Post("/always503", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 503;
    });
    server.Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content("bad request", "text/plain");
    });
    server.Post("/garbage", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
  });
  HttpChatClient failing(fast_config(local.url("/always503")));
  CHECK_THROWS_AS(failing.complete(request_of(kConversation)), TransportError);
  CHECK(calls == 4);
  HttpChatClient bad(fast_config(local.url("/bad")));
  CHECK_THROWS_WITH_AS(bad.complete(request_of(kConversation)), doctest::Contains("HTTP 400"), TransportError);
  HttpChatClient garbage(fast_config(local.url("/garbage")));
  CHECK_THROWS_AS(garbage.complete(request_of(kConversation)), TransportError);
  CHECK_THROWS_AS(HttpChatClient(fast_config("localhost:1")), ConfigError);
}

TEST_CASE("http client reports an unreachable endpoint") {
  auto config = fast_config("http://127.0.0.1:1/v1/chat/completions");
  config.max_retries = 1;
  config.timeout_seconds = 1;
  HttpChatClient client(config);
  CHECK_THROWS_AS(client.complete(request_of(kConversation)), TransportError);
}

TEST_CASE("live endpoint smoke test" * doctest::skip(std::getenv("ALCHEMY_LIVE_TESTS") == nullptr)) {
  HttpChatClient client(EndpointConfig::from_env());
  ChatRequest r = request_of({{Role::kUser, "Reply with the single word: ready"}});
  r.max_tokens = 16;
  CHECK_FALSE(client.complete(r).content.empty());
}

}  // namespace
}  // namespace alchemy::llm
