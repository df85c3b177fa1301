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

#include "alchemy/event_log.h"

#include <fstream>
#include <sstream>

#include "alchemy/core.h"

namespace alchemy::xrun {

using nlohmann::json;

const json& EventLog::header() const {
  if (records_.empty() || records_.front().value("type", "") != "RunHeader") {
    throw ConfigError("event log does not start with a RunHeader record");
  }
  return records_.front();
}

std::string EventLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

EventLog EventLog::parse(std::string_view jsonl) {
  EventLog log;
  std::size_t start = 0;
  std::size_t line_number = 0;
  while (start < jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      log.append(json::parse(line.begin(), line.end()));
    } catch (const json::parse_error& e) {
      throw ConfigError("event log line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return log;
}

EventLog EventLog::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open event log " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void EventLog::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_jsonl();
  if (!out) throw std::runtime_error("failed to write event log " + path.string());
}

}  // namespace alchemy::xrun
