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

#ifndef ALCHEMY_EVENT_LOG_H_
#define ALCHEMY_EVENT_LOG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace alchemy::xrun {

// Append-only JSONL record stream. Records are JSON objects with a "type"
// field; keys serialize in sorted order so equal logs are equal bytes.
class EventLog {
 public:
  void append(nlohmann::json record) { records_.push_back(std::move(record)); }

  const std::vector<nlohmann::json>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Header record, or throws ConfigError when the log does not start with one.
  const nlohmann::json& header() const;

  std::string to_jsonl() const;
  static EventLog parse(std::string_view jsonl);
  static EventLog load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const EventLog& a, const EventLog& b) { return a.records_ == b.records_; }

 private:
  std::vector<nlohmann::json> records_;
};

}  // namespace alchemy::xrun

#endif  // ALCHEMY_EVENT_LOG_H_
