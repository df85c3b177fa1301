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

#ifndef ALCHEMY_REPORT_H_
#define ALCHEMY_REPORT_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "alchemy/event_log.h"

namespace alchemy::xrun {

struct LabeledLog {
  std::string label;
  EventLog log;
};

// Output file name -> contents. Every value is recomputed from the logs.
struct Report {
  std::map<std::string, std::string> files;

  friend bool operator==(const Report&, const Report&) = default;
};

// CSV tables (summary, success, inventory curve, copy time, outstanding
// copyable items and, for several logs, a per-trial connectivity
// comparison) plus SVG charts. Logs built on different graphs or task
// specs are rejected with ConfigError unless allow_mixed is set.
Report build_report(const std::vector<LabeledLog>& logs, bool allow_mixed = false);

void write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace alchemy::xrun

#endif  // ALCHEMY_REPORT_H_
