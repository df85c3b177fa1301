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

#ifndef ALCHEMY_METRICS_H_
#define ALCHEMY_METRICS_H_

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "alchemy/event_log.h"

namespace alchemy::xrun {

// Success over agent-episodes. Variances are population variances; the
// within-trial and across-trial parts add up to the total.
struct SuccessStats {
  double mean = 0;
  double total_variance = 0;
  double within_trial_variance = 0;
  double across_trial_variance = 0;
  std::size_t episodes = 0;
  std::vector<double> trial_means;
};

struct CopyTimeStats {
  std::vector<int> samples;  // t1 - t0 per (agent, item), sorted
  std::size_t censored = 0;  // copyable items never acquired
  // Mean over agents (and episodes) of items copyable but not yet held at
  // the end of each step.
  std::vector<double> outstanding;

  double mean() const;
};

struct RepetitionStats {
  double repeated_attempts = 0;  // executed repeats per agent-episode
  double repeat_reprompts = 0;   // repeats caught by a re-prompt, per agent-episode
  double format_reprompts = 0;   // unparseable answers, per agent-episode
  double reprompts_per_decision = 0;
  double fallback_rate = 0;
  std::size_t decisions = 0;
};

struct MetricsSummary {
  std::size_t episodes = 0;  // agent-episodes
  std::size_t aborted = 0;
  std::optional<SuccessStats> success;  // targeted runs only
  // Index t: mean inventory size after t steps (index 0 is the initial set).
  std::vector<double> inventory_curve;
  std::vector<double> final_inventory_by_trial;
  double final_inventory_mean = 0;
  std::optional<CopyTimeStats> copy_time;  // multi-agent runs only
  RepetitionStats repetition;

  nlohmann::json to_json() const;
};

MetricsSummary compute_metrics(const EventLog& log);

// Topology history comes from the header configuration and the Visit records.
CopyTimeStats compute_copy_time(const EventLog& log);

// Success of each agent-episode in log order (targeted runs).
std::vector<bool> episode_successes(const EventLog& log);

}  // namespace alchemy::xrun

#endif  // ALCHEMY_METRICS_H_
