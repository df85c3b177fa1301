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

#include "alchemy/metrics.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>

#include "alchemy/collective.h"
#include "alchemy/core.h"

namespace alchemy::xrun {

using nlohmann::json;

namespace {

struct AgentTrace {
  // item -> step it arrived; -1 for initial items
  std::unordered_map<std::string, int> acquired;
  std::vector<std::pair<std::string, int>> order;  // arrival order
  std::vector<int> gains;                          // step of each non-initial arrival
  std::optional<bool> success;
  std::size_t final_size = 0;
  bool aborted = false;
  bool ended = false;
  int repeated_attempts = 0;
  int repeat_reprompts = 0;
  int format_reprompts = 0;

  void add(const std::string& item, int step) {
    if (acquired.emplace(item, step).second) {
      order.emplace_back(item, step);
      if (step >= 0) gains.push_back(step);
    }
  }
};

struct Episode {
  int trial = 0;
  int task = 0;
  int horizon = 0;
  bool targeted = false;
  std::vector<AgentTrace> agents;
  std::vector<collective::VisitEvent> visits;  // log order
};

struct Parsed {
  collective::TopologyConfig topology;
  std::vector<Episode> episodes;
  std::size_t decisions = 0;
  std::size_t reprompts = 0;
  std::size_t fallbacks = 0;
};

collective::TopologyConfig topology_from_header(const json& header) {
  collective::TopologyConfig cfg;
  const json& topo = header.at("config").at("group").at("topology");
  cfg.kind = collective::topology_kind_from_string(topo.at("kind").get<std::string>());
  if (topo.contains("subgroup_size")) cfg.subgroup_size = topo.at("subgroup_size");
  if (topo.contains("p")) cfg.visit_prob = topo.at("p");
  if (topo.contains("visit_length")) cfg.visit_length = topo.at("visit_length");
  return cfg;
}

Parsed parse(const EventLog& log) {
  Parsed out;
  out.topology = topology_from_header(log.header());
  Episode* ep = nullptr;
  for (const auto& r : log.records()) {
    const std::string& type = r.at("type").get_ref<const std::string&>();
    if (type == "RunHeader") continue;
    if (type == "TaskStart") {
      Episode e;
      e.trial = r.at("trial");
      e.task = r.at("task");
      e.horizon = r.at("horizon");
      e.targeted = !r.at("target").is_null();
      e.agents.resize(r.at("agents").get<std::size_t>());
      for (auto& a : e.agents) {
        for (const auto& name : r.at("initial_items")) a.add(name.get<std::string>(), -1);
      }
      out.episodes.push_back(std::move(e));
      ep = &out.episodes.back();
      continue;
    }
    if (ep == nullptr) throw ConfigError("event log record before the first TaskStart");
    const int agent = r.at("agent");
    const int step = r.at("step");
    if (type == "Visit") {
      ep->visits.push_back({r.at("event") == "start" ? collective::VisitEvent::Kind::kStart
                                                     : collective::VisitEvent::Kind::kEnd,
                            agent, r.at("host").get<int>(), step});
      continue;
    }
    if (agent < 0 || static_cast<std::size_t>(agent) >= ep->agents.size()) {
      throw ConfigError("event log record for unknown agent " + std::to_string(agent));
    }
    AgentTrace& a = ep->agents[static_cast<std::size_t>(agent)];
    if (type == "StepOutcome") {
      const std::string& kind = r.at("outcome").get_ref<const std::string&>();
      if (kind == "NewItem") a.add(r.at("item").get<std::string>(), step);
      if (kind == "RepeatedAttempt") ++a.repeated_attempts;
    } else if (type == "Diffusion") {
      a.add(r.at("item").get<std::string>(), step);
    } else if (type == "Decision") {
      ++out.decisions;
      out.reprompts += r.at("reprompts").get<std::size_t>();
      if (r.at("fallback").get<bool>()) ++out.fallbacks;
    } else if (type == "Reprompt") {
      if (r.at("reason") == "repeated") {
        ++a.repeat_reprompts;
      } else {
        ++a.format_reprompts;
      }
    } else if (type == "EpisodeEnd") {
      a.ended = true;
      a.final_size = r.at("inventory_size");
      a.aborted = r.at("aborted");
      if (!r.at("success").is_null()) a.success = r.at("success").get<bool>();
    }
  }
  return out;
}

void copy_time_for(const Episode& ep, const collective::TopologyConfig& cfg, CopyTimeStats& stats,
                   std::vector<double>& outstanding_sum) {
  const int n = static_cast<int>(ep.agents.size());
  if (n < 2) return;
  collective::GroupTopology topo(n, cfg);
  std::size_t next_visit = 0;
  // t0 per agent per item; items the agent already held are skipped
  std::vector<std::unordered_map<std::string, int>> first_seen(static_cast<std::size_t>(n));

  for (int r = 0; r < ep.horizon; ++r) {
    for (; next_visit < ep.visits.size() && ep.visits[next_visit].step <= r; ++next_visit) {
      const auto& v = ep.visits[next_visit];
      if (v.kind == collective::VisitEvent::Kind::kStart) {
        topo.start_visit(v.visitor, v.host, cfg.visit_length, v.step);
      } else {
        topo.end_visit(v.visitor);
      }
    }
    for (int a = 0; a < n; ++a) {
      const AgentTrace& self = ep.agents[static_cast<std::size_t>(a)];
      auto& seen = first_seen[static_cast<std::size_t>(a)];
      for (int b : collective::neighbors(topo, a)) {
        for (const auto& [item, at] : ep.agents[static_cast<std::size_t>(b)].order) {
          if (at > r) break;
          if (seen.count(item)) continue;
          auto own = self.acquired.find(item);
          if (own != self.acquired.end() && own->second < r) continue;
          seen.emplace(item, r);
        }
      }
    }
  }

  if (outstanding_sum.size() < static_cast<std::size_t>(ep.horizon)) {
    outstanding_sum.resize(static_cast<std::size_t>(ep.horizon), 0.0);
  }
  for (int a = 0; a < n; ++a) {
    const AgentTrace& self = ep.agents[static_cast<std::size_t>(a)];
    for (const auto& [item, t0] : first_seen[static_cast<std::size_t>(a)]) {
      auto own = self.acquired.find(item);
      int until = ep.horizon;
      if (own != self.acquired.end()) {
        stats.samples.push_back(own->second - t0);
        until = own->second;
      } else {
        ++stats.censored;
      }
      for (int t = t0; t < until; ++t) outstanding_sum[static_cast<std::size_t>(t)] += 1.0 / n;
    }
  }
}

CopyTimeStats copy_time_from(const Parsed& parsed) {
  CopyTimeStats stats;
  std::vector<double> sum;
  std::size_t multi = 0;
  for (const auto& ep : parsed.episodes) {
    if (ep.agents.size() < 2) continue;
    ++multi;
    copy_time_for(ep, parsed.topology, stats, sum);
  }
  std::sort(stats.samples.begin(), stats.samples.end());
  stats.outstanding = std::move(sum);
  if (multi > 0) {
    for (double& v : stats.outstanding) v /= static_cast<double>(multi);
  }
  return stats;
}

double population_variance(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size());
}

}  // namespace

double CopyTimeStats::mean() const {
  if (samples.empty()) return 0;
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

CopyTimeStats compute_copy_time(const EventLog& log) { return copy_time_from(parse(log)); }

std::vector<bool> episode_successes(const EventLog& log) {
  std::vector<bool> out;
  for (const auto& ep : parse(log).episodes) {
    for (const auto& a : ep.agents) out.push_back(a.success.value_or(false));
  }
  return out;
}

MetricsSummary compute_metrics(const EventLog& log) {
  const Parsed parsed = parse(log);
  MetricsSummary m;

  std::map<int, std::vector<double>> success_by_trial;
  std::map<int, std::pair<double, std::size_t>> final_by_trial;
  std::vector<double> curve_sum;
  bool multi_agent = false;
  for (const auto& ep : parsed.episodes) {
    if (ep.agents.size() > 1) multi_agent = true;
    for (const auto& a : ep.agents) {
      const auto initial = std::count_if(a.order.begin(), a.order.end(), [](const auto& e) { return e.second < 0; });
      ++m.episodes;
      if (a.aborted) ++m.aborted;
      if (ep.targeted) success_by_trial[ep.trial].push_back(a.success.value_or(false) ? 1.0 : 0.0);
      auto& f = final_by_trial[ep.trial];
      f.first += static_cast<double>(a.final_size);
      ++f.second;

      if (curve_sum.size() < static_cast<std::size_t>(ep.horizon) + 1) {
        curve_sum.resize(static_cast<std::size_t>(ep.horizon) + 1, 0.0);
      }
      std::vector<int> per_step(static_cast<std::size_t>(ep.horizon) + 1, 0);
      for (int g : a.gains) {
        if (g < ep.horizon) ++per_step[static_cast<std::size_t>(g) + 1];
      }
      double size = static_cast<double>(initial);
      for (std::size_t t = 0; t < per_step.size(); ++t) {
        size += per_step[t];
        curve_sum[t] += size;
      }
      m.repetition.repeated_attempts += a.repeated_attempts;
      m.repetition.repeat_reprompts += a.repeat_reprompts;
      m.repetition.format_reprompts += a.format_reprompts;
    }
  }

  if (m.episodes > 0) {
    const double n = static_cast<double>(m.episodes);
    for (double& v : curve_sum) v /= n;
    m.repetition.repeated_attempts /= n;
    m.repetition.repeat_reprompts /= n;
    m.repetition.format_reprompts /= n;
  }
  m.inventory_curve = std::move(curve_sum);

  double final_total = 0;
  std::size_t final_count = 0;
  for (const auto& [trial, f] : final_by_trial) {
    m.final_inventory_by_trial.push_back(f.first / static_cast<double>(f.second));
    final_total += f.first;
    final_count += f.second;
  }
  if (final_count > 0) m.final_inventory_mean = final_total / static_cast<double>(final_count);

  if (!success_by_trial.empty()) {
    SuccessStats s;
    std::vector<double> all;
    for (const auto& [trial, v] : success_by_trial) all.insert(all.end(), v.begin(), v.end());
    s.episodes = all.size();
    s.mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
    s.total_variance = population_variance(all, s.mean);
    for (const auto& [trial, v] : success_by_trial) {
      const double w = static_cast<double>(v.size()) / static_cast<double>(all.size());
      const double tm = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      s.trial_means.push_back(tm);
      s.within_trial_variance += w * population_variance(v, tm);
      s.across_trial_variance += w * (tm - s.mean) * (tm - s.mean);
    }
    m.success = std::move(s);
  }

  if (multi_agent) m.copy_time = copy_time_from(parsed);

  m.repetition.decisions = parsed.decisions;
  if (parsed.decisions > 0) {
    m.repetition.reprompts_per_decision =
        static_cast<double>(parsed.reprompts) / static_cast<double>(parsed.decisions);
    m.repetition.fallback_rate = static_cast<double>(parsed.fallbacks) / static_cast<double>(parsed.decisions);
  }
  return m;
}

json MetricsSummary::to_json() const {
  json out = {{"episodes", episodes},
              {"aborted", aborted},
              {"inventory_curve", inventory_curve},
              {"final_inventory_by_trial", final_inventory_by_trial},
              {"final_inventory_mean", final_inventory_mean},
              {"repetition",
               {{"repeated_attempts", repetition.repeated_attempts},
                {"repeat_reprompts", repetition.repeat_reprompts},
                {"format_reprompts", repetition.format_reprompts},
                {"reprompts_per_decision", repetition.reprompts_per_decision},
                {"fallback_rate", repetition.fallback_rate},
                {"decisions", repetition.decisions}}}};
  if (success) {
    out["success"] = {{"mean", success->mean},
                      {"total_variance", success->total_variance},
                      {"within_trial_variance", success->within_trial_variance},
                      {"across_trial_variance", success->across_trial_variance},
                      {"episodes", success->episodes},
                      {"trial_means", success->trial_means}};
  } else {
    out["success"] = nullptr;
  }
  if (copy_time) {
    out["copy_time"] = {{"samples", copy_time->samples.size()},
                        {"mean", copy_time->mean()},
                        {"censored", copy_time->censored},
                        {"values", copy_time->samples},
                        {"outstanding", copy_time->outstanding}};
  } else {
    out["copy_time"] = nullptr;
  }
  return out;
}

}  // namespace alchemy::xrun
