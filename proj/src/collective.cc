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

#include "alchemy/collective.h"

#include <algorithm>
#include <exception>
#include <future>
#include <tuple>
#include <unordered_map>

namespace alchemy::collective {

using env::EpisodeState;

const char* to_string(TopologyKind kind) {
  return kind == TopologyKind::kFullyConnected ? "full" : "dynamic";
}

TopologyKind topology_kind_from_string(std::string_view text) {
  if (text == "full" || text == "fully_connected") return TopologyKind::kFullyConnected;
  if (text == "dynamic") return TopologyKind::kDynamic;
  throw ConfigError("unknown topology kind '" + std::string(text) + "'");
}

GroupTopology::GroupTopology(int agent_count, TopologyConfig config)
    : agent_count_(agent_count), config_(config) {
  if (agent_count <= 0) throw ContractViolation("topology needs at least one agent");
  if (config_.kind == TopologyKind::kDynamic) {
    if (config_.subgroup_size <= 0) throw ContractViolation("subgroup_size must be positive");
    if (config_.visit_length <= 0) throw ContractViolation("visit_length must be positive");
    if (config_.visit_prob < 0.0 || config_.visit_prob > 1.0) {
      throw ContractViolation("visit probability must lie in [0, 1]");
    }
  }
}

void GroupTopology::require_agent(int agent) const {
  if (agent < 0 || agent >= agent_count_) {
    throw ContractViolation("agent id " + std::to_string(agent) + " out of range");
  }
}

int GroupTopology::subgroup_count() const {
  if (config_.kind == TopologyKind::kFullyConnected) return 1;
  return (agent_count_ + config_.subgroup_size - 1) / config_.subgroup_size;
}

int GroupTopology::home_subgroup(int agent) const {
  require_agent(agent);
  return config_.kind == TopologyKind::kFullyConnected ? 0 : agent / config_.subgroup_size;
}

std::vector<int> GroupTopology::home_members(int subgroup) const {
  std::vector<int> members;
  for (int a = 0; a < agent_count_; ++a) {
    if (home_subgroup(a) == subgroup) members.push_back(a);
  }
  return members;
}

std::optional<int> GroupTopology::visiting(int agent) const {
  require_agent(agent);
  for (const auto& v : visits_) {
    if (v.visitor == agent) return v.host;
  }
  return std::nullopt;
}

int GroupTopology::location(int agent) const {
  return visiting(agent).value_or(home_subgroup(agent));
}

void GroupTopology::start_visit(int visitor, int host, int length, int step) {
  require_agent(visitor);
  if (host < 0 || host >= subgroup_count()) throw ContractViolation("host subgroup out of range");
  if (host == home_subgroup(visitor)) throw ContractViolation("agent cannot visit its own subgroup");
  if (visiting(visitor)) throw ContractViolation("agent is already visiting");
  if (length <= 0) throw ContractViolation("visit length must be positive");
  visits_.push_back({visitor, host, length, step});
}

void GroupTopology::end_visit(int visitor) {
  auto it = std::find_if(visits_.begin(), visits_.end(), [visitor](const Visit& v) { return v.visitor == visitor; });
  if (it == visits_.end()) throw ContractViolation("agent is not visiting");
  visits_.erase(it);
}

std::vector<Visit> GroupTopology::tick_visits() {
  std::vector<Visit> expired;
  std::vector<Visit> ongoing;
  for (Visit v : visits_) {
    if (--v.steps_remaining <= 0) {
      expired.push_back(v);
    } else {
      ongoing.push_back(v);
    }
  }
  visits_ = std::move(ongoing);
  return expired;
}

std::vector<std::vector<int>> GroupTopology::components() const {
  std::map<int, std::vector<int>> by_location;
  for (int a = 0; a < agent_count_; ++a) by_location[location(a)].push_back(a);
  std::vector<std::vector<int>> out;
  for (auto& [loc, members] : by_location) out.push_back(std::move(members));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> neighbors(const GroupTopology& topology, int agent) {
  const int here = topology.location(agent);
  std::vector<int> out;
  for (int b = 0; b < topology.agent_count(); ++b) {
    if (b != agent && topology.location(b) == here) out.push_back(b);
  }
  return out;
}

AdvanceResult advance_topology(GroupTopology topology, int step, Rng& rng) {
  AdvanceResult out{std::move(topology), {}};
  GroupTopology& topo = out.topology;

  for (const auto& v : topo.tick_visits()) {
    out.events.push_back({VisitEvent::Kind::kEnd, v.visitor, v.host, step});
  }

  const TopologyConfig& cfg = topo.config();
  if (cfg.kind != TopologyKind::kDynamic || step % cfg.visit_length != 0) return out;
  const int groups = topo.subgroup_count();
  if (groups < 2) return out;

  std::vector<char> busy(static_cast<std::size_t>(groups), 0);
  for (const auto& v : topo.active_visits()) {
    busy[static_cast<std::size_t>(v.host)] = 1;
    busy[static_cast<std::size_t>(topo.home_subgroup(v.visitor))] = 1;
  }
  std::vector<int> order(static_cast<std::size_t>(groups));
  for (int s = 0; s < groups; ++s) order[static_cast<std::size_t>(s)] = s;
  rng.shuffle(order);
  for (int s : order) {
    if (busy[static_cast<std::size_t>(s)]) continue;
    if (!rng.bernoulli(cfg.visit_prob)) continue;
    std::vector<int> residents;
    for (int a : topo.home_members(s)) {
      if (!topo.visiting(a)) residents.push_back(a);
    }
    if (residents.empty()) continue;
    const int visitor = residents[rng.uniform_index(residents.size())];
    int host = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(groups - 1)));
    if (host >= s) ++host;
    topo.start_visit(visitor, host, cfg.visit_length, step);
    out.events.push_back({VisitEvent::Kind::kStart, visitor, host, step});
  }
  return out;
}

env::SocialView social_view(std::span<const EpisodeState> states, const GroupTopology& topology,
                            int agent) {
  if (static_cast<int>(states.size()) != topology.agent_count()) {
    throw ContractViolation("social_view: one state per agent required");
  }
  const EpisodeState& self = states[static_cast<std::size_t>(agent)];
  using Key = std::tuple<int, int, std::size_t>;  // step, agent, position
  std::vector<std::pair<Key, env::ValidAttempt>> valid;
  std::vector<std::pair<Key, env::InvalidAttempt>> invalid;
  for (int b : neighbors(topology, agent)) {
    const EpisodeState& other = states[static_cast<std::size_t>(b)];
    const auto& v = other.valid_attempts();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!self.attempted(v[i].pair)) valid.push_back({{v[i].step, b, i}, v[i]});
    }
    const auto& w = other.invalid_attempts();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!self.attempted(w[i].pair)) invalid.push_back({{w[i].step, b, i}, w[i]});
    }
  }
  auto by_key = [](const auto& x, const auto& y) { return x.first < y.first; };
  std::sort(valid.begin(), valid.end(), by_key);
  std::sort(invalid.begin(), invalid.end(), by_key);

  env::SocialView view;
  std::unordered_map<std::uint64_t, bool> seen;
  for (const auto& [key, attempt] : valid) {
    if (seen.emplace(attempt.pair.key(), true).second) view.others_valid.push_back(attempt);
  }
  seen.clear();
  for (const auto& [key, attempt] : invalid) {
    if (seen.emplace(attempt.pair.key(), true).second) view.others_invalid.push_back(attempt);
  }
  return view;
}

DiffusionResult diffuse_perfect_copy(std::vector<EpisodeState> states, const GroupTopology& topology,
                                     int step) {
  if (static_cast<int>(states.size()) != topology.agent_count()) {
    throw ContractViolation("diffuse_perfect_copy: one state per agent required");
  }
  DiffusionResult out{std::move(states), {}};
  for (const auto& component : topology.components()) {
    if (component.size() < 2) continue;
    struct Origin {
      int step;
      int crafter;
    };
    std::vector<ItemId> order;
    std::unordered_map<std::uint32_t, Origin> origin;
    for (int a : component) {
      for (const auto& e : out.states[static_cast<std::size_t>(a)].entries()) {
        const int crafter = e.how == env::Acquisition::kCrafted ? a : e.source_agent;
        auto [it, inserted] = origin.emplace(static_cast<std::uint32_t>(e.item), Origin{e.step, crafter});
        if (inserted) {
          order.push_back(e.item);
        } else if (crafter >= 0 && (it->second.crafter < 0 || std::tie(e.step, crafter) <
                                                                   std::tie(it->second.step, it->second.crafter))) {
          it->second = {e.step, crafter};
        }
      }
    }
    for (int a : component) {
      auto& state = out.states[static_cast<std::size_t>(a)];
      for (ItemId item : order) {
        const int source = origin[static_cast<std::uint32_t>(item)].crafter;
        if (state.receive_copy(item, step, source)) out.events.push_back({a, item, source, step});
      }
    }
  }
  return out;
}

PolicyDriver::PolicyDriver(std::vector<agents::Policy*> policies, std::vector<std::uint64_t> agent_seeds,
                           std::uint64_t topology_seed, bool concurrent)
    : policies_(std::move(policies)), topology_rng_(topology_seed), concurrent_(concurrent) {
  if (policies_.size() != agent_seeds.size()) throw ContractViolation("one seed per policy required");
  for (auto seed : agent_seeds) agent_rngs_.emplace_back(seed);
}

agents::Decision PolicyDriver::decide(int agent, const agents::Observation& obs) {
  return policies_.at(static_cast<std::size_t>(agent))->decide(obs, agent_rngs_[static_cast<std::size_t>(agent)]);
}

AdvanceResult PolicyDriver::advance(GroupTopology topology, int step) {
  return advance_topology(std::move(topology), step, topology_rng_);
}

GroupState GroupState::start(const kgraph::KnowledgeGraph& graph, const env::Task& task, int agent_count,
                             TopologyConfig topology, bool copy_mechanism) {
  GroupState group{task, {}, {}, GroupTopology(agent_count, topology), copy_mechanism};
  group.states.assign(static_cast<std::size_t>(agent_count), EpisodeState::start(task, graph.item_count()));
  group.aborted.assign(static_cast<std::size_t>(agent_count), 0);
  return group;
}

bool GroupState::finished() const {
  if (round >= task.horizon) return true;
  return std::all_of(aborted.begin(), aborted.end(), [](char a) { return a != 0; });
}

void begin_episode(GroupState& group, RoundDriver& driver, RoundObserver* observer) {
  AdvanceResult advanced = driver.advance(std::move(group.topology), 0);
  group.topology = std::move(advanced.topology);
  if (observer != nullptr) {
    for (const auto& e : advanced.events) observer->on_visit(e);
  }
}

void run_round(GroupState& group, RoundDriver& driver, const kgraph::KnowledgeGraph& graph,
               RoundObserver* observer) {
  if (group.finished()) return;
  const int step = group.round;
  const int n = group.topology.agent_count();
  const std::vector<EpisodeState> snapshot = group.states;

  std::vector<std::optional<env::SocialView>> views(static_cast<std::size_t>(n));
  if (n > 1 && group.social_information) {
    for (int a = 0; a < n; ++a) views[static_cast<std::size_t>(a)] = social_view(snapshot, group.topology, a);
  }

  struct Outcome {
    std::optional<agents::Decision> decision;
    std::string error;
  };
  auto decide = [&](int a) {
    Outcome out;
    const auto idx = static_cast<std::size_t>(a);
    try {
      agents::Observation obs{group.task, snapshot[idx], views[idx] ? &*views[idx] : nullptr};
      out.decision = driver.decide(a, obs);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };

  std::vector<Outcome> outcomes(static_cast<std::size_t>(n));
  if (driver.concurrent_decisions()) {
    std::vector<std::future<Outcome>> pending(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      if (!group.aborted[static_cast<std::size_t>(a)]) {
        pending[static_cast<std::size_t>(a)] = std::async(std::launch::async, decide, a);
      }
    }
    for (int a = 0; a < n; ++a) {
      if (pending[static_cast<std::size_t>(a)].valid()) outcomes[static_cast<std::size_t>(a)] = pending[static_cast<std::size_t>(a)].get();
    }
  } else {
    for (int a = 0; a < n; ++a) {
      if (!group.aborted[static_cast<std::size_t>(a)]) outcomes[static_cast<std::size_t>(a)] = decide(a);
    }
  }

  for (int a = 0; a < n; ++a) {
    const auto idx = static_cast<std::size_t>(a);
    if (group.aborted[idx]) continue;
    Outcome& o = outcomes[idx];
    if (o.decision) {
      if (observer != nullptr) observer->on_decision(a, step, *o.decision);
      try {
        env::StepResult result = env::step(graph, std::move(group.states[idx]), o.decision->action);
        group.states[idx] = std::move(result.state);
        if (result.outcome.kind == env::StepOutcome::Kind::kRepeatedAttempt) group.states[idx].spend_step();
        if (observer != nullptr) observer->on_outcome(a, result.outcome);
        continue;
      } catch (const std::exception& e) {
        group.states[idx] = snapshot[idx];
        o.error = e.what();
      }
    }
    group.aborted[idx] = 1;
    if (observer != nullptr) observer->on_abort(a, step, o.error);
  }

  if (group.copy_mechanism) {
    DiffusionResult diffused = diffuse_perfect_copy(std::move(group.states), group.topology, step);
    group.states = std::move(diffused.states);
    if (observer != nullptr) {
      for (const auto& e : diffused.events) observer->on_diffusion(e);
    }
  }

  ++group.round;
  AdvanceResult advanced = driver.advance(std::move(group.topology), group.round);
  group.topology = std::move(advanced.topology);
  if (observer != nullptr) {
    for (const auto& e : advanced.events) observer->on_visit(e);
  }
}

}  // namespace alchemy::collective
