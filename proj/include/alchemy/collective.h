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

#ifndef ALCHEMY_COLLECTIVE_H_
#define ALCHEMY_COLLECTIVE_H_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alchemy/agents.h"
#include "alchemy/env.h"
#include "alchemy/kgraph.h"
#include "alchemy/rng.h"

namespace alchemy::collective {

enum class TopologyKind { kFullyConnected, kDynamic };

const char* to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(std::string_view text);

struct TopologyConfig {
  TopologyKind kind = TopologyKind::kFullyConnected;
  int subgroup_size = 2;
  double visit_prob = 0.2;
  int visit_length = 50;

  friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

struct Visit {
  int visitor;
  int host;  // subgroup index
  int steps_remaining;
  int started_at;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct VisitEvent {
  enum class Kind { kStart, kEnd };

  Kind kind;
  int visitor;
  int host;
  int step;

  friend bool operator==(const VisitEvent&, const VisitEvent&) = default;
};

// Who can see whom. Fully connected groups are one clique. Dynamic groups
// split agents into consecutive subgroups; a visiting agent sits with the
// host subgroup and loses its home links until the visit ends.
class GroupTopology {
 public:
  GroupTopology(int agent_count, TopologyConfig config);

  int agent_count() const { return agent_count_; }
  const TopologyConfig& config() const { return config_; }
  int subgroup_count() const;
  int home_subgroup(int agent) const;
  std::vector<int> home_members(int subgroup) const;

  // Subgroup the agent currently sits in (its host while visiting).
  int location(int agent) const;
  std::optional<int> visiting(int agent) const;
  std::span<const Visit> active_visits() const { return visits_; }

  void start_visit(int visitor, int host, int length, int step);
  void end_visit(int visitor);
  // Decrements every visit counter and removes (returns) the expired visits.
  std::vector<Visit> tick_visits();

  // Connected components of the neighbor relation, each sorted, ordered by
  // smallest member.
  std::vector<std::vector<int>> components() const;

  friend bool operator==(const GroupTopology&, const GroupTopology&) = default;

 private:
  void require_agent(int agent) const;

  int agent_count_;
  TopologyConfig config_;
  std::vector<Visit> visits_;
};

// Sorted neighbor ids; never contains the agent itself.
std::vector<int> neighbors(const GroupTopology& topology, int agent);

struct AdvanceResult {
  GroupTopology topology;
  std::vector<VisitEvent> events;
};

// Ages active visits (expired visitors return home), then at visit-window
// boundaries (step % V == 0) lets each eligible subgroup, in random order,
// send one resident member to another random subgroup with probability p.
AdvanceResult advance_topology(GroupTopology topology, int step, Rng& rng);

env::SocialView social_view(std::span<const env::EpisodeState> states, const GroupTopology& topology,
                            int agent);

struct DiffusionEvent {
  int agent;
  ItemId item;
  int source_agent;  // first agent that crafted the item
  int step;

  friend bool operator==(const DiffusionEvent&, const DiffusionEvent&) = default;
};

struct DiffusionResult {
  std::vector<env::EpisodeState> states;
  std::vector<DiffusionEvent> events;
};

// Perfect copy: every agent receives each item held anywhere in its
// connected component.
DiffusionResult diffuse_perfect_copy(std::vector<env::EpisodeState> states,
                                     const GroupTopology& topology, int step);

// Supplies decisions and topology changes to the round loop. The live
// implementation uses policies and rng streams; replay feeds logged values.
class RoundDriver {
 public:
  virtual ~RoundDriver() = default;
  virtual agents::Decision decide(int agent, const agents::Observation& obs) = 0;
  virtual AdvanceResult advance(GroupTopology topology, int step) = 0;
  // True when decide() may be called concurrently for distinct agents.
  virtual bool concurrent_decisions() const { return false; }
};

class PolicyDriver : public RoundDriver {
 public:
  // agent_seeds and topology_seed seed the per-agent and topology streams.
  PolicyDriver(std::vector<agents::Policy*> policies, std::vector<std::uint64_t> agent_seeds,
               std::uint64_t topology_seed, bool concurrent = false);

  agents::Decision decide(int agent, const agents::Observation& obs) override;
  AdvanceResult advance(GroupTopology topology, int step) override;
  bool concurrent_decisions() const override { return concurrent_; }

 private:
  std::vector<agents::Policy*> policies_;
  std::vector<Rng> agent_rngs_;
  Rng topology_rng_;
  bool concurrent_;
};

class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  virtual void on_decision(int /*agent*/, int /*step*/, const agents::Decision&) {}
  virtual void on_outcome(int /*agent*/, const env::StepOutcome&) {}
  virtual void on_diffusion(const DiffusionEvent&) {}
  virtual void on_visit(const VisitEvent&) {}
  virtual void on_abort(int /*agent*/, int /*step*/, const std::string& /*reason*/) {}
};

struct GroupState {
  env::Task task;
  std::vector<env::EpisodeState> states;
  std::vector<char> aborted;
  GroupTopology topology;
  bool copy_mechanism = false;
  bool social_information = true;  // pass SocialView to policies
  int round = 0;

  static GroupState start(const kgraph::KnowledgeGraph& graph, const env::Task& task,
                          int agent_count, TopologyConfig topology, bool copy_mechanism);

  bool finished() const;
};

// Opens the episode: applies the step-0 topology advance.
void begin_episode(GroupState& group, RoundDriver& driver, RoundObserver* observer);

// One synchronous round: snapshot, decide, apply in agent order, diffuse,
// advance topology. Policy errors abort only the failing agent.
void run_round(GroupState& group, RoundDriver& driver, const kgraph::KnowledgeGraph& graph,
               RoundObserver* observer);

}  // namespace alchemy::collective

#endif  // ALCHEMY_COLLECTIVE_H_
