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

#include "alchemy/experiment.h"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include "alchemy/hash.h"
#include "alchemy/rng.h"

namespace alchemy::xrun {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTaskStream = 0x7461736b;
constexpr std::uint64_t kAgentStream = 0x6167656e;
constexpr std::uint64_t kTopologyStream = 0x746f706f;
constexpr int kLogFormat = 1;

// Typed access to one JSON object that remembers which keys were read, so
// misspelled settings are reported instead of silently ignored.
class Fields {
 public:
  Fields(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  Fields child(const std::string& key) { return Fields(raw(key), path_ + "/" + key); }

  template <typename T>
  std::optional<T> get(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    const json& v = doc_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (v.is_boolean()) return v.get<bool>();
      if (v.is_string() && (v == "on" || v == "off")) return v == "on";
      fail(key, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (v.is_string()) return v.get<std::string>();
      fail(key, "a string");
    } else if constexpr (std::is_same_v<T, double>) {
      if (v.is_number()) return v.get<double>();
      fail(key, "a number");
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (v.is_number_unsigned()) return v.get<std::uint64_t>();
      fail(key, "a non-negative integer");
    } else if constexpr (std::is_same_v<T, int>) {
      if (v.is_number_integer()) return v.get<int>();
      fail(key, "an integer");
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); })) {
        return v.get<std::vector<std::string>>();
      }
      fail(key, "an array of strings");
    }
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown setting " + path_ + "/" + key);
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  [[noreturn]] void fail(const std::string& key, const char* what) const {
    throw ConfigError(path_ + "/" + key + " must be " + what);
  }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

AgentKind agent_kind_from_string(const std::string& text) {
  if (text == "random") return AgentKind::kRandom;
  if (text == "empowered") return AgentKind::kEmpowered;
  if (text == "llm") return AgentKind::kLlm;
  throw ConfigError("unknown agent kind '" + text + "' (expected random, empowered or llm)");
}

LlmMode llm_mode_from_string(const std::string& text) {
  if (text == "live") return LlmMode::kLive;
  if (text == "record") return LlmMode::kRecord;
  if (text == "replay") return LlmMode::kReplay;
  throw ConfigError("unknown llm mode '" + text + "' (expected live, record or replay)");
}

agents::ParseTolerance tolerance_from_string(const std::string& text) {
  if (text == "strict") return agents::ParseTolerance::kStrict;
  if (text == "lenient") return agents::ParseTolerance::kLenient;
  throw ConfigError("unknown parse tolerance '" + text + "'");
}

const char* to_string(agents::ParseTolerance t) {
  return t == agents::ParseTolerance::kStrict ? "strict" : "lenient";
}

std::filesystem::path transcript_path(const RunConfig& cfg, int agent) {
  return std::filesystem::path(cfg.agent.transcripts) / ("agent_" + std::to_string(agent) + ".jsonl");
}

// Recording client that owns the client it wraps.
class OwningRecorder : public llm::ChatClient {
 public:
  OwningRecorder(std::unique_ptr<llm::ChatClient> inner, const std::filesystem::path& path)
      : inner_(std::move(inner)), recorder_(*inner_, path) {}
  llm::ChatResponse complete(const llm::ChatRequest& request) override { return recorder_.complete(request); }

 private:
  std::unique_ptr<llm::ChatClient> inner_;
  llm::RecordingChatClient recorder_;
};

std::vector<std::string> names_of(const kgraph::KnowledgeGraph& graph, const std::vector<ItemId>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (ItemId id : ids) out.push_back(graph.name(id));
  return out;
}

json record(const char* type, int trial, int task, int agent, int step) {
  return json{{"type", type}, {"trial", trial}, {"task", task}, {"agent", agent}, {"step", step}};
}

class LogObserver : public collective::RoundObserver {
 public:
  LogObserver(EventLog& log, const kgraph::KnowledgeGraph& graph, int trial, int task)
      : log_(log), graph_(graph), trial_(trial), task_(task) {}

  void on_decision(int agent, int step, const agents::Decision& d) override {
    for (const auto& r : d.reprompts) {
      json rec = record("Reprompt", trial_, task_, agent, step);
      rec["reason"] = agents::to_string(r.reason);
      rec["output"] = r.raw_output;
      log_.append(std::move(rec));
    }
    json rec = record("Decision", trial_, task_, agent, step);
    rec["first"] = graph_.name(d.action.first());
    rec["second"] = graph_.name(d.action.second());
    rec["reprompts"] = d.reprompts_used;
    rec["fallback"] = d.fallback_used;
    if (d.reasoning) rec["reasoning"] = *d.reasoning;
    log_.append(std::move(rec));
  }

  void on_outcome(int agent, const env::StepOutcome& o) override {
    json rec = record("StepOutcome", trial_, task_, agent, o.step_index);
    rec["outcome"] = env::to_string(o.kind);
    rec["item"] = o.item ? json(graph_.name(*o.item)) : json(nullptr);
    log_.append(std::move(rec));
  }

  void on_diffusion(const collective::DiffusionEvent& e) override {
    json rec = record("Diffusion", trial_, task_, e.agent, e.step);
    rec["item"] = graph_.name(e.item);
    rec["source"] = e.source_agent;
    log_.append(std::move(rec));
  }

  void on_visit(const collective::VisitEvent& e) override {
    json rec = record("Visit", trial_, task_, e.visitor, e.step);
    rec["event"] = e.kind == collective::VisitEvent::Kind::kStart ? "start" : "end";
    rec["host"] = e.host;
    log_.append(std::move(rec));
  }

  void on_abort(int agent, int step, const std::string& reason) override {
    json rec = record("AgentAbort", trial_, task_, agent, step);
    rec["reason"] = reason;
    log_.append(std::move(rec));
  }

 private:
  EventLog& log_;
  const kgraph::KnowledgeGraph& graph_;
  int trial_;
  int task_;
};

json task_start_record(const kgraph::KnowledgeGraph& graph, const env::Task& task, int trial, int index,
                       int agents) {
  json rec = record("TaskStart", trial, index, -1, 0);
  rec["task_id"] = task.task_id;
  rec["initial_items"] = names_of(graph, task.initial_items);
  rec["target"] = task.target ? json(graph.name(*task.target)) : json(nullptr);
  rec["horizon"] = task.horizon;
  rec["depth"] = task.depth ? json(*task.depth) : json(nullptr);
  rec["distractors"] = task.distractors ? json(*task.distractors) : json(nullptr);
  rec["agents"] = agents;
  return rec;
}

void log_episode_end(EventLog& log, const kgraph::KnowledgeGraph& graph, const collective::GroupState& group,
                     int trial, int index) {
  for (std::size_t a = 0; a < group.states.size(); ++a) {
    const env::EpisodeState& s = group.states[a];
    json rec = record("EpisodeEnd", trial, index, static_cast<int>(a), s.step());
    rec["success"] = group.task.is_open_ended() ? json(nullptr) : json(env::is_success(group.task, s));
    rec["inventory_size"] = s.inventory_size();
    rec["inventory"] = names_of(graph, s.inventory());
    rec["repetitions"] = s.repetition_count();
    rec["aborted"] = group.aborted[a] != 0;
    log.append(std::move(rec));
  }
}

collective::GroupState start_group(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph,
                                   const env::Task& task) {
  collective::GroupState group =
      collective::GroupState::start(graph, task, cfg.group.size, cfg.group.topology, cfg.group.copy_mechanism);
  group.social_information = cfg.group.social_information;
  return group;
}

// One trial over the whole batch, appended to its own log shard.
void run_trial(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph, const std::vector<env::Task>& tasks,
               const std::vector<agents::Policy*>& policies, int trial, EventLog& shard) {
  const int n = cfg.group.size;
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const int index = static_cast<int>(ti);
    std::vector<std::uint64_t> seeds;
    for (int a = 0; a < n; ++a) {
      seeds.push_back(derive_seed(cfg.seed, {kAgentStream, static_cast<std::uint64_t>(trial), ti,
                                             static_cast<std::uint64_t>(a)}));
    }
    collective::PolicyDriver driver(policies, seeds,
                                    derive_seed(cfg.seed, {kTopologyStream, static_cast<std::uint64_t>(trial), ti}),
                                    cfg.group.concurrent_decisions);
    collective::GroupState group = start_group(cfg, graph, tasks[ti]);
    shard.append(task_start_record(graph, tasks[ti], trial, index, n));
    LogObserver observer(shard, graph, trial, index);
    collective::begin_episode(group, driver, &observer);
    while (!group.finished()) collective::run_round(group, driver, graph, &observer);
    log_episode_end(shard, graph, group, trial, index);
  }
}

}  // namespace

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kRandom: return "random";
    case AgentKind::kEmpowered: return "empowered";
    case AgentKind::kLlm: return "llm";
  }
  return "?";
}

const char* to_string(LlmMode mode) {
  switch (mode) {
    case LlmMode::kLive: return "live";
    case LlmMode::kRecord: return "record";
    case LlmMode::kReplay: return "replay";
  }
  return "?";
}

agents::SamplingConfig AgentSpec::sampling() const {
  agents::SamplingConfig s;
  s.temperature = effective_temperature();
  s.top_p = top_p;
  s.max_reprompts = max_reprompts;
  s.max_tokens = max_tokens;
  s.model = model;
  s.tolerance = tolerance;
  return s;
}

json RunConfig::to_json() const {
  json t;
  if (task.open_ended) {
    t = {{"kind", "open_ended"}, {"initial_items", task.initial_items}};
  } else {
    t = {{"kind", "targeted"},
         {"depth", task.depth},
         {"distractors", task.distractors},
         {"tasks_per_trial", task.tasks_per_trial}};
    if (!task.task_file.empty()) t["task_file"] = task.task_file;
  }
  t["horizon"] = task.effective_horizon();

  json a = {{"kind", to_string(agent.kind)}};
  if (agent.kind != AgentKind::kRandom) a["temperature"] = agent.effective_temperature();
  if (agent.kind == AgentKind::kLlm) {
    a["top_p"] = agent.top_p;
    a["max_reprompts"] = agent.max_reprompts;
    a["max_tokens"] = agent.max_tokens;
    a["model"] = agent.model;
    a["tolerance"] = to_string(agent.tolerance);
    a["mode"] = to_string(agent.mode);
    a["transcripts"] = agent.transcripts;
    a["prompt_dir"] = agent.prompt_dir;
    a["prompt_version"] = agent.prompt_version;
  }

  json topo = {{"kind", collective::to_string(group.topology.kind)}};
  if (group.topology.kind == collective::TopologyKind::kDynamic) {
    topo["subgroup_size"] = group.topology.subgroup_size;
    topo["p"] = group.topology.visit_prob;
    topo["visit_length"] = group.topology.visit_length;
  }
  json g = {{"size", group.size},
            {"topology", topo},
            {"copy_mechanism", group.copy_mechanism},
            {"social_information", group.social_information},
            {"concurrent_decisions", group.concurrent_decisions}};

  return {{"graph", graph}, {"task", t}, {"agent", a}, {"group", g}, {"trials", trials}, {"seed", seed}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig cfg;
  Fields root(doc, "");
  cfg.graph = root.get<std::string>("graph").value_or("");
  if (root.has("task")) {
    Fields t = root.child("task");
    const std::string kind = t.get<std::string>("kind").value_or("targeted");
    if (kind == "open_ended") {
      cfg.task.open_ended = true;
      if (auto v = t.get<std::vector<std::string>>("initial_items")) cfg.task.initial_items = *v;
    } else if (kind == "targeted") {
      cfg.task.depth = t.get<int>("depth").value_or(cfg.task.depth);
      cfg.task.distractors = t.get<int>("distractors").value_or(cfg.task.distractors);
      cfg.task.tasks_per_trial = t.get<int>("tasks_per_trial").value_or(cfg.task.tasks_per_trial);
      cfg.task.task_file = t.get<std::string>("task_file").value_or("");
    } else {
      throw ConfigError("unknown task kind '" + kind + "' (expected targeted or open_ended)");
    }
    cfg.task.horizon = t.get<int>("horizon");
    t.finish();
  }
  if (root.has("agent")) {
    Fields a = root.child("agent");
    cfg.agent.kind = agent_kind_from_string(a.get<std::string>("kind").value_or("random"));
    cfg.agent.temperature = a.get<double>("temperature");
    cfg.agent.top_p = a.get<double>("top_p").value_or(cfg.agent.top_p);
    cfg.agent.max_reprompts = a.get<int>("max_reprompts").value_or(cfg.agent.max_reprompts);
    cfg.agent.max_tokens = a.get<int>("max_tokens").value_or(cfg.agent.max_tokens);
    cfg.agent.model = a.get<std::string>("model").value_or("");
    if (auto v = a.get<std::string>("tolerance")) cfg.agent.tolerance = tolerance_from_string(*v);
    if (auto v = a.get<std::string>("mode")) cfg.agent.mode = llm_mode_from_string(*v);
    cfg.agent.transcripts = a.get<std::string>("transcripts").value_or("");
    cfg.agent.prompt_dir = a.get<std::string>("prompt_dir").value_or("");
    cfg.agent.prompt_version = a.get<std::string>("prompt_version").value_or(cfg.agent.prompt_version);
    a.finish();
  }
  if (root.has("group")) {
    Fields g = root.child("group");
    cfg.group.size = g.get<int>("size").value_or(cfg.group.size);
    if (g.has("topology")) {
      Fields t = g.child("topology");
      auto& topo = cfg.group.topology;
      if (auto v = t.get<std::string>("kind")) topo.kind = collective::topology_kind_from_string(*v);
      topo.subgroup_size = t.get<int>("subgroup_size").value_or(topo.subgroup_size);
      topo.visit_prob = t.get<double>("p").value_or(topo.visit_prob);
      topo.visit_length = t.get<int>("visit_length").value_or(topo.visit_length);
      t.finish();
    }
    cfg.group.copy_mechanism = g.get<bool>("copy_mechanism").value_or(false);
    cfg.group.social_information = g.get<bool>("social_information").value_or(true);
    cfg.group.concurrent_decisions = g.get<bool>("concurrent_decisions").value_or(false);
    g.finish();
  }
  cfg.trials = root.get<int>("trials").value_or(cfg.trials);
  cfg.seed = root.get<std::uint64_t>("seed").value_or(0);
  cfg.output_dir = root.get<std::string>("output_dir").value_or("");
  cfg.workers = root.get<int>("workers").value_or(1);
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void RunConfig::validate() const {
  if (graph.empty()) throw ConfigError("config: graph file is required");
  if (trials < 0) throw ConfigError("trials must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (task.effective_horizon() < 0) throw ConfigError("task/horizon must be >= 0");
  if (!task.open_ended) {
    if (task.depth < 1) throw ConfigError("task/depth must be >= 1");
    if (task.distractors < 0) throw ConfigError("task/distractors must be >= 0");
    if (task.tasks_per_trial < 0) throw ConfigError("task/tasks_per_trial must be >= 0");
  } else if (task.initial_items.empty()) {
    throw ConfigError("task/initial_items must not be empty");
  }
  if (agent.effective_temperature() < 0) throw ConfigError("agent/temperature must be >= 0");
  if (!(agent.top_p > 0 && agent.top_p <= 1)) throw ConfigError("agent/top_p must be in (0, 1]");
  if (agent.max_reprompts < 0) throw ConfigError("agent/max_reprompts must be >= 0");
  if (agent.max_tokens < 1) throw ConfigError("agent/max_tokens must be >= 1");
  if (agent.kind == AgentKind::kLlm && agent.mode != LlmMode::kLive && agent.transcripts.empty()) {
    throw ConfigError("agent/transcripts is required for record and replay modes");
  }
  if (group.size < 1) throw ConfigError("group/size must be >= 1");
  if (group.topology.subgroup_size < 1) throw ConfigError("group/topology/subgroup_size must be >= 1");
  if (!(group.topology.visit_prob >= 0 && group.topology.visit_prob <= 1)) {
    throw ConfigError("group/topology/p must be in [0, 1]");
  }
  if (group.topology.visit_length < 1) throw ConfigError("group/topology/visit_length must be >= 1");
}

std::string RunConfig::content_hash() const { return sha256_hex(to_json().dump()); }

std::string graph_hash(const kgraph::KnowledgeGraph& graph) { return sha256_hex(kgraph::dump_graph(graph)); }

ClientFactory default_client_factory(const RunConfig& cfg) {
  return [cfg](int agent) -> std::unique_ptr<llm::ChatClient> {
    switch (cfg.agent.mode) {
      case LlmMode::kReplay:
        return llm::replay_transcript(transcript_path(cfg, agent));
      case LlmMode::kRecord: {
        std::filesystem::create_directories(cfg.agent.transcripts);
        return std::make_unique<OwningRecorder>(
            std::make_unique<llm::HttpChatClient>(llm::EndpointConfig::from_env()), transcript_path(cfg, agent));
      }
      case LlmMode::kLive:
        return std::make_unique<llm::HttpChatClient>(llm::EndpointConfig::from_env());
    }
    return nullptr;
  };
}

std::vector<env::Task> make_task_batch(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph) {
  const int horizon = cfg.task.effective_horizon();
  if (cfg.task.open_ended) return {env::make_open_ended_task(graph, cfg.task.initial_items, horizon)};
  if (!cfg.task.task_file.empty()) {
    std::ifstream in(cfg.task.task_file, std::ios::binary);
    if (!in) throw ConfigError("cannot open task file " + cfg.task.task_file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return env::load_tasks(graph, buffer.str());
  }
  Rng rng(derive_seed(cfg.seed, {kTaskStream}));
  return env::sample_task_batch(graph, cfg.task.depth, cfg.task.distractors, cfg.task.tasks_per_trial, rng,
                                horizon);
}

RunResult run_experiment(const RunConfig& cfg, const kgraph::KnowledgeGraph& graph,
                         const std::optional<std::vector<env::Task>>& tasks, ClientFactory clients) {
  cfg.validate();
  const std::vector<env::Task> batch = tasks ? *tasks : make_task_batch(cfg, graph);
  const int n = cfg.group.size;

  agents::PromptAssets prompts = cfg.agent.prompt_dir.empty()
                                     ? agents::PromptAssets::builtin()
                                     : agents::PromptAssets::load(cfg.agent.prompt_dir, cfg.agent.prompt_version);

  std::vector<std::unique_ptr<llm::ChatClient>> client_handles;
  std::vector<std::unique_ptr<agents::Policy>> owned;
  for (int a = 0; a < n; ++a) {
    switch (cfg.agent.kind) {
      case AgentKind::kRandom:
        owned.push_back(std::make_unique<agents::RandomPolicy>());
        break;
      case AgentKind::kEmpowered:
        owned.push_back(std::make_unique<agents::EmpoweredPolicy>(graph, cfg.agent.effective_temperature()));
        break;
      case AgentKind::kLlm: {
        if (!clients) clients = default_client_factory(cfg);
        client_handles.push_back(clients(a));
        owned.push_back(
            std::make_unique<agents::LlmPolicy>(*client_handles.back(), graph, prompts, cfg.agent.sampling()));
        break;
      }
    }
  }
  std::vector<agents::Policy*> policies;
  for (auto& p : owned) policies.push_back(p.get());

  RunResult result;
  json header = record("RunHeader", -1, -1, -1, -1);
  header["format"] = kLogFormat;
  header["config"] = cfg.to_json();
  header["config_hash"] = cfg.content_hash();
  header["graph_hash"] = graph_hash(graph);
  header["prompt_version"] = prompts.version;
  header["prompt_hash"] = prompts.content_hash();
  header["tasks"] = batch.size();
  result.log.append(std::move(header));

  // Trials are independent given their seeds; shards merge in trial order.
  // Scripted clients consume transcripts in order, so LLM runs stay serial.
  std::vector<EventLog> shards(static_cast<std::size_t>(cfg.trials));
  const bool parallel = cfg.workers > 1 && cfg.agent.kind != AgentKind::kLlm;
  if (parallel) {
    std::size_t next = 0;
    while (next < shards.size()) {
      std::vector<std::future<void>> running;
      for (int w = 0; w < cfg.workers && next < shards.size(); ++w, ++next) {
        running.push_back(std::async(std::launch::async, run_trial, std::cref(cfg), std::cref(graph),
                                     std::cref(batch), std::cref(policies), static_cast<int>(next),
                                     std::ref(shards[next])));
      }
      for (auto& f : running) f.get();
    }
  } else {
    for (std::size_t t = 0; t < shards.size(); ++t) run_trial(cfg, graph, batch, policies, static_cast<int>(t), shards[t]);
  }
  for (auto& shard : shards) {
    for (const auto& r : shard.records()) result.log.append(r);
  }
  result.summary = compute_metrics(result.log);
  return result;
}

void write_run_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  result.log.save(dir / "events.jsonl");
  std::ofstream out(dir / "summary.json", std::ios::binary | std::ios::trunc);
  out << result.summary.to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("failed to write " + (dir / "summary.json").string());
}

namespace {

ItemId resolve(const kgraph::KnowledgeGraph& graph, const json& name) {
  auto id = graph.find(name.get<std::string>());
  if (!id) throw ReplayMismatch("logged item '" + name.get<std::string>() + "' is not in the graph");
  return *id;
}

struct LoggedEpisode {
  env::Task task;
  int agents = 1;
  std::map<std::pair<int, int>, agents::Decision> decisions;  // (agent, step)
  std::map<std::pair<int, int>, std::string> aborts;           // aborts without a decision
  std::map<int, std::vector<collective::VisitEvent>> visits;   // by step
};

class ReplayDriver : public collective::RoundDriver {
 public:
  explicit ReplayDriver(const LoggedEpisode& episode) : episode_(episode) {}

  agents::Decision decide(int agent, const agents::Observation&) override {
    auto it = episode_.decisions.find({agent, round_});
    if (it != episode_.decisions.end()) return it->second;
    auto ab = episode_.aborts.find({agent, round_});
    if (ab != episode_.aborts.end()) throw std::runtime_error(ab->second);
    throw ReplayMismatch("no logged decision for agent " + std::to_string(agent) + " at step " +
                         std::to_string(round_));
  }

  collective::AdvanceResult advance(collective::GroupTopology topology, int step) override {
    round_ = step;
    collective::AdvanceResult out{std::move(topology), {}};
    for (const auto& v : out.topology.tick_visits()) {
      out.events.push_back({collective::VisitEvent::Kind::kEnd, v.visitor, v.host, step});
    }
    std::vector<collective::VisitEvent> logged_ends;
    auto it = episode_.visits.find(step);
    if (it != episode_.visits.end()) {
      for (const auto& e : it->second) {
        if (e.kind == collective::VisitEvent::Kind::kEnd) {
          logged_ends.push_back(e);
        } else {
          out.topology.start_visit(e.visitor, e.host, out.topology.config().visit_length, step);
          out.events.push_back(e);
        }
      }
    }
    std::vector<collective::VisitEvent> computed_ends;
    for (const auto& e : out.events) {
      if (e.kind == collective::VisitEvent::Kind::kEnd) computed_ends.push_back(e);
    }
    if (computed_ends != logged_ends) {
      throw ReplayMismatch("visit expirations at step " + std::to_string(step) + " differ from the log");
    }
    return out;
  }

 private:
  const LoggedEpisode& episode_;
  int round_ = 0;
};

}  // namespace

EventLog replay_log(const kgraph::KnowledgeGraph& graph, const EventLog& original) {
  const json& header = original.header();
  RunConfig cfg = RunConfig::from_json(header.at("config"));
  if (header.at("graph_hash") != graph_hash(graph)) {
    throw ConfigError("graph does not match the log (graph hash differs)");
  }

  EventLog out;
  out.append(header);
  const auto& records = original.records();
  std::size_t i = 1;
  while (i < records.size()) {
    const json& start = records[i];
    if (start.at("type") != "TaskStart") {
      throw ReplayMismatch("expected TaskStart at record " + std::to_string(i));
    }
    const int trial = start.at("trial");
    const int index = start.at("task");
    LoggedEpisode ep;
    ep.agents = start.at("agents");
    for (const auto& name : start.at("initial_items")) ep.task.initial_items.push_back(resolve(graph, name));
    if (!start.at("target").is_null()) ep.task.target = resolve(graph, start.at("target"));
    ep.task.horizon = start.at("horizon");
    if (!start.at("depth").is_null()) ep.task.depth = start.at("depth").get<int>();
    if (!start.at("distractors").is_null()) ep.task.distractors = start.at("distractors").get<int>();
    ep.task.task_id = start.at("task_id");

    std::map<std::pair<int, int>, std::vector<agents::Reprompt>> pending;
    std::size_t j = i + 1;
    for (; j < records.size() && records[j].at("type") != "TaskStart"; ++j) {
      const json& r = records[j];
      const std::string type = r.at("type");
      const std::pair<int, int> key{r.at("agent").get<int>(), r.at("step").get<int>()};
      if (type == "Reprompt") {
        const std::string reason = r.at("reason");
        pending[key].push_back({reason == "repeated" ? agents::Reprompt::Reason::kRepeated
                                                     : agents::Reprompt::Reason::kUnparseable,
                                r.at("output")});
      } else if (type == "Decision") {
        agents::Decision d{ItemPair(resolve(graph, r.at("first")), resolve(graph, r.at("second")))};
        d.reprompts_used = r.at("reprompts");
        d.fallback_used = r.at("fallback");
        if (r.contains("reasoning")) d.reasoning = r.at("reasoning").get<std::string>();
        d.reprompts = std::move(pending[key]);
        pending.erase(key);
        ep.decisions.emplace(key, std::move(d));
      } else if (type == "AgentAbort") {
        if (!ep.decisions.count(key)) ep.aborts.emplace(key, r.at("reason"));
      } else if (type == "Visit") {
        ep.visits[key.second].push_back({r.at("event") == "start" ? collective::VisitEvent::Kind::kStart
                                                                  : collective::VisitEvent::Kind::kEnd,
                                         key.first, r.at("host").get<int>(), key.second});
      }
    }
    i = j;

    RunConfig episode_cfg = cfg;
    episode_cfg.group.size = ep.agents;
    collective::GroupState group = start_group(episode_cfg, graph, ep.task);
    out.append(task_start_record(graph, ep.task, trial, index, ep.agents));
    ReplayDriver driver(ep);
    LogObserver observer(out, graph, trial, index);
    collective::begin_episode(group, driver, &observer);
    while (!group.finished()) collective::run_round(group, driver, graph, &observer);
    log_episode_end(out, graph, group, trial, index);
  }
  return out;
}

}  // namespace alchemy::xrun
