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

// Command line front end: graph conversion, task generation, runs, probes,
// reports and log replay.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 failed
// check (replay mismatch).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "alchemy/experiment.h"
#include "alchemy/kgraph.h"
#include "alchemy/probes.h"
#include "alchemy/report.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace alchemy {
namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kCheckFailed = 3;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

// Paths in a config resolve against the working directory first, then
// against the directory holding the config.
std::string resolve_near(const std::string& path, const fs::path& config_path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  const fs::path alt = config_path.parent_path() / path;
  return fs::exists(alt) ? alt.string() : path;
}

kgraph::KnowledgeGraph load_graph_reporting(const std::string& path) {
  kgraph::KnowledgeGraph g = kgraph::load_graph_file(path);
  for (const auto& w : g.warnings()) std::cerr << "warning: " << w << '\n';
  return g;
}

struct RunOverrides {
  std::string config;
  std::string graph;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string output_dir;
  std::optional<int> workers;
  std::string agent;
  std::optional<double> temperature;
  std::optional<int> group_size;
  std::string topology;
  std::optional<bool> copy;
  std::string tasks;
};

void add_run_flags(CLI::App* cmd, RunOverrides& o) {
  cmd->add_option("--config,-c", o.config, "Run configuration (JSON)")->required();
  cmd->add_option("--graph", o.graph, "Recipe file (overrides config)");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--trials", o.trials, "Number of trials");
  cmd->add_option("--output-dir,-o", o.output_dir, "Output directory");
  cmd->add_option("--workers", o.workers, "Trials simulated in parallel");
  cmd->add_option("--agent", o.agent, "Agent kind: random, empowered or llm");
  cmd->add_option("--temperature", o.temperature, "Agent temperature");
  cmd->add_option("--group-size", o.group_size, "Agents per group");
  cmd->add_option("--topology", o.topology, "fully_connected or dynamic");
  cmd->add_option("--copy", o.copy, "Perfect copy mechanism (true/false)");
  cmd->add_option("--tasks", o.tasks, "Task batch file (targeted runs)");
}

xrun::RunConfig build_config(const RunOverrides& o) {
  json doc;
  try {
    doc = json::parse(read_file(o.config));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + o.config + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config " + o.config + " must be a JSON object");
  if (!o.graph.empty()) doc["graph"] = o.graph;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.trials) doc["trials"] = *o.trials;
  if (!o.output_dir.empty()) doc["output_dir"] = o.output_dir;
  if (o.workers) doc["workers"] = *o.workers;
  if (!o.agent.empty()) doc["agent"]["kind"] = o.agent;
  if (o.temperature) doc["agent"]["temperature"] = *o.temperature;
  if (o.group_size) doc["group"]["size"] = *o.group_size;
  if (!o.topology.empty()) doc["group"]["topology"]["kind"] = o.topology;
  if (o.copy) doc["group"]["copy_mechanism"] = *o.copy;
  if (!o.tasks.empty()) doc["task"]["task_file"] = o.tasks;

  xrun::RunConfig cfg = xrun::RunConfig::from_json(doc);
  if (o.graph.empty()) cfg.graph = resolve_near(cfg.graph, o.config);
  if (o.tasks.empty()) cfg.task.task_file = resolve_near(cfg.task.task_file, o.config);
  if (cfg.agent.kind == xrun::AgentKind::kLlm) {
    cfg.agent.transcripts = resolve_near(cfg.agent.transcripts, o.config);
    cfg.agent.prompt_dir = resolve_near(cfg.agent.prompt_dir, o.config);
  }
  return cfg;
}

void print_summary(const xrun::MetricsSummary& m) {
  std::cout << "episodes: " << m.episodes << '\n';
  if (m.success) {
    std::cout << "success: " << m.success->mean << " (within-trial var " << m.success->within_trial_variance
              << ", across-trial var " << m.success->across_trial_variance << ")\n";
  }
  std::cout << "final inventory: " << m.final_inventory_mean << '\n';
  if (m.copy_time) {
    std::cout << "copy time: mean " << m.copy_time->mean() << " over " << m.copy_time->samples.size()
              << " samples, " << m.copy_time->censored << " censored\n";
  }
  if (m.repetition.decisions > 0) {
    std::cout << "repeated attempts per episode: " << m.repetition.repeated_attempts << '\n';
  }
}

int cmd_convert(const std::string& input, const std::string& output) {
  std::vector<std::string> warnings;
  kgraph::GraphSource source = kgraph::convert_wordcraft(read_file(input), &warnings);
  kgraph::KnowledgeGraph g = kgraph::KnowledgeGraph::build(source);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& w : g.warnings()) std::cerr << "warning: " << w << '\n';
  write_file(output, kgraph::dump_graph(g));
  std::cout << g.item_count() << " items, " << g.recipe_count() << " recipes -> " << output << '\n';
  return 0;
}

int cmd_synth(const std::string& output, const kgraph::SurrogateParams& params) {
  kgraph::KnowledgeGraph g = kgraph::KnowledgeGraph::build(kgraph::make_surrogate_graph(params));
  write_file(output, kgraph::dump_graph(g));
  std::cout << g.item_count() << " items, " << g.recipe_count() << " recipes -> " << output << '\n';
  return 0;
}

int cmd_gen_tasks(const std::string& graph_path, int depth, int distractors, int count, std::uint64_t seed,
                  int horizon, const std::string& output) {
  kgraph::KnowledgeGraph g = load_graph_reporting(graph_path);
  Rng rng(seed);
  std::vector<env::Task> tasks = env::sample_task_batch(g, depth, distractors, count, rng, horizon);
  const std::string text = env::dump_tasks(g, tasks);
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    write_file(output, text);
    std::cout << tasks.size() << " tasks -> " << output << '\n';
  }
  return 0;
}

int cmd_run(const RunOverrides& o) {
  xrun::RunConfig cfg = build_config(o);
  if (cfg.output_dir.empty()) throw ConfigError("no output directory (set output_dir or pass --output-dir)");
  kgraph::KnowledgeGraph g = load_graph_reporting(cfg.graph);
  xrun::RunResult result = xrun::run_experiment(cfg, g);
  xrun::write_run_outputs(result, cfg.output_dir);
  print_summary(result.summary);
  std::cout << "log: " << (fs::path(cfg.output_dir) / "events.jsonl").string() << '\n';
  return 0;
}

int cmd_probe_semantics(const RunOverrides& o, std::uint64_t scramble_seed) {
  xrun::RunConfig cfg = build_config(o);
  if (cfg.output_dir.empty()) throw ConfigError("no output directory (set output_dir or pass --output-dir)");
  kgraph::KnowledgeGraph g = load_graph_reporting(cfg.graph);
  xrun::SemanticsProbeResult probe = xrun::probe_semantics(cfg, g, scramble_seed);
  const fs::path dir = cfg.output_dir;
  xrun::write_run_outputs(probe.original, dir / "original");
  xrun::write_run_outputs(probe.scrambled, dir / "scrambled");
  write_file(dir / "mapping.json", kgraph::dump_mapping(probe.mapping));
  const double s0 = probe.original.summary.success ? probe.original.summary.success->mean : 0;
  const double s1 = probe.scrambled.summary.success ? probe.scrambled.summary.success->mean : 0;
  json out = {{"scramble_seed", scramble_seed}, {"success_original", s0}, {"success_scrambled", s1}};
  write_file(dir / "probe.json", out.dump(2) + "\n");
  std::cout << "success original: " << s0 << "\nsuccess scrambled: " << s1 << '\n';
  return 0;
}

int cmd_probe_prediction(const std::string& graph_path, std::size_t count, std::uint64_t seed,
                         const std::string& transcript, const std::string& record, const std::string& output) {
  kgraph::KnowledgeGraph g = load_graph_reporting(graph_path);
  std::vector<ItemPair> combos = xrun::sample_valid_combinations(g, count, seed);
  std::unique_ptr<llm::ChatClient> client;
  std::unique_ptr<llm::ChatClient> inner;
  if (!transcript.empty()) {
    client = llm::replay_transcript(transcript);
  } else {
    inner = std::make_unique<llm::HttpChatClient>(llm::EndpointConfig::from_env());
    if (!record.empty()) {
      client = std::make_unique<llm::RecordingChatClient>(*inner, fs::path(record));
    }
  }
  llm::ChatClient& c = client ? *client : *inner;
  Rng rng(derive_seed(seed, {1}));
  xrun::PredictionProbeResult result = xrun::probe_prediction(g, combos, c, xrun::exact_match, rng);
  const std::string text = result.to_json().dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file(output, text);
  }
  std::cerr << "combinations: " << result.rows.size() << ", mean score " << result.mean_score
            << ", random baseline " << result.baseline_mean_score << ", unparseable " << result.flagged << '\n';
  return 0;
}

std::string label_for(const fs::path& log_path) {
  if (log_path.filename() == "events.jsonl" && log_path.has_parent_path()) {
    return log_path.parent_path().filename().string();
  }
  return log_path.stem().string();
}

int cmd_report(const std::vector<std::string>& paths, const std::vector<std::string>& labels,
               const std::string& out_dir, bool allow_mixed) {
  if (!labels.empty() && labels.size() != paths.size()) {
    throw ConfigError("--label must be given once per log");
  }
  std::vector<xrun::LabeledLog> logs;
  std::map<std::string, int> used;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string label = labels.empty() ? label_for(paths[i]) : labels[i];
    if (used[label]++ > 0) label += "#" + std::to_string(used[label]);
    logs.push_back({label, xrun::EventLog::load(paths[i])});
  }
  xrun::Report report = xrun::build_report(logs, allow_mixed);
  xrun::write_report(report, out_dir);
  for (const auto& [name, content] : report.files) std::cout << (fs::path(out_dir) / name).string() << '\n';
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& graph_override, const std::string& out) {
  xrun::EventLog original = xrun::EventLog::load(log_path);
  std::string graph_path = graph_override;
  if (graph_path.empty()) graph_path = original.header().at("config").at("graph").get<std::string>();
  kgraph::KnowledgeGraph g = load_graph_reporting(graph_path);
  xrun::EventLog replayed = xrun::replay_log(g, original);
  if (!out.empty()) replayed.save(out);
  const std::string a = original.to_jsonl();
  const std::string b = replayed.to_jsonl();
  if (a == b) {
    std::cout << "replay identical (" << original.size() << " records)\n";
    return 0;
  }
  std::size_t line = 0;
  const auto& ra = original.records();
  const auto& rb = replayed.records();
  while (line < ra.size() && line < rb.size() && ra[line] == rb[line]) ++line;
  std::cout << "replay differs at record " << line + 1 << '\n';
  return kCheckFailed;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Collective innovation simulations on crafting graphs"};
  app.require_subcommand(1);

  std::string convert_in, convert_out;
  auto* convert = app.add_subcommand("convert", "Convert a Wordcraft recipe file to the canonical format");
  convert->add_option("--input,-i", convert_in, "Wordcraft JSON")->required();
  convert->add_option("--output,-o", convert_out, "Canonical recipe file")->required();

  std::string synth_out;
  kgraph::SurrogateParams synth_params;
  auto* synth = app.add_subcommand("synth-graph", "Write the deterministic surrogate crafting graph");
  synth->add_option("--output,-o", synth_out, "Recipe file")->required();
  synth->add_option("--items", synth_params.item_count, "Item count");
  synth->add_option("--recipes", synth_params.recipe_count, "Recipe count");
  synth->add_option("--seed", synth_params.seed, "Generator seed");

  std::string gen_graph, gen_out;
  int gen_depth = 1, gen_distractors = 3, gen_count = 50, gen_horizon = 6;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-tasks", "Sample a batch of targeted tasks");
  gen->add_option("--graph,-g", gen_graph, "Recipe file")->required();
  gen->add_option("--depth,-d", gen_depth, "Crafting depth")->check(CLI::Range(1, 4));
  gen->add_option("--distractors,-w", gen_distractors, "Distractor count")->check(CLI::NonNegativeNumber);
  gen->add_option("--count,-n", gen_count, "Number of tasks")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "Sampling seed");
  gen->add_option("--horizon", gen_horizon, "Steps per episode")->check(CLI::PositiveNumber);
  gen->add_option("--output,-o", gen_out, "Task file (stdout when omitted)");

  RunOverrides run_flags;
  auto* run = app.add_subcommand("run", "Run an experiment and write its event log and summary");
  add_run_flags(run, run_flags);

  auto* probe = app.add_subcommand("probe", "Semantics and prediction probes");
  probe->require_subcommand(1);
  RunOverrides sem_flags;
  std::uint64_t scramble_seed = 0;
  auto* semantics = probe->add_subcommand("semantics", "Same task batch on the original and a scrambled graph");
  add_run_flags(semantics, sem_flags);
  semantics->add_option("--scramble-seed", scramble_seed, "Seed for the item renaming");

  std::string pred_graph, pred_transcript, pred_record, pred_out;
  std::size_t pred_count = 50;
  std::uint64_t pred_seed = 0;
  auto* prediction = probe->add_subcommand("prediction", "Ask the model to predict crafting results");
  prediction->add_option("--graph,-g", pred_graph, "Recipe file")->required();
  prediction->add_option("--count,-n", pred_count, "Number of combinations");
  prediction->add_option("--seed", pred_seed, "Seed for combinations and the random baseline");
  prediction->add_option("--transcript", pred_transcript, "Replay answers from a transcript");
  prediction->add_option("--record", pred_record, "Record live exchanges to a transcript");
  prediction->add_option("--output,-o", pred_out, "Result file (stdout when omitted)");

  std::vector<std::string> report_logs, report_labels;
  std::string report_out = "report";
  bool allow_mixed = false;
  auto* report = app.add_subcommand("report", "Tables and charts recomputed from event logs");
  report->add_option("logs", report_logs, "Event logs")->required();
  report->add_option("--label", report_labels, "Display label per log");
  report->add_option("--out,-o", report_out, "Output directory");
  report->add_flag("--allow-mixed", allow_mixed, "Accept logs with different graphs or task specs");

  std::string replay_in, replay_graph, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-simulate a log and compare it with the original");
  replay->add_option("log", replay_in, "Event log")->required();
  replay->add_option("--graph,-g", replay_graph, "Recipe file (default: the one named in the log)");
  replay->add_option("--out,-o", replay_out, "Write the regenerated log here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*convert) return cmd_convert(convert_in, convert_out);
    if (*synth) return cmd_synth(synth_out, synth_params);
    if (*gen) return cmd_gen_tasks(gen_graph, gen_depth, gen_distractors, gen_count, gen_seed, gen_horizon, gen_out);
    if (*run) return cmd_run(run_flags);
    if (*semantics) return cmd_probe_semantics(sem_flags, scramble_seed);
    if (*prediction) {
      return cmd_probe_prediction(pred_graph, pred_count, pred_seed, pred_transcript, pred_record, pred_out);
    }
    if (*report) return cmd_report(report_logs, report_labels, report_out, allow_mixed);
    if (*replay) return cmd_replay(replay_in, replay_graph, replay_out);
  } catch (const xrun::ReplayMismatch& e) {
    std::cerr << "replay mismatch: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}

}  // namespace
}  // namespace alchemy

int main(int argc, char** argv) { return alchemy::main_impl(argc, argv); }
