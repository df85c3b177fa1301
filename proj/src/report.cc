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

#include "alchemy/report.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "alchemy/core.h"
#include "alchemy/metrics.h"

namespace alchemy::xrun {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;

std::string svg_open(const std::string& title, const std::string& x_label, const std::string& y_label) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                  num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       xml_escape(title) + "</text>\n";
  s += "<text x=\"" + num(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" + num(kHeight - 10) +
       "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
  s += "<text x=\"15\" y=\"" + num(kTop + (kHeight - kTop - kBottom) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " + num(kTop + (kHeight - kTop - kBottom) / 2) +
       ")\">" + xml_escape(y_label) + "</text>\n";
  const double x0 = kLeft, y0 = kHeight - kBottom;
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" +
       num(y0) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y0) +
       "\" stroke=\"black\"/>\n";
  return s;
}

std::string y_ticks(double y_max) {
  std::string s;
  const double plot_h = kHeight - kTop - kBottom;
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4;
    const double y = kHeight - kBottom - plot_h * i / 4;
    s += "<text x=\"" + num(kLeft - 5) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(v) +
         "</text>\n";
  }
  return s;
}

std::string legend(const std::vector<std::string>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 15 * static_cast<double>(i);
    s += "<rect x=\"" + num(kWidth - kRight + 10) + "\" y=\"" + num(y) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % std::size(kPalette)] + "\"/>\n";
    s += "<text x=\"" + num(kWidth - kRight + 25) + "\" y=\"" + num(y + 9) + "\">" + xml_escape(labels[i]) +
         "</text>\n";
  }
  return s;
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  std::size_t points = 0;
  double y_max = 0;
  for (const auto& [label, v] : series) {
    points = std::max(points, v.size());
    for (double y : v) y_max = std::max(y_max, y);
  }
  if (y_max <= 0) y_max = 1;
  std::string s = svg_open(title, x_label, y_label) + y_ticks(y_max);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double dx = points > 1 ? plot_w / static_cast<double>(points - 1) : 0;
  s += "<text x=\"" + num(kLeft) + "\" y=\"" + num(kHeight - kBottom + 15) + "\" text-anchor=\"middle\">0</text>\n";
  if (points > 1) {
    s += "<text x=\"" + num(kWidth - kRight) + "\" y=\"" + num(kHeight - kBottom + 15) +
         "\" text-anchor=\"middle\">" + std::to_string(points - 1) + "</text>\n";
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    labels.push_back(series[i].first);
    std::string path;
    for (std::size_t k = 0; k < series[i].second.size(); ++k) {
      const double x = kLeft + dx * static_cast<double>(k);
      const double y = kHeight - kBottom - plot_h * series[i].second[k] / y_max;
      path += (k == 0 ? "" : " ") + num(x) + "," + num(y);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[i % std::size(kPalette)]) +
         "\" stroke-width=\"1.5\" points=\"" + path + "\"/>\n";
  }
  return s + legend(labels) + "</svg>\n";
}

std::string bar_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<std::pair<std::string, double>>& bars) {
  double y_max = 0;
  for (const auto& b : bars) y_max = std::max(y_max, b.second);
  if (y_max <= 0) y_max = 1;
  std::string s = svg_open(title, x_label, y_label) + y_ticks(y_max);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double slot = bars.empty() ? 0 : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double h = plot_h * bars[i].second / y_max;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.1;
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom - h) + "\" width=\"" + num(slot * 0.8) +
         "\" height=\"" + num(h) + "\" fill=\"" + kPalette[i % std::size(kPalette)] + "\"/>\n";
    s += "<text x=\"" + num(x + slot * 0.4) + "\" y=\"" + num(kHeight - kBottom + 15) +
         "\" text-anchor=\"middle\">" + xml_escape(bars[i].first) + "</text>\n";
  }
  return s + "</svg>\n";
}

json task_identity(const json& header) {
  json task = header.at("config").at("task");
  task.erase("task_file");
  return task;
}

std::string column_series_csv(const std::vector<std::string>& labels,
                              const std::vector<std::vector<double>>& series) {
  std::string s = "step";
  for (const auto& l : labels) s += "," + csv_field(l);
  s += "\n";
  std::size_t rows = 0;
  for (const auto& v : series) rows = std::max(rows, v.size());
  for (std::size_t t = 0; t < rows; ++t) {
    s += std::to_string(t);
    for (const auto& v : series) s += "," + (t < v.size() ? num(v[t]) : std::string());
    s += "\n";
  }
  return s;
}

}  // namespace

Report build_report(const std::vector<LabeledLog>& logs, bool allow_mixed) {
  if (logs.empty()) throw ConfigError("report needs at least one event log");
  if (!allow_mixed) {
    const json& first = logs.front().log.header();
    for (const auto& l : logs) {
      const json& h = l.log.header();
      if (h.at("graph_hash") != first.at("graph_hash")) {
        throw ConfigError("logs use different graphs (" + logs.front().label + ", " + l.label +
                          "); pass --allow-mixed to report them together");
      }
      if (task_identity(h) != task_identity(first)) {
        throw ConfigError("logs use different task specs (" + logs.front().label + ", " + l.label +
                          "); pass --allow-mixed to report them together");
      }
    }
  }

  std::vector<std::string> labels;
  std::vector<MetricsSummary> summaries;
  for (const auto& l : logs) {
    labels.push_back(l.label);
    summaries.push_back(compute_metrics(l.log));
  }

  Report report;
  std::string summary = "log,metric,value\n";
  std::string success = "log,agent,group_size,topology,copy_mechanism,depth,distractors,episodes,mean,"
                        "within_trial_variance,across_trial_variance,total_variance\n";
  std::string copy_hist = "log,copy_time,count\n";
  std::vector<std::pair<std::string, double>> success_bars;
  std::vector<std::pair<std::string, double>> copy_bars;
  bool any_success = false;
  bool any_copy = false;

  for (std::size_t i = 0; i < logs.size(); ++i) {
    const MetricsSummary& m = summaries[i];
    const std::string label = csv_field(labels[i]);
    const json& cfg = logs[i].log.header().at("config");
    auto row = [&](const std::string& metric, double v) { summary += label + "," + metric + "," + num(v) + "\n"; };
    row("episodes", static_cast<double>(m.episodes));
    row("aborted", static_cast<double>(m.aborted));
    if (m.success) {
      row("success_mean", m.success->mean);
      row("success_within_trial_variance", m.success->within_trial_variance);
      row("success_across_trial_variance", m.success->across_trial_variance);
      row("success_total_variance", m.success->total_variance);
    }
    row("final_inventory_mean", m.final_inventory_mean);
    if (m.copy_time) {
      row("copy_time_mean", m.copy_time->mean());
      row("copy_time_samples", static_cast<double>(m.copy_time->samples.size()));
      row("copy_time_censored", static_cast<double>(m.copy_time->censored));
    }
    row("repeated_attempts_per_episode", m.repetition.repeated_attempts);
    row("repeat_reprompts_per_episode", m.repetition.repeat_reprompts);
    row("format_reprompts_per_episode", m.repetition.format_reprompts);
    row("reprompts_per_decision", m.repetition.reprompts_per_decision);
    row("fallback_rate", m.repetition.fallback_rate);

    if (m.success) {
      any_success = true;
      const json& task = cfg.at("task");
      const json& group = cfg.at("group");
      success += label + "," + cfg.at("agent").at("kind").get<std::string>() + "," +
                 std::to_string(group.at("size").get<int>()) + "," +
                 group.at("topology").at("kind").get<std::string>() + "," +
                 (group.at("copy_mechanism").get<bool>() ? "on" : "off") + "," +
                 std::to_string(task.at("depth").get<int>()) + "," +
                 std::to_string(task.at("distractors").get<int>()) + "," + std::to_string(m.success->episodes) +
                 "," + num(m.success->mean) + "," + num(m.success->within_trial_variance) + "," +
                 num(m.success->across_trial_variance) + "," + num(m.success->total_variance) + "\n";
      success_bars.emplace_back(labels[i], m.success->mean);
    }
    if (m.copy_time) {
      any_copy = true;
      std::map<int, std::size_t> hist;
      for (int v : m.copy_time->samples) ++hist[v];
      for (const auto& [v, c] : hist) copy_hist += label + "," + std::to_string(v) + "," + std::to_string(c) + "\n";
      copy_hist += label + ",censored," + std::to_string(m.copy_time->censored) + "\n";
      copy_bars.emplace_back(labels[i], m.copy_time->mean());
    }
  }

  report.files["summary.csv"] = summary;
  std::vector<std::vector<double>> curves;
  std::vector<std::pair<std::string, std::vector<double>>> curve_series;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    curves.push_back(summaries[i].inventory_curve);
    curve_series.emplace_back(labels[i], summaries[i].inventory_curve);
  }
  report.files["inventory_curve.csv"] = column_series_csv(labels, curves);
  report.files["inventory_curve.svg"] = line_chart("Inventory size", "step", "mean inventory size", curve_series);

  if (any_success) {
    report.files["success.csv"] = success;
    report.files["success.svg"] = bar_chart("Success rate", "log", "fraction of tasks solved", success_bars);
  }
  if (any_copy) {
    report.files["copy_time.csv"] = copy_hist;
    report.files["copy_time.svg"] = bar_chart("Mean copy time", "log", "steps", copy_bars);
    std::vector<std::string> copy_labels;
    std::vector<std::vector<double>> outstanding;
    std::vector<std::pair<std::string, std::vector<double>>> outstanding_series;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      if (!summaries[i].copy_time) continue;
      copy_labels.push_back(labels[i]);
      outstanding.push_back(summaries[i].copy_time->outstanding);
      outstanding_series.emplace_back(labels[i], summaries[i].copy_time->outstanding);
    }
    report.files["outstanding_copyable.csv"] = column_series_csv(copy_labels, outstanding);
    report.files["outstanding_copyable.svg"] =
        line_chart("Copyable items not yet held", "step", "items per agent", outstanding_series);
  }

  if (logs.size() > 1) {
    std::string s = "trial";
    for (const auto& l : labels) s += "," + csv_field(l);
    for (std::size_t i = 1; i < labels.size(); ++i) s += "," + csv_field(labels[i] + " - " + labels[0]);
    s += "\n";
    std::size_t trials = 0;
    for (const auto& m : summaries) trials = std::max(trials, m.final_inventory_by_trial.size());
    std::vector<double> diff_sum(labels.size(), 0.0);
    std::vector<std::size_t> diff_n(labels.size(), 0);
    for (std::size_t t = 0; t < trials; ++t) {
      s += std::to_string(t);
      for (const auto& m : summaries) {
        s += "," + (t < m.final_inventory_by_trial.size() ? num(m.final_inventory_by_trial[t]) : std::string());
      }
      for (std::size_t i = 1; i < summaries.size(); ++i) {
        const auto& a = summaries[i].final_inventory_by_trial;
        const auto& b = summaries[0].final_inventory_by_trial;
        if (t < a.size() && t < b.size()) {
          s += "," + num(a[t] - b[t]);
          diff_sum[i] += a[t] - b[t];
          ++diff_n[i];
        } else {
          s += ",";
        }
      }
      s += "\n";
    }
    s += "mean";
    for (const auto& m : summaries) s += "," + num(m.final_inventory_mean);
    for (std::size_t i = 1; i < summaries.size(); ++i) {
      s += "," + (diff_n[i] > 0 ? num(diff_sum[i] / static_cast<double>(diff_n[i])) : std::string());
    }
    s += "\n";
    report.files["connectivity.csv"] = s;
  }
  return report;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : report.files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("failed to write " + (dir / name).string());
  }
}

}  // namespace alchemy::xrun
