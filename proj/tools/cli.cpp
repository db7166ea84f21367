/*
 * Copyright (C) 2026 The AgeWatch Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "agewatch/candidacy.hpp"
#include "agewatch/detector.hpp"
#include "agewatch/heap_model.hpp"
#include "agewatch/metrics.hpp"
#include "agewatch/rejuvsim.hpp"
#include "agewatch/trend_stats.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace agewatch::cli {

namespace {

struct AppConfig {
  CandidacyConfig candidacy;
  DetectorConfig detector = DetectorConfig::defaults();
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

AppConfig load_app_config(const std::string& path) {
  AppConfig cfg;
  if (path.empty()) return cfg;
  json doc;
  try {
    doc = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (doc.contains("candidacy")) {
    cfg.candidacy = parse_candidacy_config(doc["candidacy"].dump(), path);
  }
  if (doc.contains("detector")) {
    cfg.detector = parse_detector_config(doc["detector"].dump(), path);
  }
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path.string());
  return out;
}

double now_or_fixed(const std::optional<double>& fixed_clock) {
  if (fixed_clock) return *fixed_clock;
  return static_cast<double>(std::time(nullptr));
}

// --- analyze ---------------------------------------------------------------

int cmd_analyze(const std::string& snapshots_dir, const std::string& config_path,
                const std::string& out_dir, const std::optional<double>& fixed_clock) {
  const AppConfig cfg = load_app_config(config_path);

  std::vector<fs::path> paths;
  if (!fs::is_directory(snapshots_dir)) {
    throw ParseError("--snapshots: not a directory: " + snapshots_dir);
  }
  for (const auto& entry : fs::directory_iterator(snapshots_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    throw ParseError("no .json snapshot files in " + snapshots_dir);
  }

  const SnapshotSeries series = load_series(paths);
  AnalysisReport report = build_report(series, cfg.candidacy);
  report.list.generated_at_s = now_or_fixed(fixed_clock);

  fs::create_directories(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "report.csv");
    write_report_csv(out, report);
  }
  {
    auto out = open_out(fs::path(out_dir) / "report.json");
    write_report_json(out, report);
  }
  {
    auto out = open_out(fs::path(out_dir) / "rejuvenation_list.json");
    write_rejuvenation_list(out, report.list);
  }

  std::cout << "analyzed " << series.size() << " snapshots of '" << report.process_name
            << "': " << report.rows.size() << " containers tracked, " << report.transient.size()
            << " transient, " << report.list.containers.size() << " to rejuvenate\n";
  std::cout << "wrote " << (fs::path(out_dir) / "report.csv").string() << ", report.json, "
            << "rejuvenation_list.json\n";
  return 0;
}

// --- detect ----------------------------------------------------------------

int cmd_detect(const std::string& indicators_path, const std::string& config_path,
               const std::string& out_dir) {
  const AppConfig cfg = load_app_config(config_path);
  const auto series = load_indicator_csv(indicators_path);

  fs::create_directories(out_dir);
  auto events = open_out(fs::path(out_dir) / "events.jsonl");

  AgingDetector detector(cfg.detector);
  detector.set_event_sink([&](const std::string& line) { events << line << '\n'; });

  struct Pending {
    double t;
    std::size_t series_index;
    std::size_t sample_index;
  };
  std::vector<Pending> order;
  for (std::size_t si = 0; si < series.size(); ++si) {
    for (std::size_t k = 0; k < series[si].samples.size(); ++k) {
      order.push_back(Pending{series[si].samples[k].timestamp_s, si, k});
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const Pending& a, const Pending& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.series_index < b.series_index;
  });

  std::vector<AgingAlarm> alarms;
  for (const Pending& p : order) {
    const auto& sample = series[p.series_index].samples[p.sample_index];
    if (auto alarm = detector.ingest(series[p.series_index].name, sample.timestamp_s,
                                     sample.value)) {
      alarms.push_back(*alarm);
    }
  }

  const auto alerts = detector.active_alerts();
  std::cout << "ingested " << order.size() << " samples over " << series.size()
            << " indicators\n";
  if (alarms.empty() && alerts.empty()) {
    std::cout << "no aging detected\n";
  } else {
    for (const AgingAlert& alert : alerts) {
      std::cout << "alert: " << alert.indicator << " slope=" << alert.slope
                << " p=" << alert.p_value << " persisted=" << alert.persistence_s << "s\n";
    }
    for (const AgingAlarm& alarm : alarms) {
      std::cout << "alarm: confidence=" << to_string(alarm.confidence) << " raised_at="
                << alarm.raised_at << "s";
      if (alarm.ttaf_s) {
        std::cout << " ttaf=" << *alarm.ttaf_s / 3600.0 << "h";
      } else {
        std::cout << " ttaf=none";
      }
      std::cout << '\n';
    }
  }
  std::cout << "wrote " << (fs::path(out_dir) / "events.jsonl").string() << '\n';
  return 0;
}

// --- simulate ---------------------------------------------------------------

json outcome_to_json(const sim::ActivityOutcome& o) {
  json j;
  j["slope_ms_per_s"] = o.slope;
  j["lt_increase_ms"] = o.lt_increase;
  // hours; infinite TTAF is recomputable from the slope, store null
  if (std::isfinite(o.ttaf_h)) {
    j["ttaf_h"] = o.ttaf_h;
  } else {
    j["ttaf_h"] = nullptr;
  }
  return j;
}

void write_trace_outputs(const fs::path& dir, const sim::SimTrace& trace,
                         const sim::SimSpec& spec, const std::optional<double>& fixed_clock) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "indicators.csv");
    IndicatorCsvWriter writer(out);
    for (const IndicatorSeries& series : trace.indicators) {
      for (const IndicatorSample& sample : series.samples) {
        writer.row(sample.timestamp_s, series.name, sample.value);
      }
    }
  }
  {
    auto out = open_out(dir / "events.jsonl");
    for (const std::string& line : trace.events) out << line << '\n';
  }
  if (!trace.snapshots.empty()) {
    fs::create_directories(dir / "snapshots");
    for (const HeapSnapshot& snap : trace.snapshots) {
      save_snapshot(snap, dir / "snapshots" / (snap.snapshot_id + ".json"));
    }
  }
  {
    const double horizon = spec.workload.duration_s;
    const double threshold = spec.detector.failure_threshold_increase;
    const auto outcomes = sim::trace_outcomes(trace, horizon, threshold);
    json summary;
    json exp;
    exp["id"] = trace.experiment.id;
    exp["rejuvenated_services"] = trace.experiment.rejuvenated_services;
    exp["policy"] = std::string(to_string(trace.experiment.policy));
    if (trace.experiment.reboot_period_s) {
      exp["reboot_period_s"] = *trace.experiment.reboot_period_s;
    }
    summary["experiment"] = std::move(exp);
    summary["horizon_s"] = horizon;
    summary["threshold_ms"] = threshold;
    json activities;
    for (const auto& [activity, outcome] : outcomes) {
      activities[activity] = outcome_to_json(outcome);
    }
    summary["activities"] = std::move(activities);
    const auto& ledger = trace.request_ledger;
    if (!ledger.empty()) {
      summary["requests"] = json{{"arrived", ledger.back().arrived},
                                 {"processed", ledger.back().processed},
                                 {"queued_end", ledger.back().queued}};
    }
    summary["rejuvenation_times"] = trace.rejuvenation_times;
    summary["reboot_times"] = trace.reboot_times;
    summary["generated_at_s"] = now_or_fixed(fixed_clock);
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  {
    // launch-time series plot
    std::vector<PlotSeries> plot;
    for (const IndicatorSeries& series : trace.indicators) {
      if (series.name.rfind("launch_time:", 0) != 0) continue;
      PlotSeries p;
      p.label = series.name.substr(std::string("launch_time:").size());
      for (const IndicatorSample& sample : series.samples) {
        p.points.emplace_back(sample.timestamp_s, sample.value);
      }
      plot.push_back(std::move(p));
    }
    auto out = open_out(dir / "launch_times.svg");
    write_line_chart(out, "Launch time over model time (" + trace.experiment.id + ")",
                     "model time [s]", "launch time [ms]", plot);
  }
}

void write_comparison_outputs(const fs::path& out_dir, const sim::ComparisonTable& table) {
  {
    auto out = open_out(out_dir / "comparison.csv");
    write_comparison_csv(out, table);
  }
  {
    auto out = open_out(out_dir / "comparison.md");
    write_comparison_markdown(out, table);
  }
  {
    std::vector<std::pair<std::string, double>> lt_bars, ttaf_bars;
    for (const sim::ExperimentSummary& exp : table.experiments) {
      lt_bars.emplace_back(exp.id, exp.mean_gain_lt_pct);
      ttaf_bars.emplace_back(exp.id, exp.mean_gain_ttaf_pct);
    }
    auto lt_out = open_out(out_dir / "gain_lt.svg");
    write_bar_chart(lt_out, "Mean launch-time gain vs " + table.baseline_id, "Gain_LT [%]",
                    lt_bars);
    auto ttaf_out = open_out(out_dir / "gain_ttaf.svg");
    write_bar_chart(ttaf_out, "Mean time-to-aging-failure gain vs " + table.baseline_id,
                    "Gain_TTAF [%]", ttaf_bars);
  }
}

int cmd_simulate(const std::string& spec_path, const std::optional<std::uint64_t>& seed,
                 const std::string& out_dir, const std::optional<double>& fixed_clock) {
  sim::SimSpec spec = sim::load_sim_spec(spec_path);
  if (seed) spec.seed = *seed;

  fs::create_directories(out_dir);
  std::vector<sim::SimTrace> traces;
  for (const sim::ExperimentSpec& exp : spec.experiments) {
    std::cout << "running " << exp.id << " (seed " << spec.seed << ") ..." << std::flush;
    traces.push_back(sim::run(spec, exp, spec.seed));
    const sim::SimTrace& trace = traces.back();
    std::cout << " done: " << trace.rejuvenation_times.size() << " rejuvenations, "
              << trace.reboot_times.size() << " reboots\n";
    write_trace_outputs(fs::path(out_dir) / exp.id, trace, spec, fixed_clock);
  }

  const double horizon = spec.workload.duration_s;
  const double threshold = spec.detector.failure_threshold_increase;
  const auto table = sim::summarize(traces, horizon, threshold);
  write_comparison_outputs(out_dir, table);

  for (const sim::ExperimentSummary& exp : table.experiments) {
    std::cout << exp.id << ": mean Gain_LT = " << exp.mean_gain_lt_pct
              << "%, mean Gain_TTAF = " << exp.mean_gain_ttaf_pct << "%\n";
  }
  std::cout << "wrote per-run outputs and comparison files under " << out_dir << '\n';
  return 0;
}

// --- report ----------------------------------------------------------------

int cmd_report(const std::string& runs_dir, const std::string& out_dir) {
  if (!fs::is_directory(runs_dir)) {
    throw ParseError("--runs: not a directory: " + runs_dir);
  }
  std::vector<fs::path> summaries;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) {
      summaries.push_back(entry.path() / "summary.json");
    }
  }
  std::sort(summaries.begin(), summaries.end());
  if (summaries.empty()) {
    throw ParseError("no <run>/summary.json files under " + runs_dir);
  }

  double horizon = 21600.0;
  double threshold = 200.0;
  std::vector<sim::RunOutcomes> runs;
  for (const fs::path& path : summaries) {
    json doc;
    try {
      doc = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    sim::RunOutcomes run;
    try {
      run.id = doc.at("experiment").at("id").get<std::string>();
      run.experiment.id = run.id;
      for (const json& s : doc.at("experiment").value("rejuvenated_services", json::array())) {
        run.experiment.rejuvenated_services.insert(s.get<std::string>());
      }
      if (doc.at("experiment").contains("reboot_period_s")) {
        run.experiment.reboot_period_s = doc.at("experiment")["reboot_period_s"].get<double>();
      }
      horizon = doc.value("horizon_s", horizon);
      threshold = doc.value("threshold_ms", threshold);
      for (const auto& [activity, jo] : doc.at("activities").items()) {
        sim::ActivityOutcome outcome;
        outcome.slope = jo.at("slope_ms_per_s").get<double>();
        outcome.lt_increase = jo.at("lt_increase_ms").get<double>();
        outcome.ttaf_h = sim::ttaf_hours(outcome.slope, threshold);
        run.activities.emplace(activity, outcome);
      }
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    runs.push_back(std::move(run));
  }

  const auto table = sim::summarize_outcomes(runs, horizon, threshold);
  fs::create_directories(out_dir);
  write_comparison_outputs(out_dir, table);
  for (const sim::ExperimentSummary& exp : table.experiments) {
    std::cout << exp.id << ": mean Gain_LT = " << exp.mean_gain_lt_pct
              << "%, mean Gain_TTAF = " << exp.mean_gain_ttaf_pct << "%\n";
  }
  std::cout << "wrote comparison files under " << out_dir << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"agewatch: container-bloat aging analysis, detection and rejuvenation simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> fixed_clock;

  auto* analyze = app.add_subcommand("analyze", "Screen heap snapshots for rejuvenable containers");
  std::string snapshots_dir, analyze_out;
  analyze->add_option("--snapshots", snapshots_dir, "Directory of snapshot .json files")
      ->required();
  analyze->add_option("--config", config_path, "JSON config file")->envname("AGEWATCH_CONFIG");
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->add_option("--fixed-clock", fixed_clock,
                      "Freeze generated_at timestamps (for reproducible outputs)");

  auto* detect = app.add_subcommand("detect", "Run aging detection over an indicator CSV");
  std::string indicators_path, detect_out;
  detect->add_option("--indicators", indicators_path, "Indicator CSV file")->required();
  detect->add_option("--config", config_path, "JSON config file")->envname("AGEWATCH_CONFIG");
  detect->add_option("--out", detect_out, "Output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run rejuvenation experiments");
  std::string spec_path, simulate_out;
  std::optional<std::uint64_t> seed;
  simulate->add_option("--spec", spec_path, "Experiment spec JSON file")->required();
  simulate->add_option("--seed", seed, "Override the spec RNG seed");
  simulate->add_option("--out", simulate_out, "Output directory")->required();
  simulate->add_option("--fixed-clock", fixed_clock,
                       "Freeze generated_at timestamps (for reproducible outputs)");

  auto* report = app.add_subcommand("report", "Re-tabulate gains from existing run outputs");
  std::string runs_dir, report_out;
  report->add_option("--runs", runs_dir, "Directory containing per-run output directories")
      ->required();
  report->add_option("--out", report_out, "Output directory")->required();

  std::vector<const char*> argv;
  argv.push_back("agewatch");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(analyze)) {
      return cmd_analyze(snapshots_dir, config_path, analyze_out, fixed_clock);
    }
    if (app.got_subcommand(detect)) {
      return cmd_detect(indicators_path, config_path, detect_out);
    }
    if (app.got_subcommand(simulate)) {
      return cmd_simulate(spec_path, seed, simulate_out, fixed_clock);
    }
    if (app.got_subcommand(report)) {
      return cmd_report(runs_dir, report_out);
    }
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace agewatch::cli
