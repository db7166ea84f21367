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

#include "agewatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace agewatch::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v, const char* format) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string fmt_slope(double v) { return fmt(v, "%.6f"); }
std::string fmt_ms(double v) { return fmt(v, "%.3f"); }
std::string fmt_hours(double v) { return fmt(v, "%.3f"); }
std::string fmt_pct(double v) { return fmt(v, "%.1f"); }

ExperimentSummary summarize_one(const std::string& id, const ExperimentSpec& exp,
                                const std::map<std::string, ActivityOutcome>& baseline,
                                const std::map<std::string, ActivityOutcome>& treated) {
  ExperimentSummary summary;
  summary.id = id;
  summary.experiment = exp;
  summary.rows = compute_gains(baseline, treated);
  std::vector<double> lt_values, ttaf_values;
  std::vector<bool> lt_included, ttaf_included;
  for (const GainRow& row : summary.rows) {
    lt_values.push_back(row.gain_lt_pct);
    lt_included.push_back(row.lt_in_mean);
    ttaf_values.push_back(row.gain_ttaf_pct);
    ttaf_included.push_back(row.ttaf_in_mean);
  }
  summary.mean_gain_lt_pct = mean_with_exclusions(lt_values, lt_included);
  summary.mean_gain_ttaf_pct = mean_with_exclusions(ttaf_values, ttaf_included);
  return summary;
}

}  // namespace

double lt_increase(double slope_ms_per_s, double horizon_s) { return slope_ms_per_s * horizon_s; }

double ttaf_hours(double slope_ms_per_s, double threshold_ms) {
  if (!(slope_ms_per_s > 0.0)) return kInf;
  return threshold_ms / slope_ms_per_s / 3600.0;
}

double gain_lt_pct(double lt_increase_base, double lt_increase_treated) {
  return (lt_increase_base - lt_increase_treated) / lt_increase_base * 100.0;
}

double gain_ttaf_pct(double ttaf_base_h, double ttaf_treated_h) {
  if (std::isinf(ttaf_treated_h)) return kInf;
  return (ttaf_treated_h - ttaf_base_h) / ttaf_base_h * 100.0;
}

std::map<std::string, ActivityOutcome> trace_outcomes(const SimTrace& trace, double horizon_s,
                                                      double threshold_ms) {
  constexpr std::string_view kPrefix = "launch_time:";
  std::map<std::string, ActivityOutcome> outcomes;
  for (const IndicatorSeries& series : trace.indicators) {
    if (series.name.compare(0, kPrefix.size(), kPrefix) != 0) continue;
    const std::string activity = series.name.substr(kPrefix.size());
    ActivityOutcome outcome;
    outcome.slope = sen_slope(series.samples);
    outcome.lt_increase = lt_increase(outcome.slope, horizon_s);
    outcome.ttaf_h = ttaf_hours(outcome.slope, threshold_ms);
    outcomes.emplace(activity, outcome);
  }
  return outcomes;
}

std::vector<GainRow> compute_gains(const std::map<std::string, ActivityOutcome>& baseline,
                                   const std::map<std::string, ActivityOutcome>& treated) {
  std::vector<GainRow> rows;
  for (const auto& [activity, base] : baseline) {
    const auto it = treated.find(activity);
    if (it == treated.end()) {
      throw MissingActivity("activity '" + activity + "' missing from the treated trace");
    }
    GainRow row;
    row.activity = activity;
    row.baseline = base;
    row.treated = it->second;
    row.gain_lt_pct = gain_lt_pct(base.lt_increase, row.treated.lt_increase);
    row.gain_ttaf_pct = gain_ttaf_pct(base.ttaf_h, row.treated.ttaf_h);
    // A treated slope of exactly zero means no measurable trend was left;
    // the 100% launch-time gain is degenerate and stays out of the mean.
    row.lt_in_mean = std::isfinite(row.gain_lt_pct) && row.treated.slope != 0.0;
    row.ttaf_in_mean = std::isfinite(row.gain_ttaf_pct);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GainRow> compute_gains(const SimTrace& baseline, const SimTrace& treated,
                                   double horizon_s, double threshold_ms) {
  return compute_gains(trace_outcomes(baseline, horizon_s, threshold_ms),
                       trace_outcomes(treated, horizon_s, threshold_ms));
}

double mean_with_exclusions(const std::vector<double>& values,
                            const std::vector<bool>& included) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i < included.size() && !included[i]) continue;
    sum += values[i];
    ++count;
  }
  // Every row excluded means every treated trend vanished: the improvement
  // is unbounded.
  if (count == 0) return kInf;
  return sum / static_cast<double>(count);
}

ComparisonTable summarize(std::span<const SimTrace> traces, double horizon_s,
                          double threshold_ms) {
  const SimTrace* baseline = nullptr;
  for (const SimTrace& trace : traces) {
    if (trace.experiment.rejuvenated_services.empty() && !trace.experiment.reboot_period_s) {
      baseline = &trace;
      break;
    }
  }
  if (!baseline) {
    throw MissingBaseline("summarize: no experiment without rejuvenation to compare against");
  }
  ComparisonTable table;
  table.baseline_id = baseline->experiment_id;
  table.horizon_s = horizon_s;
  table.threshold_ms = threshold_ms;
  const auto base_outcomes = trace_outcomes(*baseline, horizon_s, threshold_ms);
  for (const SimTrace& trace : traces) {
    if (&trace == baseline) continue;
    table.experiments.push_back(summarize_one(trace.experiment_id, trace.experiment,
                                              base_outcomes,
                                              trace_outcomes(trace, horizon_s, threshold_ms)));
  }
  return table;
}

ComparisonTable summarize_outcomes(std::span<const RunOutcomes> runs, double horizon_s,
                                   double threshold_ms) {
  const RunOutcomes* baseline = nullptr;
  for (const RunOutcomes& run : runs) {
    if (run.experiment.rejuvenated_services.empty() && !run.experiment.reboot_period_s) {
      baseline = &run;
      break;
    }
  }
  if (!baseline) {
    throw MissingBaseline("summarize: no experiment without rejuvenation to compare against");
  }
  ComparisonTable table;
  table.baseline_id = baseline->id;
  table.horizon_s = horizon_s;
  table.threshold_ms = threshold_ms;
  for (const RunOutcomes& run : runs) {
    if (&run == baseline) continue;
    table.experiments.push_back(
        summarize_one(run.id, run.experiment, baseline->activities, run.activities));
  }
  return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "experiment,activity,base_slope,base_lt_increase,base_ttaf_h,"
         "slope,lt_increase,ttaf_h,gain_lt_pct,gain_ttaf_pct\n";
  for (const ExperimentSummary& exp : table.experiments) {
    for (const GainRow& row : exp.rows) {
      out << exp.id << ',' << row.activity << ',' << fmt_slope(row.baseline.slope) << ','
          << fmt_ms(row.baseline.lt_increase) << ',' << fmt_hours(row.baseline.ttaf_h) << ','
          << fmt_slope(row.treated.slope) << ',' << fmt_ms(row.treated.lt_increase) << ','
          << fmt_hours(row.treated.ttaf_h) << ',' << fmt_pct(row.gain_lt_pct) << ','
          << fmt_pct(row.gain_ttaf_pct) << '\n';
    }
    out << exp.id << ",AVERAGE,,,,,,," << fmt_pct(exp.mean_gain_lt_pct) << ','
        << fmt_pct(exp.mean_gain_ttaf_pct) << '\n';
  }
}

void write_comparison_markdown(std::ostream& out, const ComparisonTable& table) {
  out << "# Comparison against " << table.baseline_id << "\n\n";
  out << "Horizon: " << fmt_hours(table.horizon_s / 3600.0) << " h, failure threshold: "
      << fmt_ms(table.threshold_ms) << " ms launch-time increase over baseline.\n";
  for (const ExperimentSummary& exp : table.experiments) {
    out << "\n## " << exp.id << "\n\n";
    out << "| Activity | Slope [ms/s] | LT increase [ms] | TTAF [h] | Slope^r | "
           "LT increase^r | TTAF^r | Gain_LT | Gain_TTAF |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    for (const GainRow& row : exp.rows) {
      out << "| " << row.activity << " | " << fmt_slope(row.baseline.slope) << " | "
          << fmt_ms(row.baseline.lt_increase) << " | " << fmt_hours(row.baseline.ttaf_h)
          << " | " << fmt_slope(row.treated.slope) << " | " << fmt_ms(row.treated.lt_increase)
          << " | " << fmt_hours(row.treated.ttaf_h) << " | " << fmt_pct(row.gain_lt_pct)
          << "% | " << fmt_pct(row.gain_ttaf_pct) << "% |\n";
    }
    out << "| **Average** | | | | | | | **" << fmt_pct(exp.mean_gain_lt_pct) << "%** | **"
        << fmt_pct(exp.mean_gain_ttaf_pct) << "%** |\n";
  }
}

}  // namespace agewatch::sim
