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

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agewatch/rejuvsim.hpp"

namespace agewatch::sim {

// --- Gain arithmetic over launch-time degradation -------------------------
//
// With slope s (ms/s) over a horizon H, the launch time increase is s*H.
// An aging failure is an increase of threshold T (200 ms by default), so
// TTAF = T/s. Comparing a treated run (r) against the baseline:
//   Gain_LT%   = (LT - LT^r) / LT * 100
//   Gain_TTAF% = (TTAF^r - TTAF) / TTAF * 100
// A non-positive treated slope gives an infinite TTAF^r; such gains are
// reported as +inf and excluded from averages.

double lt_increase(double slope_ms_per_s, double horizon_s);

// Hours; +inf when the slope is not positive.
double ttaf_hours(double slope_ms_per_s, double threshold_ms);

double gain_lt_pct(double lt_increase_base, double lt_increase_treated);

// +inf when ttaf_treated_h is infinite.
double gain_ttaf_pct(double ttaf_base_h, double ttaf_treated_h);

// Slope / LT increase / TTAF of one activity in one trace.
struct ActivityOutcome {
  double slope = 0.0;        // ms/s, Sen's estimator over the full LT series
  double lt_increase = 0.0;  // ms over the horizon
  double ttaf_h = 0.0;       // hours, +inf for non-positive slopes
};

// Sen slopes of every launch_time:<activity> series in the trace.
// Throws TooFewSamples when a series has fewer than 2 samples.
std::map<std::string, ActivityOutcome> trace_outcomes(const SimTrace& trace, double horizon_s,
                                                      double threshold_ms);

struct GainRow {
  std::string activity;
  ActivityOutcome baseline;
  ActivityOutcome treated;
  double gain_lt_pct = 0.0;    // may be +inf only via degenerate baselines
  double gain_ttaf_pct = 0.0;  // +inf when the treated trend vanished
  // Excluded from the mean: TTAF gains that are infinite, and LT gains of
  // rows whose treated slope is exactly zero (no trend left to compare).
  bool lt_in_mean = true;
  bool ttaf_in_mean = true;
};

// Per-activity gains of a treated trace against the baseline trace.
// Throws MissingActivity when the treated trace lacks a baseline activity.
std::vector<GainRow> compute_gains(const SimTrace& baseline, const SimTrace& treated,
                                   double horizon_s, double threshold_ms);

std::vector<GainRow> compute_gains(const std::map<std::string, ActivityOutcome>& baseline,
                                   const std::map<std::string, ActivityOutcome>& treated);

struct ExperimentSummary {
  std::string id;
  ExperimentSpec experiment;
  std::vector<GainRow> rows;
  // Means over the included rows; +inf when every row was excluded.
  double mean_gain_lt_pct = 0.0;
  double mean_gain_ttaf_pct = 0.0;
};

struct ComparisonTable {
  std::string baseline_id;
  double horizon_s = 0.0;
  double threshold_ms = 0.0;
  std::vector<ExperimentSummary> experiments;  // treated experiments only
};

// Builds the comparison across runs. The baseline is the experiment with no
// rejuvenated services and no reboot period; throws MissingBaseline when
// absent.
ComparisonTable summarize(std::span<const SimTrace> traces, double horizon_s,
                          double threshold_ms);

// Same, over per-activity outcomes loaded from run summaries.
struct RunOutcomes {
  std::string id;
  ExperimentSpec experiment;
  std::map<std::string, ActivityOutcome> activities;
};
ComparisonTable summarize_outcomes(std::span<const RunOutcomes> runs, double horizon_s,
                                   double threshold_ms);

double mean_with_exclusions(const std::vector<double>& values,
                            const std::vector<bool>& included);

void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
void write_comparison_markdown(std::ostream& out, const ComparisonTable& table);

}  // namespace agewatch::sim
