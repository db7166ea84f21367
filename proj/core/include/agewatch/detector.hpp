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

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agewatch/trend_stats.hpp"

namespace agewatch {

// A persistent degradation trend on one indicator.
struct AgingAlert {
  std::string indicator;
  double first_seen = 0.0;      // when the degradation direction first held
  double persistence_s = 0.0;   // how long it has held, >= min_persistence_s
  double slope = 0.0;           // units/s over the evaluation window
  double p_value = 1.0;
};

enum class Confidence { low, medium, high, very_high };

std::string_view to_string(Confidence c);
Confidence confidence_from_string(std::string_view s);  // throws ConfigError

// Joint condition over indicator alerts. A required name of the form
// "prefix:any" matches any indicator named "prefix:<something>"; other names
// match exactly.
struct AlarmRule {
  std::vector<std::string> required_indicators;
  Confidence confidence = Confidence::low;
};

// Fused multi-indicator event handed to the scheduler.
struct AgingAlarm {
  Confidence confidence = Confidence::low;
  std::vector<AgingAlert> contributing_alerts;
  std::optional<double> ttaf_s;  // unset when no positive slope toward failure
  double raised_at = 0.0;
};

enum class PolicyMode { warn_only, immediate, postpone };

std::string_view to_string(PolicyMode m);
PolicyMode policy_from_string(std::string_view s);  // throws ConfigError

enum class LoadBand { low, medium, high };

std::string_view to_string(LoadBand b);

struct LoadThresholds {
  double low_max_cpu = 0.30;   // cpu utilization below this is low load
  double high_min_cpu = 0.70;  // above this is high load
};

LoadBand classify_load(double cpu_utilization, const LoadThresholds& thresholds);

struct SchedulerPolicy {
  PolicyMode mode = PolicyMode::warn_only;
  double safety_margin_s = 600.0;          // postpone: fire this early
  LoadBand load_gate = LoadBand::low;      // postpone: fire when load <= gate
};

// Whether larger or smaller values of an indicator mean degradation.
enum class Degrades { up, down };

struct DetectorConfig {
  std::size_t window = 30;
  double alpha = 0.05;               // 95% trend confidence
  double min_persistence_s = 600.0;  // trend must hold this long to alert
  double failure_threshold_increase = 200.0;  // ms over baseline = aging failure
  std::vector<AlarmRule> rules;      // kept sorted by confidence descending
  // Keyed by indicator name or by the prefix before ':'. Unlisted
  // indicators degrade upward.
  std::map<std::string, Degrades> degrades_when;
  // Indicator prefix whose alert supplies the alarm's TTAF estimate; when no
  // such alert contributes, the smallest positive estimate is used.
  std::string ttaf_indicator = "launch_time";
  LoadThresholds load;

  // The single documented joint rule: launch time plus system_server
  // resident-size growth means aging with very high confidence.
  static DetectorConfig defaults();

  void validate() const;  // throws ConfigError
};

// Reads a detector configuration from a JSON document; unknown keys are
// ignored and missing keys keep their defaults. Throws ConfigError.
DetectorConfig parse_detector_config(std::string_view text,
                                     std::string_view origin = "<memory>");

// Batch form of detection: replays every series in time order through a
// fresh AgingDetector and returns the alerts active at the end. An
// indicator with fewer than `window` samples simply yields no alert.
std::vector<AgingAlert> detect(std::span<const IndicatorSeries> series_set, std::size_t window,
                               double alpha, double min_persistence_s);

// Seconds until the indicator crosses its failure threshold:
// (failure_threshold - current_level) / slope for positive slopes, clamped
// at 0; no estimate otherwise. For thresholds expressed as an increase over
// baseline, current_level is the accumulated increase (0 right after boot
// or rejuvenation).
std::optional<double> estimate_ttaf(double current_level, double slope,
                                    double failure_threshold);

// Returns the alarm of the highest-confidence rule whose required indicators
// are all covered by the given alerts; rules must be ordered by confidence
// descending. The returned alarm carries confidence, contributing alerts and
// raised_at; the caller fills ttaf_s.
std::optional<AgingAlarm> fuse(std::span<const AgingAlert> alerts,
                               std::span<const AlarmRule> rules, double now);

struct Decision {
  enum class Kind { warn, rejuvenate_now, rejuvenate_at };
  Kind kind = Kind::warn;
  double at = 0.0;  // rejuvenate_at only; +inf = wait for a low-load window
};

// Policy application at alarm time. postpone targets
// raised_at + ttaf - safety_margin (never later than raised_at + ttaf,
// never before now) and fires early when load is already within the gate.
Decision schedule(const AgingAlarm& alarm, const SchedulerPolicy& policy, LoadBand load,
                  double now);

// Holds the pending postponed action between the alarm and the moment it is
// due (or load drops into the gate, whichever comes first).
class RejuvenationScheduler {
 public:
  explicit RejuvenationScheduler(SchedulerPolicy policy) : policy_(policy) {}

  Decision on_alarm(const AgingAlarm& alarm, LoadBand load, double now);

  // True when a pending postponed rejuvenation should fire now (load within
  // the gate, or the due time reached).
  bool should_fire(LoadBand load, double now) const;

  std::optional<double> pending_due() const { return pending_due_; }

  void mark_fired();

  const SchedulerPolicy& policy() const { return policy_; }

 private:
  SchedulerPolicy policy_;
  std::optional<double> pending_due_;
};

// Receives one serialized JSON object per event (alerts, alarms, resets).
using EventSink = std::function<void(const std::string& json_line)>;

// Streaming aging detector. Feed indicator samples in time order; alerts are
// raised per indicator once a degradation trend persists, and alarms are
// fused from alerts via the rule set. After boot or rejuvenation, reset()
// re-baselines: pre-reset samples never contribute to later alarms.
//
// Sample ingestion and alarm evaluation are serialized internally; a
// returned alarm is handed to the caller, and triggering rejuvenation must
// happen outside the ingest call so that it never blocks ingestion.
class AgingDetector {
 public:
  explicit AgingDetector(DetectorConfig cfg);

  // Returns a newly raised alarm, if this sample completed one.
  std::optional<AgingAlarm> ingest(std::string_view indicator, double t, double value);

  // Drop all window, baseline, persistence and alarm state.
  void reset(double t);

  std::vector<AgingAlert> active_alerts() const;

  // Samples ingested for an indicator since the last reset (0 if unknown).
  std::uint64_t samples_since_reset(std::string_view indicator) const;

  std::optional<double> baseline(std::string_view indicator) const;

  void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

  const DetectorConfig& config() const { return cfg_; }

 private:
  struct IndicatorState {
    std::deque<IndicatorSample> window;
    std::vector<double> baseline_buf;
    std::optional<double> baseline;        // median of the first window after reset
    std::optional<double> degrade_since;   // start of the current degradation run
    std::optional<AgingAlert> alert;
    double last_value = 0.0;
    std::uint64_t samples_since_reset = 0;
  };

  Degrades degrades_for(const std::string& indicator) const;
  void emit(double t, const std::string& type, const std::string& detail_json) const;
  std::optional<double> alarm_ttaf(const std::vector<AgingAlert>& alerts) const;

  mutable std::mutex mu_;
  DetectorConfig cfg_;
  std::map<std::string, IndicatorState> states_;
  bool alarm_active_ = false;
  EventSink sink_;
};

}  // namespace agewatch
