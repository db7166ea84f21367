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

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agewatch/detector.hpp"
#include "agewatch/heap_model.hpp"
#include "agewatch/trend_stats.hpp"

namespace agewatch::sim {

// One container of a simulated service. Elements accumulate at growth_rate
// while the workload runs; a flush drops them (all of them by default).
struct ContainerSpec {
  std::string class_name = "java.util.HashMap";
  std::string element_class = "java.lang.Object";
  double growth_rate_per_s = 0.0;   // elements per second under load
  std::uint64_t element_size = 64;  // bytes per element
  bool flush_on_rejuvenate = true;
};

struct ServiceSpec {
  std::string name;
  bool rejuvenable = false;
  std::vector<ContainerSpec> containers;
};

// Couples user-visible launch time to accumulated container bloat:
//   LT = base + sensitivity * coefficient * bloat_bytes + gaussian noise,
// floored at base/2.
struct LaunchTimeModel {
  std::map<std::string, double> base_lt_ms;     // per activity
  std::map<std::string, double> sensitivity;    // per activity, default 1.0
  double bloat_coefficient_ms_per_byte = 1.1e-5;
  double noise_sd_ms = 3.0;
};

// Gesture mix with equal probabilities; apps are launched and killed
// round-robin every launch_kill_period_s.
struct WorkloadSpec {
  std::vector<std::string> apps;
  double duration_s = 21600.0;  // six hours of model time
  double launch_kill_period_s = 10.0;
  double gesture_period_s = 1.0;
};

enum class GestureKind { app_switch, navigation, single_touch, swipe, multi_touch };
inline constexpr std::size_t kGestureKinds = 5;

std::string_view to_string(GestureKind g);

// Piecewise-constant cpu utilization profile driving the load monitor.
struct LoadPoint {
  double t = 0.0;
  double cpu = 0.5;
};

// One experiment: which services get flushed on alarms, under which policy,
// and optionally a periodic full reboot instead.
struct ExperimentSpec {
  std::string id;
  std::set<std::string> rejuvenated_services;
  PolicyMode policy = PolicyMode::warn_only;
  double safety_margin_s = 600.0;
  LoadBand load_gate = LoadBand::low;
  std::optional<double> reboot_period_s;
  bool emit_snapshots = false;
};

struct SimSpec {
  std::string process_name = "system_server";
  std::vector<ServiceSpec> services;
  WorkloadSpec workload;
  LaunchTimeModel launch_time;
  DetectorConfig detector = DetectorConfig::defaults();
  std::vector<LoadPoint> load_profile;  // empty = constant medium load
  double snapshot_period_s = 3600.0;
  double pss_period_s = 30.0;
  double pause_duration_s = 0.001;  // service pause while flushing
  double flush_fraction = 1.0;      // fraction of oldest elements removed
  double base_pss_bytes = 268435456.0;   // 256 MiB
  double total_mem_bytes = 2147483648.0; // 2 GiB, for the free_mem indicator
  double pss_noise_sd_bytes = 2048.0;
  std::uint64_t seed = 1;
  std::vector<ExperimentSpec> experiments;

  // Three rejuvenable services plus one that only a reboot cleans, five
  // apps, and the five-experiment plan (none / one / two / three services /
  // periodic reboot).
  static SimSpec defaults();

  void validate() const;  // throws ConfigError
};

SimSpec parse_sim_spec(std::string_view text, std::string_view origin = "<memory>");
SimSpec load_sim_spec(const std::filesystem::path& path);
std::string serialize_sim_spec(const SimSpec& spec);

// Totals of the request ledger at one instant. Conservation demands
// arrived == processed + queued at every event.
struct RequestLedgerEntry {
  double t = 0.0;
  std::uint64_t arrived = 0;
  std::uint64_t processed = 0;
  std::uint64_t queued = 0;
};

struct PauseInterval {
  std::string service;
  std::size_t service_index = 0;
  double start = 0.0;
  double end = 0.0;
};

struct ProcessedRequest {
  std::size_t service_index = 0;
  double t = 0.0;
};

// Everything one run produces: per-activity indicator series, snapshot
// series, the JSON-lines event log, and the request bookkeeping.
struct SimTrace {
  std::string experiment_id;
  ExperimentSpec experiment;
  double duration_s = 0.0;
  std::vector<IndicatorSeries> indicators;
  std::vector<HeapSnapshot> snapshots;
  std::vector<std::string> events;  // JSON lines
  std::vector<RequestLedgerEntry> request_ledger;
  std::vector<ProcessedRequest> processed_requests;  // every processed request
  std::vector<PauseInterval> pauses;
  std::vector<double> rejuvenation_times;
  std::vector<double> reboot_times;

  const IndicatorSeries* find_indicator(std::string_view name) const;
};

// Runs one experiment deterministically: identical spec and seed give a
// byte-identical trace. Throws ConfigError for invalid specs.
SimTrace run(const SimSpec& spec, const ExperimentSpec& experiment, std::uint64_t seed);

// Convenience: run every experiment in the spec with its configured seed.
std::vector<SimTrace> run_all(const SimSpec& spec);

// Single-service view used by unit tests and the rejuvenation action itself.
class ServiceRuntime {
 public:
  explicit ServiceRuntime(ServiceSpec spec);

  const ServiceSpec& spec() const { return spec_; }
  bool paused() const { return paused_; }
  double pause_end() const { return pause_end_; }

  // Element counts per container.
  std::vector<std::uint64_t> element_counts() const;

  // Accumulate growth up to `t`.
  void advance(double t, std::uint64_t* next_element_id);

  // Request arrival: processed immediately unless paused, queued otherwise.
  // Returns true when processed.
  bool request(double t, std::uint64_t request_id);

  // Pause request processing and flush flagged containers (the oldest
  // `flush_fraction` of each). Throws NotRejuvenable for services that are
  // not registered. Returns the number of elements dropped.
  std::uint64_t rejuvenate(double t, double pause_duration_s, double flush_fraction);

  // Reboot-time flush: clears every container regardless of flags.
  std::uint64_t flush_all();

  // Process all queued requests in arrival order at time `t` (the pause
  // end). Returns the drained request ids.
  std::vector<std::uint64_t> resume(double t);

  std::uint64_t arrived() const { return arrived_; }
  std::uint64_t processed() const { return processed_; }
  std::uint64_t queued() const { return static_cast<std::uint64_t>(queue_.size()); }

  std::uint64_t bloat_bytes() const;

  struct Element {
    ObjectId id;
    double created_at;
  };
  const std::vector<std::vector<Element>>& containers() const { return elements_; }

 private:
  ServiceSpec spec_;
  std::vector<std::vector<Element>> elements_;  // per container
  std::vector<double> fill_accum_;
  double last_growth_t_ = 0.0;
  bool paused_ = false;
  double pause_end_ = 0.0;
  std::deque<std::uint64_t> queue_;
  std::uint64_t arrived_ = 0;
  std::uint64_t processed_ = 0;
};

}  // namespace agewatch::sim
