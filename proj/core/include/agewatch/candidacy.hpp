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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "agewatch/dominators.hpp"
#include "agewatch/heap_model.hpp"

namespace agewatch {

// Configuration of the container screening. Whitelist/blacklist are the
// optional developer-provided class lists; both can be disregarded to speed
// up review.
struct CandidacyConfig {
  ContainerClassSet container_classes = ContainerClassSet::default_set();
  std::set<std::string> whitelist;  // "disposable" element classes
  std::set<std::string> blacklist;  // "critical" element classes
  std::size_t min_snapshots = 3;
  // Lifetime threshold for C3. Unset means: at least one element present in
  // two consecutive snapshots qualifies as long-lived.
  std::optional<double> long_lifetime_s;
  double idle_threshold_s = 600.0;
  bool use_whitelist = false;
  bool use_blacklist = false;
  // C2 additionally requires retained(last) > retained(first), excluding
  // shrinking containers.
  bool require_net_growth = true;

  void validate() const;  // throws ConfigError
};

// Reads a candidacy configuration from a JSON document; unknown keys are
// ignored and missing keys keep their defaults. Throws ConfigError.
CandidacyConfig parse_candidacy_config(std::string_view text,
                                       std::string_view origin = "<memory>");

enum class CriterionResult { pass, fail, skipped };

std::string_view to_string(CriterionResult r);

// Criterion ids used as keys in per-criterion maps and reports:
//   C1 immediate dominator is a regular object in every snapshot
//   C2 retained-size stddev > 0 (and net growth, when configured)
//   C3 at least one element with a long lifetime
//   C4 elements idle for at least idle_threshold_s (skipped without
//      access metadata)
//   C5 all element classes whitelisted        (only when use_whitelist)
//   C6 no element class blacklisted           (only when use_blacklist)
inline constexpr const char* kCriterionIds[] = {"C1", "C2", "C3", "C4", "C5", "C6"};

// Retained size / element count of one container across the series.
struct TrackedContainer {
  ObjectId id = 0;
  std::string class_name;
  std::vector<double> retained;             // bytes, one per snapshot
  std::vector<std::size_t> element_counts;  // out-degree, one per snapshot
};

// One report row, mirroring the analyzer output columns: object name,
// dominator name, mean and standard deviation of retained bytes, element
// count, and the rejuvenate verdict.
struct ContainerCandidate {
  ObjectId object_id = 0;
  std::string object_name;     // "class@id"
  std::string dominator_name;  // "class@id" or "SuperRoot" (last snapshot)
  double mean_retained = 0.0;
  double stddev_retained = 0.0;
  std::size_t element_count = 0;  // at last snapshot
  bool rejuvenate = false;
  bool sole_inbound = false;  // informational: exactly one referrer in every snapshot
  std::map<std::string, CriterionResult> per_criterion;
};

// The vetted containers-to-rejuvenate list consumed by the simulator.
struct RejuvenationList {
  std::string process_name;
  std::vector<std::string> containers;  // "class@id", descending mean retained
  double generated_at_s = 0.0;
};

struct AnalysisReport {
  std::string process_name;
  // All tracked containers, ordered by descending mean retained size
  // (object name breaks ties). One row per tracked container.
  std::vector<ContainerCandidate> rows;
  // Containers excluded because they were absent from some snapshot.
  std::vector<std::string> transient;
  RejuvenationList list;
};

// Containers tracked across every snapshot of the series, identified by
// (id, class). Containers missing from any snapshot are transient and
// excluded (reported via `transient_out` when given). Throws SeriesTooShort.
std::vector<TrackedContainer> track_containers(const SnapshotSeries& series,
                                               const CandidacyConfig& cfg,
                                               std::vector<std::string>* transient_out = nullptr);

// Applies C1..C6 to one tracked container. `trees` holds one dominator tree
// per snapshot (same order as the series).
struct CriteriaOutcome {
  std::map<std::string, CriterionResult> per_criterion;
  bool rejuvenate = false;
};
CriteriaOutcome evaluate_criteria(const TrackedContainer& tracked, const SnapshotSeries& series,
                                  std::span<const DominatorTree> trees,
                                  const CandidacyConfig& cfg);

// Full analysis: tracks containers, computes dominator trees and retained
// sizes for every snapshot, evaluates all criteria, and assembles both the
// per-container report and the rejuvenation list.
AnalysisReport build_report(const SnapshotSeries& series, const CandidacyConfig& cfg);

// CSV with header `object_name,dominator_name,mean,standard_deviation,number,rejuvenate`.
void write_report_csv(std::ostream& out, const AnalysisReport& report);

// Extended JSON report with per-criterion detail.
void write_report_json(std::ostream& out, const AnalysisReport& report);

// `{"process": str, "containers": ["class@id"...], "generated_at_s": number}`
void write_rejuvenation_list(std::ostream& out, const RejuvenationList& list);

RejuvenationList parse_rejuvenation_list(std::string_view text,
                                         std::string_view origin = "<memory>");

}  // namespace agewatch
