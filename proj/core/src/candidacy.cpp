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

#include "agewatch/candidacy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace agewatch {

namespace {

using nlohmann::json;

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

// Population standard deviation; the series is the whole observation window,
// not a sample from it.
double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

bool passes(CriterionResult r) { return r != CriterionResult::fail; }

std::string format_bytes(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Distinct-referrer counts for one snapshot.
std::unordered_map<ObjectId, std::size_t> inbound_map(const HeapSnapshot& snap) {
  std::unordered_map<ObjectId, std::size_t> inbound;
  std::unordered_set<ObjectId> seen;
  for (const ObjectRecord& rec : snap.objects) {
    seen.clear();
    for (ObjectId ref : rec.refs) {
      if (seen.insert(ref).second) ++inbound[ref];
    }
  }
  return inbound;
}

std::vector<TrackedContainer> track_impl(const SnapshotSeries& series, const CandidacyConfig& cfg,
                                         std::span<const DominatorTree> trees,
                                         std::vector<std::string>* transient_out) {
  struct Slot {
    TrackedContainer tracked;
    std::size_t seen = 0;
    bool reachable_everywhere = true;
  };
  // Slot order follows the first snapshot; identity is the (id, class) pair.
  std::vector<Slot> slots;
  std::unordered_map<ObjectId, std::size_t> slot_index;
  std::vector<std::string> late_comers;
  std::unordered_set<ObjectId> late_seen;

  for (std::size_t si = 0; si < series.size(); ++si) {
    const HeapSnapshot& snap = series[si];
    const RetainedSizes retained = compute_retained(snap, trees[si]);

    for (const ContainerView& view : find_containers(snap, cfg.container_classes)) {
      if (si == 0) {
        Slot slot;
        slot.tracked.id = view.object_id;
        slot.tracked.class_name = view.class_name;
        slot_index.emplace(view.object_id, slots.size());
        slots.push_back(std::move(slot));
      }
      auto it = slot_index.find(view.object_id);
      if (it == slot_index.end() ||
          slots[it->second].tracked.class_name != view.class_name) {
        // First appearance after the series started: transient by definition.
        if (late_seen.insert(view.object_id).second) {
          late_comers.push_back(view.class_name + "@" + std::to_string(view.object_id));
        }
        continue;
      }
      Slot& slot = slots[it->second];
      if (slot.seen != si) continue;  // missed an earlier snapshot
      if (!trees[si].reachable(view.object_id)) {
        // Unreachable objects are garbage awaiting collection, not bloat.
        slot.reachable_everywhere = false;
        continue;
      }
      slot.tracked.retained.push_back(static_cast<double>(retained.of(view.object_id)));
      slot.tracked.element_counts.push_back(view.element_count);
      slot.seen = si + 1;
    }
  }

  std::vector<TrackedContainer> tracked;
  for (Slot& slot : slots) {
    if (slot.seen == series.size() && slot.reachable_everywhere) {
      tracked.push_back(std::move(slot.tracked));
    } else if (transient_out) {
      transient_out->push_back(slot.tracked.class_name + "@" +
                               std::to_string(slot.tracked.id));
    }
  }
  if (transient_out) {
    transient_out->insert(transient_out->end(), late_comers.begin(), late_comers.end());
  }
  return tracked;
}

}  // namespace

void CandidacyConfig::validate() const {
  if (container_classes.class_names.empty()) {
    throw ConfigError("candidacy: container class set must not be empty");
  }
  if (min_snapshots < 2) {
    throw ConfigError("candidacy: min_snapshots must be >= 2");
  }
  if (long_lifetime_s && *long_lifetime_s <= 0.0) {
    throw ConfigError("candidacy: long_lifetime_s must be > 0");
  }
  if (idle_threshold_s <= 0.0) {
    throw ConfigError("candidacy: idle_threshold_s must be > 0");
  }
}

CandidacyConfig parse_candidacy_config(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  CandidacyConfig cfg;
  try {
    if (doc.contains("container_classes")) {
      cfg.container_classes.class_names.clear();
      for (const json& name : doc["container_classes"]) {
        cfg.container_classes.class_names.insert(name.get<std::string>());
      }
    }
    if (doc.contains("whitelist")) {
      for (const json& name : doc["whitelist"]) cfg.whitelist.insert(name.get<std::string>());
    }
    if (doc.contains("blacklist")) {
      for (const json& name : doc["blacklist"]) cfg.blacklist.insert(name.get<std::string>());
    }
    if (doc.contains("min_snapshots")) cfg.min_snapshots = doc["min_snapshots"].get<std::size_t>();
    if (doc.contains("long_lifetime_s") && !doc["long_lifetime_s"].is_null()) {
      cfg.long_lifetime_s = doc["long_lifetime_s"].get<double>();
    }
    if (doc.contains("idle_threshold_s")) {
      cfg.idle_threshold_s = doc["idle_threshold_s"].get<double>();
    }
    if (doc.contains("use_whitelist")) cfg.use_whitelist = doc["use_whitelist"].get<bool>();
    if (doc.contains("use_blacklist")) cfg.use_blacklist = doc["use_blacklist"].get<bool>();
    if (doc.contains("require_net_growth")) {
      cfg.require_net_growth = doc["require_net_growth"].get<bool>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string_view to_string(CriterionResult r) {
  switch (r) {
    case CriterionResult::pass: return "pass";
    case CriterionResult::fail: return "fail";
    case CriterionResult::skipped: return "skipped";
  }
  return "fail";
}

std::vector<TrackedContainer> track_containers(const SnapshotSeries& series,
                                               const CandidacyConfig& cfg,
                                               std::vector<std::string>* transient_out) {
  cfg.validate();
  if (series.size() < cfg.min_snapshots) {
    throw SeriesTooShort("candidacy: series has " + std::to_string(series.size()) +
                         " snapshots, need at least " + std::to_string(cfg.min_snapshots));
  }
  std::vector<DominatorTree> trees;
  trees.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    trees.push_back(compute_dominators(series[i]));
  }
  return track_impl(series, cfg, trees, transient_out);
}

CriteriaOutcome evaluate_criteria(const TrackedContainer& tracked, const SnapshotSeries& series,
                                  std::span<const DominatorTree> trees,
                                  const CandidacyConfig& cfg) {
  CriteriaOutcome outcome;
  const std::size_t count = series.size();
  const ObjectId id = tracked.id;

  // C1: hidden inside a single dominating object in every snapshot.
  bool c1 = true;
  for (std::size_t i = 0; i < count; ++i) {
    if (trees[i].idom(id).is_super_root()) {
      c1 = false;
      break;
    }
  }
  outcome.per_criterion["C1"] = c1 ? CriterionResult::pass : CriterionResult::fail;

  // C2: memory use varies, and (by default) grows overall. Fixed-size
  // containers may hold information strictly required by the service.
  const bool varies = stddev_of(tracked.retained) > 0.0;
  const bool grows = tracked.retained.back() > tracked.retained.front();
  const bool c2 = varies && (!cfg.require_net_growth || grows);
  outcome.per_criterion["C2"] = c2 ? CriterionResult::pass : CriterionResult::fail;

  // C3: at least one element lives long. With created_at metadata, lifetime
  // is measured against the last snapshot; otherwise an element counts as
  // long-lived when present in >= 2 consecutive snapshots (spanning
  // long_lifetime_s when that is configured).
  bool c3 = false;
  {
    // element id -> (start, last) snapshot indices of its current
    // consecutive run; runs reset when the element disappears.
    std::unordered_map<ObjectId, std::pair<std::size_t, std::size_t>> runs;
    double best_span = -1.0;
    bool any_consecutive_pair = false;
    for (std::size_t i = 0; i < count; ++i) {
      const ObjectRecord& rec = series[i].object(id);
      for (ObjectId element : rec.refs) {
        auto it = runs.find(element);
        if (it == runs.end()) {
          runs.emplace(element, std::make_pair(i, i));
        } else if (it->second.second == i) {
          // duplicate ref within one snapshot
        } else if (it->second.second + 1 == i) {
          it->second.second = i;
          any_consecutive_pair = true;
          best_span = std::max(
              best_span, series[i].timestamp_s - series[it->second.first].timestamp_s);
        } else {
          it->second = {i, i};
        }
      }
    }
    if (cfg.long_lifetime_s) {
      c3 = best_span >= *cfg.long_lifetime_s;
      if (!c3) {
        const HeapSnapshot& last = series[count - 1];
        for (ObjectId element : last.object(id).refs) {
          const ObjectRecord* rec = last.find_object(element);
          if (rec && rec->created_at_s &&
              last.timestamp_s - *rec->created_at_s >= *cfg.long_lifetime_s) {
            c3 = true;
            break;
          }
        }
      }
    } else {
      c3 = any_consecutive_pair;
    }
  }
  outcome.per_criterion["C3"] = c3 ? CriterionResult::pass : CriterionResult::fail;

  // C4: elements stale for at least idle_threshold_s. Without access
  // metadata the criterion cannot be evaluated from dumps; it is marked
  // skipped and surfaced in the report for developer review.
  {
    const HeapSnapshot& last = series[count - 1];
    bool have_metadata = false;
    bool stale = false;
    for (ObjectId element : last.object(id).refs) {
      const ObjectRecord* rec = last.find_object(element);
      if (rec && rec->last_access_s) {
        have_metadata = true;
        if (last.timestamp_s - *rec->last_access_s >= cfg.idle_threshold_s) {
          stale = true;
          break;
        }
      }
    }
    if (!have_metadata) {
      outcome.per_criterion["C4"] = CriterionResult::skipped;
    } else {
      outcome.per_criterion["C4"] = stale ? CriterionResult::pass : CriterionResult::fail;
    }
  }

  // C5/C6: developer white/black lists over element classes, evaluated over
  // the union of elements seen in any snapshot.
  if (cfg.use_whitelist || cfg.use_blacklist) {
    std::set<std::string> element_classes;
    for (std::size_t i = 0; i < count; ++i) {
      const HeapSnapshot& snap = series[i];
      for (ObjectId element : snap.object(id).refs) {
        if (const ObjectRecord* rec = snap.find_object(element)) {
          element_classes.insert(rec->class_name);
        }
      }
    }
    if (cfg.use_whitelist) {
      bool all_disposable = true;
      for (const std::string& cls : element_classes) {
        if (cfg.whitelist.count(cls) == 0) {
          all_disposable = false;
          break;
        }
      }
      outcome.per_criterion["C5"] =
          all_disposable ? CriterionResult::pass : CriterionResult::fail;
    }
    if (cfg.use_blacklist) {
      bool any_critical = false;
      for (const std::string& cls : element_classes) {
        if (cfg.blacklist.count(cls) != 0) {
          any_critical = true;
          break;
        }
      }
      outcome.per_criterion["C6"] =
          any_critical ? CriterionResult::fail : CriterionResult::pass;
    }
  }
  if (!cfg.use_whitelist) outcome.per_criterion["C5"] = CriterionResult::skipped;
  if (!cfg.use_blacklist) outcome.per_criterion["C6"] = CriterionResult::skipped;

  outcome.rejuvenate = true;
  for (const auto& [criterion, result] : outcome.per_criterion) {
    if (!passes(result)) {
      outcome.rejuvenate = false;
      break;
    }
  }
  return outcome;
}

AnalysisReport build_report(const SnapshotSeries& series, const CandidacyConfig& cfg) {
  cfg.validate();
  if (series.size() < cfg.min_snapshots) {
    throw SeriesTooShort("candidacy: series has " + std::to_string(series.size()) +
                         " snapshots, need at least " + std::to_string(cfg.min_snapshots));
  }

  AnalysisReport report;
  report.process_name = series[0].process_name;

  std::vector<DominatorTree> trees;
  trees.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    trees.push_back(compute_dominators(series[i]));
  }

  std::vector<TrackedContainer> tracked = track_impl(series, cfg, trees, &report.transient);

  std::vector<std::unordered_map<ObjectId, std::size_t>> inbound;
  inbound.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) inbound.push_back(inbound_map(series[i]));

  const HeapSnapshot& last = series[series.size() - 1];
  for (const TrackedContainer& tc : tracked) {
    CriteriaOutcome outcome = evaluate_criteria(tc, series, trees, cfg);
    ContainerCandidate row;
    row.object_id = tc.id;
    row.object_name = tc.class_name + "@" + std::to_string(tc.id);
    row.dominator_name = trees.back().idom(tc.id).display(last);
    row.mean_retained = mean_of(tc.retained);
    row.stddev_retained = stddev_of(tc.retained);
    row.element_count = tc.element_counts.back();
    row.rejuvenate = outcome.rejuvenate;
    // Informational companion to C1: exactly one referrer throughout.
    row.sole_inbound = true;
    for (std::size_t i = 0; i < series.size(); ++i) {
      auto it = inbound[i].find(tc.id);
      if (it == inbound[i].end() || it->second != 1) {
        row.sole_inbound = false;
        break;
      }
    }
    row.per_criterion = std::move(outcome.per_criterion);
    report.rows.push_back(std::move(row));
  }

  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ContainerCandidate& a, const ContainerCandidate& b) {
                     if (a.mean_retained != b.mean_retained) {
                       return a.mean_retained > b.mean_retained;
                     }
                     return a.object_name < b.object_name;
                   });

  report.list.process_name = report.process_name;
  for (const ContainerCandidate& row : report.rows) {
    if (row.rejuvenate) report.list.containers.push_back(row.object_name);
  }
  return report;
}

void write_report_csv(std::ostream& out, const AnalysisReport& report) {
  out << "object_name,dominator_name,mean,standard_deviation,number,rejuvenate\n";
  for (const ContainerCandidate& row : report.rows) {
    out << row.object_name << ',' << row.dominator_name << ','
        << format_bytes(row.mean_retained) << ',' << format_bytes(row.stddev_retained) << ','
        << row.element_count << ',' << (row.rejuvenate ? "TRUE" : "FALSE") << '\n';
  }
}

void write_report_json(std::ostream& out, const AnalysisReport& report) {
  json doc;
  doc["process"] = report.process_name;
  json rows = json::array();
  for (const ContainerCandidate& row : report.rows) {
    json jr;
    jr["object_name"] = row.object_name;
    jr["dominator_name"] = row.dominator_name;
    jr["mean"] = row.mean_retained;
    jr["standard_deviation"] = row.stddev_retained;
    jr["number"] = row.element_count;
    jr["rejuvenate"] = row.rejuvenate;
    jr["sole_inbound"] = row.sole_inbound;
    json criteria;
    for (const auto& [criterion, result] : row.per_criterion) {
      criteria[criterion] = std::string(to_string(result));
    }
    jr["criteria"] = std::move(criteria);
    rows.push_back(std::move(jr));
  }
  doc["containers"] = std::move(rows);
  doc["transient"] = report.transient;
  out << doc.dump(2) << '\n';
}

void write_rejuvenation_list(std::ostream& out, const RejuvenationList& list) {
  json doc;
  doc["process"] = list.process_name;
  doc["containers"] = list.containers;
  doc["generated_at_s"] = list.generated_at_s;
  out << doc.dump(2) << '\n';
}

RejuvenationList parse_rejuvenation_list(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(origin) + ": " + e.what());
  }
  RejuvenationList list;
  if (!doc.is_object() || !doc.contains("process") || !doc.contains("containers")) {
    throw ParseError(std::string(origin) +
                     ": rejuvenation list needs 'process' and 'containers'");
  }
  list.process_name = doc["process"].get<std::string>();
  for (const json& c : doc["containers"]) list.containers.push_back(c.get<std::string>());
  if (doc.contains("generated_at_s")) list.generated_at_s = doc["generated_at_s"].get<double>();
  return list;
}

}  // namespace agewatch
