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

#include "agewatch/heap_model.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace agewatch {

namespace {

using nlohmann::json;

std::uint64_t require_u64(const json& j, const char* key, std::string_view origin) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ParseError(std::string(origin) + ": '" + key + "' must be an integer");
  }
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) {
    throw ParseError(std::string(origin) + ": '" + key + "' must be non-negative");
  }
  return j.get<std::uint64_t>();
}

const json& require_key(const json& j, const char* key, std::string_view origin) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(std::string(origin) + ": missing required key '" + key + "'");
  }
  return *it;
}

}  // namespace

void HeapSnapshot::finalize() {
  index_.clear();
  index_.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    auto [it, inserted] = index_.emplace(objects[i].id, i);
    if (!inserted) {
      throw DuplicateId("snapshot '" + snapshot_id + "': duplicate object id " +
                        std::to_string(objects[i].id));
    }
  }
  for (const ObjectRecord& rec : objects) {
    for (ObjectId ref : rec.refs) {
      if (index_.count(ref) == 0) {
        throw DanglingReference("snapshot '" + snapshot_id + "': object " +
                                std::to_string(rec.id) + " references missing id " +
                                std::to_string(ref));
      }
    }
  }
  for (ObjectId root : gc_roots) {
    if (index_.count(root) == 0) {
      throw DanglingReference("snapshot '" + snapshot_id + "': gc_root " +
                              std::to_string(root) + " is not an object in the snapshot");
    }
  }
}

std::size_t HeapSnapshot::index_of(ObjectId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw InternalError("object id " + std::to_string(id) + " not in snapshot '" +
                        snapshot_id + "'");
  }
  return it->second;
}

ContainerClassSet ContainerClassSet::default_set() {
  return ContainerClassSet{{
      "java.util.LinkedList",
      "java.util.Hashtable",
      "java.util.ArrayList",
      "java.util.HashMap",
      "java.util.Vector",
  }};
}

HeapSnapshot parse_snapshot(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(origin) + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError(std::string(origin) + ": top-level document must be an object");
  }

  HeapSnapshot snap;
  const json& jid = require_key(doc, "snapshot_id", origin);
  if (!jid.is_string()) throw ParseError(std::string(origin) + ": 'snapshot_id' must be a string");
  snap.snapshot_id = jid.get<std::string>();

  const json& jts = require_key(doc, "timestamp_s", origin);
  if (!jts.is_number()) throw ParseError(std::string(origin) + ": 'timestamp_s' must be a number");
  snap.timestamp_s = jts.get<double>();

  const json& jproc = require_key(doc, "process", origin);
  if (!jproc.is_string()) throw ParseError(std::string(origin) + ": 'process' must be a string");
  snap.process_name = jproc.get<std::string>();

  const json& jroots = require_key(doc, "gc_roots", origin);
  if (!jroots.is_array()) throw ParseError(std::string(origin) + ": 'gc_roots' must be an array");
  snap.gc_roots.reserve(jroots.size());
  for (const json& r : jroots) {
    snap.gc_roots.push_back(require_u64(r, "gc_roots[]", origin));
  }

  const json& jobjects = require_key(doc, "objects", origin);
  if (!jobjects.is_array()) throw ParseError(std::string(origin) + ": 'objects' must be an array");
  snap.objects.reserve(jobjects.size());
  for (const json& jo : jobjects) {
    if (!jo.is_object()) throw ParseError(std::string(origin) + ": objects[] entries must be objects");
    ObjectRecord rec;
    rec.id = require_u64(require_key(jo, "id", origin), "id", origin);
    const json& jcls = require_key(jo, "class", origin);
    if (!jcls.is_string()) throw ParseError(std::string(origin) + ": 'class' must be a string");
    rec.class_name = jcls.get<std::string>();
    rec.shallow_size = require_u64(require_key(jo, "shallow_size", origin), "shallow_size", origin);
    const json& jrefs = require_key(jo, "refs", origin);
    if (!jrefs.is_array()) throw ParseError(std::string(origin) + ": 'refs' must be an array");
    rec.refs.reserve(jrefs.size());
    for (const json& r : jrefs) rec.refs.push_back(require_u64(r, "refs[]", origin));
    if (auto it = jo.find("created_at_s"); it != jo.end() && !it->is_null()) {
      if (!it->is_number()) throw ParseError(std::string(origin) + ": 'created_at_s' must be a number");
      rec.created_at_s = it->get<double>();
    }
    if (auto it = jo.find("last_access_s"); it != jo.end() && !it->is_null()) {
      if (!it->is_number()) throw ParseError(std::string(origin) + ": 'last_access_s' must be a number");
      rec.last_access_s = it->get<double>();
    }
    snap.objects.push_back(std::move(rec));
  }

  snap.finalize();
  return snap;
}

HeapSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open snapshot file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_snapshot(buf.str(), path.string());
}

std::string serialize_snapshot(const HeapSnapshot& snapshot) {
  json doc;
  doc["snapshot_id"] = snapshot.snapshot_id;
  doc["timestamp_s"] = snapshot.timestamp_s;
  doc["process"] = snapshot.process_name;
  doc["gc_roots"] = snapshot.gc_roots;
  json objs = json::array();
  for (const ObjectRecord& rec : snapshot.objects) {
    json jo;
    jo["id"] = rec.id;
    jo["class"] = rec.class_name;
    jo["shallow_size"] = rec.shallow_size;
    jo["refs"] = rec.refs;
    if (rec.created_at_s) jo["created_at_s"] = *rec.created_at_s;
    if (rec.last_access_s) jo["last_access_s"] = *rec.last_access_s;
    objs.push_back(std::move(jo));
  }
  doc["objects"] = std::move(objs);
  return doc.dump();
}

void save_snapshot(const HeapSnapshot& snapshot, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write snapshot file: " + path.string());
  }
  out << serialize_snapshot(snapshot) << '\n';
}

SnapshotSeries make_series(std::vector<HeapSnapshot> snapshots) {
  std::unordered_set<std::string> seen_ids;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (!seen_ids.insert(snapshots[i].snapshot_id).second) {
      throw DuplicateId("series: duplicate snapshot_id '" + snapshots[i].snapshot_id + "'");
    }
    if (i > 0 && !(snapshots[i].timestamp_s > snapshots[i - 1].timestamp_s)) {
      throw NonMonotonicTimestamps(
          "series: timestamp of snapshot '" + snapshots[i].snapshot_id + "' (" +
          std::to_string(snapshots[i].timestamp_s) + ") does not increase over '" +
          snapshots[i - 1].snapshot_id + "' (" + std::to_string(snapshots[i - 1].timestamp_s) + ")");
    }
  }
  SnapshotSeries series;
  series.snapshots = std::move(snapshots);
  return series;
}

SnapshotSeries load_series(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) {
    throw ParseError("load_series: need at least one snapshot path");
  }
  std::vector<HeapSnapshot> snaps;
  snaps.reserve(paths.size());
  for (const auto& p : paths) snaps.push_back(load_snapshot(p));
  return make_series(std::move(snaps));
}

std::vector<ContainerView> find_containers(const HeapSnapshot& snapshot,
                                           const ContainerClassSet& classes) {
  // Distinct-referrer inbound counts over the full graph.
  std::unordered_map<ObjectId, std::size_t> inbound;
  std::unordered_set<ObjectId> seen;
  for (const ObjectRecord& rec : snapshot.objects) {
    seen.clear();
    for (ObjectId ref : rec.refs) {
      if (seen.insert(ref).second) ++inbound[ref];
    }
  }

  std::vector<ContainerView> views;
  for (const ObjectRecord& rec : snapshot.objects) {
    if (!classes.contains(rec.class_name)) continue;
    ContainerView v;
    v.object_id = rec.id;
    v.class_name = rec.class_name;
    v.element_count = rec.refs.size();
    auto it = inbound.find(rec.id);
    v.inbound_count = it == inbound.end() ? 0 : it->second;
    views.push_back(std::move(v));
  }
  return views;
}

std::string display_name(const ObjectRecord& record) {
  return record.class_name + "@" + std::to_string(record.id);
}

std::string display_name(const HeapSnapshot& snapshot, ObjectId id) {
  return display_name(snapshot.object(id));
}

}  // namespace agewatch
