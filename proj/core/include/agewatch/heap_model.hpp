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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agewatch/errors.hpp"

namespace agewatch {

using ObjectId = std::uint64_t;

// One heap object: identity, class, directly-owned bytes, and outgoing
// references. created_at_s / last_access_s are optional producer metadata.
struct ObjectRecord {
  ObjectId id = 0;
  std::string class_name;
  std::uint64_t shallow_size = 0;
  std::vector<ObjectId> refs;
  std::optional<double> created_at_s;
  std::optional<double> last_access_s;
};

// A timestamped dump of one process heap: GC roots plus the object reference
// graph. Immutable once finalized; safe to share across threads for reads.
class HeapSnapshot {
 public:
  std::string snapshot_id;
  double timestamp_s = 0.0;
  std::string process_name;
  std::vector<ObjectId> gc_roots;
  std::vector<ObjectRecord> objects;

  // Builds the id index and validates the graph invariants: unique ids, and
  // every ref / gc_root resolving to a record in this snapshot.
  // Throws DuplicateId or DanglingReference. Must be called after the public
  // fields are filled in; the loaders do this for you.
  void finalize();

  bool contains(ObjectId id) const { return index_.count(id) != 0; }

  // Dense position of an object in `objects`. Throws InternalError if absent.
  std::size_t index_of(ObjectId id) const;

  const ObjectRecord& object(ObjectId id) const { return objects[index_of(id)]; }

  const ObjectRecord* find_object(ObjectId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &objects[it->second];
  }

 private:
  std::unordered_map<ObjectId, std::size_t> index_;
};

// Snapshots of one process ordered by strictly increasing timestamp.
struct SnapshotSeries {
  std::vector<HeapSnapshot> snapshots;

  std::size_t size() const { return snapshots.size(); }
  bool empty() const { return snapshots.empty(); }
  const HeapSnapshot& operator[](std::size_t i) const { return snapshots[i]; }
};

// Class names treated as containers during analysis.
struct ContainerClassSet {
  std::set<std::string> class_names;

  // The five collection classes the analysis targets by default.
  static ContainerClassSet default_set();

  bool contains(const std::string& name) const { return class_names.count(name) != 0; }
};

// Per-container query result: how many elements it holds (its out-degree)
// and how many objects reference it.
struct ContainerView {
  ObjectId object_id = 0;
  std::string class_name;
  std::size_t element_count = 0;
  std::size_t inbound_count = 0;
};

// --- Snapshot file format (UTF-8 JSON, one document per file) -------------
//
// {"snapshot_id": str, "timestamp_s": number, "process": str,
//  "gc_roots": [int...],
//  "objects": [{"id": int, "class": str, "shallow_size": int,
//               "refs": [int...], "created_at_s": number?,
//               "last_access_s": number?} ...]}
//
// Unknown keys are ignored, missing optional keys are allowed, integers are
// non-negative 64-bit.

// Parses one snapshot document. `origin` is used in diagnostics.
// Throws ParseError, DuplicateId, DanglingReference.
HeapSnapshot parse_snapshot(std::string_view text, std::string_view origin = "<memory>");

HeapSnapshot load_snapshot(const std::filesystem::path& path);

std::string serialize_snapshot(const HeapSnapshot& snapshot);

void save_snapshot(const HeapSnapshot& snapshot, const std::filesystem::path& path);

// Wraps pre-loaded snapshots into a series; rejects non-increasing
// timestamps and duplicate snapshot ids. Throws NonMonotonicTimestamps.
SnapshotSeries make_series(std::vector<HeapSnapshot> snapshots);

// Loads each path in order and validates the series. Throws on the first
// failing file, or NonMonotonicTimestamps.
SnapshotSeries load_series(const std::vector<std::filesystem::path>& paths);

// One ContainerView per object whose class is in `classes`, in snapshot
// object order. inbound_count counts distinct referencing objects over the
// full graph.
std::vector<ContainerView> find_containers(const HeapSnapshot& snapshot,
                                           const ContainerClassSet& classes);

// Display name synthesized as "class@id" (runtime addresses are not modeled).
std::string display_name(const ObjectRecord& record);
std::string display_name(const HeapSnapshot& snapshot, ObjectId id);

}  // namespace agewatch
