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
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "agewatch/heap_model.hpp"

namespace agewatch {

// Either a concrete object or the synthetic SuperRoot that aggregates all
// GC roots, so "dominated only by roots" has a single representation.
class DominatorRef {
 public:
  static DominatorRef super_root() { return DominatorRef(std::nullopt); }
  static DominatorRef object(ObjectId id) { return DominatorRef(id); }

  bool is_super_root() const { return !id_.has_value(); }

  // Precondition: !is_super_root().
  ObjectId object_id() const;

  // "SuperRoot" or "class@id".
  std::string display(const HeapSnapshot& snapshot) const;

  bool operator==(const DominatorRef&) const = default;

 private:
  explicit DominatorRef(std::optional<ObjectId> id) : id_(id) {}
  std::optional<ObjectId> id_;
};

// Immediate-dominator tree of the reachable object graph. An object d
// dominates y if every path from any GC root to y goes through d; idom(y)
// is the closest strict dominator. Objects unreachable from the roots have
// no entry.
class DominatorTree {
 public:
  bool reachable(ObjectId id) const { return idom_.count(id) != 0; }

  // Throws UnreachableObject for unknown / unreachable ids.
  DominatorRef idom(ObjectId id) const;

  // Reachable object ids in snapshot object order (deterministic).
  const std::vector<ObjectId>& reachable_objects() const { return reachable_; }

  // Objects whose immediate dominator is the SuperRoot.
  const std::vector<ObjectId>& super_root_children() const { return super_root_children_; }

  std::size_t reachable_count() const { return reachable_.size(); }

 private:
  friend DominatorTree compute_dominators(const HeapSnapshot&);
  std::unordered_map<ObjectId, DominatorRef> idom_;
  std::vector<ObjectId> reachable_;
  std::vector<ObjectId> super_root_children_;
};

// Retained size of each reachable object: the bytes it keeps alive, i.e. the
// sum of shallow sizes over its dominator subtree.
struct RetainedSizes {
  std::unordered_map<ObjectId, std::uint64_t> retained;

  // Throws UnreachableObject for ids without an entry.
  std::uint64_t of(ObjectId id) const;
};

// Computes immediate dominators from a synthetic SuperRoot with edges to all
// gc_roots, via iterative data-flow over reverse postorder. Deterministic.
// Sized for ~10^5-node graphs.
DominatorTree compute_dominators(const HeapSnapshot& snapshot);

// retained(x) = shallow(x) + sum of retained over x's dominator children.
RetainedSizes compute_retained(const HeapSnapshot& snapshot, const DominatorTree& tree);

// Query form of DominatorTree::idom.
DominatorRef dominator_of(const DominatorTree& tree, ObjectId id);

}  // namespace agewatch
