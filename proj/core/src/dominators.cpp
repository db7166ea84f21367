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

#include "agewatch/dominators.hpp"

#include <algorithm>
#include <limits>

namespace agewatch {

namespace {

constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

}  // namespace

ObjectId DominatorRef::object_id() const {
  if (!id_) {
    throw InternalError("DominatorRef::object_id called on SuperRoot");
  }
  return *id_;
}

std::string DominatorRef::display(const HeapSnapshot& snapshot) const {
  if (is_super_root()) return "SuperRoot";
  return display_name(snapshot, *id_);
}

DominatorRef DominatorTree::idom(ObjectId id) const {
  auto it = idom_.find(id);
  if (it == idom_.end()) {
    throw UnreachableObject("object " + std::to_string(id) +
                            " is not reachable from any gc_root");
  }
  return it->second;
}

std::uint64_t RetainedSizes::of(ObjectId id) const {
  auto it = retained.find(id);
  if (it == retained.end()) {
    throw UnreachableObject("object " + std::to_string(id) +
                            " is not reachable from any gc_root");
  }
  return it->second;
}

DominatorTree compute_dominators(const HeapSnapshot& snapshot) {
  const std::size_t n = snapshot.objects.size();
  const std::size_t super_root = n;  // dense index of the synthetic root

  // Successor lists over dense indices; SuperRoot points at every gc_root.
  std::vector<std::vector<std::size_t>> succ(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const ObjectRecord& rec = snapshot.objects[i];
    succ[i].reserve(rec.refs.size());
    for (ObjectId ref : rec.refs) succ[i].push_back(snapshot.index_of(ref));
  }
  succ[super_root].reserve(snapshot.gc_roots.size());
  for (ObjectId root : snapshot.gc_roots) {
    succ[super_root].push_back(snapshot.index_of(root));
  }

  // Iterative DFS from the SuperRoot to assign postorder numbers; recursion
  // would overflow the stack on long reference chains.
  std::vector<std::size_t> postorder(n + 1, kUnset);
  std::vector<std::size_t> rpo;  // nodes in reverse postorder, SuperRoot first
  {
    std::vector<std::size_t> order;
    order.reserve(n + 1);
    std::vector<char> visited(n + 1, 0);
    // stack of (node, next successor index)
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    stack.emplace_back(super_root, 0);
    visited[super_root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < succ[node].size()) {
        std::size_t child = succ[node][next++];
        if (!visited[child]) {
          visited[child] = 1;
          stack.emplace_back(child, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
    for (std::size_t i = 0; i < order.size(); ++i) postorder[order[i]] = i;
    rpo.assign(order.rbegin(), order.rend());
  }

  // Predecessor lists restricted to reachable nodes.
  std::vector<std::vector<std::size_t>> pred(n + 1);
  for (std::size_t u : rpo) {
    for (std::size_t v : succ[u]) {
      if (postorder[v] != kUnset) pred[v].push_back(u);
    }
  }

  // Iterative data-flow: intersect dominator paths until a fixed point.
  std::vector<std::size_t> idom(n + 1, kUnset);
  idom[super_root] = super_root;
  auto intersect = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      while (postorder[a] < postorder[b]) a = idom[a];
      while (postorder[b] < postorder[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t node : rpo) {
      if (node == super_root) continue;
      std::size_t new_idom = kUnset;
      for (std::size_t p : pred[node]) {
        if (idom[p] == kUnset) continue;  // not yet processed this sweep
        new_idom = (new_idom == kUnset) ? p : intersect(p, new_idom);
      }
      if (new_idom != kUnset && idom[node] != new_idom) {
        idom[node] = new_idom;
        changed = true;
      }
    }
  }

  DominatorTree tree;
  tree.idom_.reserve(rpo.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (postorder[i] == kUnset) continue;  // unreachable: garbage, not bloat
    ObjectId id = snapshot.objects[i].id;
    tree.reachable_.push_back(id);
    if (idom[i] == super_root) {
      tree.idom_.emplace(id, DominatorRef::super_root());
      tree.super_root_children_.push_back(id);
    } else {
      tree.idom_.emplace(id, DominatorRef::object(snapshot.objects[idom[i]].id));
    }
  }
  return tree;
}

RetainedSizes compute_retained(const HeapSnapshot& snapshot, const DominatorTree& tree) {
  // Children accumulate into parents in order of decreasing dominator-tree
  // depth; idom always precedes its children in reverse postorder, so a
  // depth sort over the reachable set is enough.
  const auto& reachable = tree.reachable_objects();
  std::unordered_map<ObjectId, std::uint64_t> retained;
  retained.reserve(reachable.size());
  std::unordered_map<ObjectId, std::size_t> depth;
  depth.reserve(reachable.size());

  auto depth_of = [&](ObjectId id) {
    // Walk up to the first node with a known depth (SuperRoot has depth 0),
    // then assign depths back down the collected chain.
    std::vector<ObjectId> chain;
    ObjectId cur = id;
    std::size_t base = 0;
    while (true) {
      auto it = depth.find(cur);
      if (it != depth.end()) {
        base = it->second;
        break;
      }
      chain.push_back(cur);
      DominatorRef parent = tree.idom(cur);
      if (parent.is_super_root()) break;
      cur = parent.object_id();
    }
    for (auto rit = chain.rbegin(); rit != chain.rend(); ++rit) {
      depth.emplace(*rit, ++base);
    }
    return depth[id];
  };

  std::vector<ObjectId> order(reachable.begin(), reachable.end());
  for (ObjectId id : order) {
    depth_of(id);
    retained.emplace(id, snapshot.object(id).shallow_size);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](ObjectId a, ObjectId b) { return depth[a] > depth[b]; });

  for (ObjectId id : order) {
    DominatorRef parent = tree.idom(id);
    if (!parent.is_super_root()) {
      retained[parent.object_id()] += retained[id];
    }
  }

  RetainedSizes sizes;
  sizes.retained = std::move(retained);
  return sizes;
}

DominatorRef dominator_of(const DominatorTree& tree, ObjectId id) {
  return tree.idom(id);
}

}  // namespace agewatch
