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

#include <benchmark/benchmark.h>

#include <random>

#include "agewatch/dominators.hpp"

namespace {

using namespace agewatch;

// Heap-shaped graph: a root fan-out into services, containers and element
// chains, plus a sprinkle of random cross references.
HeapSnapshot synthetic_heap(std::size_t n) {
  HeapSnapshot snap;
  snap.snapshot_id = "bench";
  snap.process_name = "bench";
  snap.gc_roots.push_back(0);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    ObjectRecord rec;
    rec.id = i;
    rec.class_name = "c";
    rec.shallow_size = 16;
    for (std::size_t k = 1; k <= 8 && i * 8 + k < n; ++k) rec.refs.push_back(i * 8 + k);
    if (i % 17 == 0) rec.refs.push_back(pick(rng));
    snap.objects.push_back(std::move(rec));
  }
  snap.finalize();
  return snap;
}

void BM_compute_dominators(benchmark::State& state) {
  const auto snap = synthetic_heap(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto tree = compute_dominators(snap);
    benchmark::DoNotOptimize(tree.reachable_count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_compute_dominators)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_compute_retained(benchmark::State& state) {
  const auto snap = synthetic_heap(static_cast<std::size_t>(state.range(0)));
  const auto tree = compute_dominators(snap);
  for (auto _ : state) {
    auto retained = compute_retained(snap, tree);
    benchmark::DoNotOptimize(retained.retained.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_compute_retained)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace
