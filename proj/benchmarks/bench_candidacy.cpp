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

#include "agewatch/candidacy.hpp"
#include "../tests/support/builders.hpp"

namespace {

void BM_build_report(benchmark::State& state) {
  const auto series = agewatch_test::big_series(static_cast<std::size_t>(state.range(0)),
                                                353);
  agewatch::CandidacyConfig cfg;
  for (auto _ : state) {
    auto report = agewatch::build_report(series, cfg);
    benchmark::DoNotOptimize(report.rows.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_build_report)->Unit(benchmark::kMillisecond)->Arg(1000)->Arg(12674);

}  // namespace
