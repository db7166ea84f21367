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

#include "agewatch/trend_stats.hpp"

namespace {

using namespace agewatch;

IndicatorSeries noisy_drift(std::size_t n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 2.0);
  IndicatorSeries series;
  series.name = "bench";
  for (std::size_t i = 0; i < n; ++i) {
    series.samples.push_back(
        IndicatorSample{10.0 * static_cast<double>(i),
                        100.0 + 0.01 * static_cast<double>(i) + noise(rng)});
  }
  return series;
}

void BM_mann_kendall(benchmark::State& state) {
  const auto series = noisy_drift(static_cast<std::size_t>(state.range(0)));
  std::vector<double> values;
  for (const auto& s : series.samples) values.push_back(s.value);
  for (auto _ : state) {
    auto r = mann_kendall(values);
    benchmark::DoNotOptimize(r.p_value);
  }
}
BENCHMARK(BM_mann_kendall)->Arg(30)->Arg(100)->Arg(500);

void BM_windowed_trend(benchmark::State& state) {
  const auto series = noisy_drift(2000);
  for (auto _ : state) {
    auto r = windowed_trend(series, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(r.direction);
  }
}
BENCHMARK(BM_windowed_trend)->Arg(30)->Arg(60)->Arg(120);

void BM_sen_slope(benchmark::State& state) {
  const auto series = noisy_drift(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto slope = sen_slope(series.samples);
    benchmark::DoNotOptimize(slope);
  }
}
BENCHMARK(BM_sen_slope)->Arg(30)->Arg(100)->Arg(500);

}  // namespace
