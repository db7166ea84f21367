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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agewatch/errors.hpp"

namespace agewatch {

struct IndicatorSample {
  double timestamp_s = 0.0;
  double value = 0.0;
};

// Time series of one aging indicator. Names follow the convention
// "launch_time:<activity>", "pss:<process>", "free_mem", ... with value
// units fixed per indicator (ms for launch times, bytes for memory).
struct IndicatorSeries {
  std::string name;
  std::vector<IndicatorSample> samples;  // timestamps strictly increasing
};

enum class TrendDirection { increasing, decreasing, none };

std::string_view to_string(TrendDirection d);

struct MannKendallResult {
  long long s = 0;        // pairwise sign count
  double variance_s = 0;  // tie-corrected variance of S
  double z_score = 0;
  double p_value = 1;     // two-sided
};

struct TrendResult {
  long long s_statistic = 0;
  double variance_s = 0;
  double z_score = 0;
  double p_value = 1;
  double slope = 0;  // value units per second (Sen's estimator)
  TrendDirection direction = TrendDirection::none;
};

// Mann-Kendall test with tie-corrected variance and the +/-1 continuity
// correction:
//   S      = sum over i<j of sign(v[j] - v[i])
//   Var(S) = [n(n-1)(2n+5) - sum_t t(t-1)(2t+5)] / 18   (t = tie-group sizes)
//   Z      = (S-1)/sqrt(Var) if S>0, 0 if S=0, (S+1)/sqrt(Var) if S<0
//   p      = two-sided normal tail probability of Z
// All values tied yields Var=0, Z=0, p=1 (no trend can be claimed).
// Throws TooFewSamples for n < 3.
MannKendallResult mann_kendall(std::span<const double> values);

// Median of the pairwise slopes (v[j]-v[i])/(t[j]-t[i]) over all i<j; the
// mean of the two middle values for even pair counts. Requires n >= 2 and
// distinct timestamps. Throws TooFewSamples.
double sen_slope(std::span<const IndicatorSample> samples);

// Runs mann_kendall + sen_slope on the most recent `window` samples.
// direction is increasing iff p <= alpha and S > 0, decreasing iff p <= alpha
// and S < 0, none otherwise. Requires series length >= window >= 3 and
// 0 < alpha < 1. Throws TooFewSamples.
TrendResult windowed_trend(const IndicatorSeries& series, std::size_t window,
                           double alpha = 0.05);

// --- Indicator CSV (`timestamp_s,indicator,value`, header row required) ---

// Groups rows by indicator, preserving file order; validates strictly
// increasing timestamps per indicator. Throws ParseError.
std::vector<IndicatorSeries> read_indicator_csv(std::istream& in,
                                                std::string_view origin = "<stream>");

std::vector<IndicatorSeries> load_indicator_csv(const std::filesystem::path& path);

// Appends rows with fixed numeric formatting (deterministic output).
class IndicatorCsvWriter {
 public:
  explicit IndicatorCsvWriter(std::ostream& out);
  void row(double timestamp_s, std::string_view indicator, double value);

 private:
  std::ostream& out_;
};

}  // namespace agewatch
