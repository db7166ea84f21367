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

#include "agewatch/trend_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace agewatch {

std::string_view to_string(TrendDirection d) {
  switch (d) {
    case TrendDirection::increasing: return "increasing";
    case TrendDirection::decreasing: return "decreasing";
    case TrendDirection::none: return "none";
  }
  return "none";
}

MannKendallResult mann_kendall(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 3) {
    throw TooFewSamples("mann_kendall: need at least 3 samples, got " + std::to_string(n));
  }

  long long s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = values[j] - values[i];
      s += (d > 0) - (d < 0);
    }
  }

  // Tie groups for the variance correction.
  std::map<double, std::size_t> groups;
  for (double v : values) ++groups[v];
  double tie_term = 0.0;
  for (const auto& [value, count] : groups) {
    if (count > 1) {
      const double t = static_cast<double>(count);
      tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
    }
  }
  const double dn = static_cast<double>(n);
  const double variance = (dn * (dn - 1.0) * (2.0 * dn + 5.0) - tie_term) / 18.0;

  MannKendallResult result;
  result.s = s;
  result.variance_s = variance;
  if (variance <= 0.0) {
    // All values tied: no trend can be claimed.
    result.z_score = 0.0;
    result.p_value = 1.0;
    return result;
  }
  const double sd = std::sqrt(variance);
  if (s > 0) {
    result.z_score = (static_cast<double>(s) - 1.0) / sd;
  } else if (s < 0) {
    result.z_score = (static_cast<double>(s) + 1.0) / sd;
  } else {
    result.z_score = 0.0;
  }
  result.p_value = std::erfc(std::abs(result.z_score) / std::sqrt(2.0));
  return result;
}

double sen_slope(std::span<const IndicatorSample> samples) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw TooFewSamples("sen_slope: need at least 2 samples, got " + std::to_string(n));
  }
  std::vector<double> slopes;
  slopes.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dt = samples[j].timestamp_s - samples[i].timestamp_s;
      if (dt == 0.0) {
        throw ParseError("sen_slope: duplicate timestamp " +
                         std::to_string(samples[i].timestamp_s));
      }
      slopes.push_back((samples[j].value - samples[i].value) / dt);
    }
  }
  std::sort(slopes.begin(), slopes.end());
  const std::size_t m = slopes.size();
  if (m % 2 == 1) return slopes[m / 2];
  return 0.5 * (slopes[m / 2 - 1] + slopes[m / 2]);
}

TrendResult windowed_trend(const IndicatorSeries& series, std::size_t window, double alpha) {
  if (window < 3) {
    throw TooFewSamples("windowed_trend: window must be >= 3");
  }
  if (series.samples.size() < window) {
    throw TooFewSamples("windowed_trend: series '" + series.name + "' has " +
                        std::to_string(series.samples.size()) + " samples, window is " +
                        std::to_string(window));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("windowed_trend: alpha must be in (0,1)");
  }

  std::span<const IndicatorSample> tail(series.samples.data() + series.samples.size() - window,
                                        window);
  std::vector<double> values(window);
  for (std::size_t i = 0; i < window; ++i) values[i] = tail[i].value;

  const MannKendallResult mk = mann_kendall(values);
  TrendResult result;
  result.s_statistic = mk.s;
  result.variance_s = mk.variance_s;
  result.z_score = mk.z_score;
  result.p_value = mk.p_value;
  result.slope = sen_slope(tail);
  if (mk.p_value <= alpha && mk.s > 0) {
    result.direction = TrendDirection::increasing;
  } else if (mk.p_value <= alpha && mk.s < 0) {
    result.direction = TrendDirection::decreasing;
  } else {
    result.direction = TrendDirection::none;
  }
  return result;
}

std::vector<IndicatorSeries> read_indicator_csv(std::istream& in, std::string_view origin) {
  std::vector<IndicatorSeries> result;
  std::unordered_map<std::string, std::size_t> by_name;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "timestamp_s,indicator,value") {
        throw ParseError(std::string(origin) +
                         ":1: expected header 'timestamp_s,indicator,value', got '" + line + "'");
      }
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 == c1) {
      throw ParseError(std::string(origin) + ":" + std::to_string(lineno) +
                       ": expected 3 comma-separated fields");
    }
    IndicatorSample sample;
    try {
      sample.timestamp_s = std::stod(line.substr(0, c1));
      sample.value = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw ParseError(std::string(origin) + ":" + std::to_string(lineno) +
                       ": non-numeric timestamp or value");
    }
    std::string name = line.substr(c1 + 1, c2 - c1 - 1);
    if (name.empty()) {
      throw ParseError(std::string(origin) + ":" + std::to_string(lineno) +
                       ": empty indicator name");
    }

    auto [it, inserted] = by_name.emplace(name, result.size());
    if (inserted) {
      result.push_back(IndicatorSeries{std::move(name), {}});
    }
    IndicatorSeries& series = result[it->second];
    if (!series.samples.empty() &&
        !(sample.timestamp_s > series.samples.back().timestamp_s)) {
      throw ParseError(std::string(origin) + ":" + std::to_string(lineno) +
                       ": timestamps for indicator '" + series.name +
                       "' must strictly increase");
    }
    series.samples.push_back(sample);
  }
  return result;
}

std::vector<IndicatorSeries> load_indicator_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open indicator CSV: " + path.string());
  }
  return read_indicator_csv(in, path.string());
}

IndicatorCsvWriter::IndicatorCsvWriter(std::ostream& out) : out_(out) {
  out_ << "timestamp_s,indicator,value\n";
}

void IndicatorCsvWriter::row(double timestamp_s, std::string_view indicator, double value) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.3f,", timestamp_s);
  out_ << buf << indicator;
  std::snprintf(buf, sizeof(buf), ",%.6f\n", value);
  out_ << buf;
}

}  // namespace agewatch
