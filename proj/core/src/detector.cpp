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

#include "agewatch/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "detector_json.hpp"

namespace agewatch {

namespace {

using nlohmann::json;

// "prefix:any" matches "prefix:<anything>"; anything else matches exactly.
bool rule_matches(const std::string& required, const std::string& indicator) {
  constexpr std::string_view kAny = ":any";
  if (required.size() > kAny.size() &&
      required.compare(required.size() - kAny.size(), kAny.size(), kAny) == 0) {
    const std::string prefix = required.substr(0, required.size() - kAny.size() + 1);
    return indicator.compare(0, prefix.size(), prefix) == 0;
  }
  return required == indicator;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  if (m == 0) return 0.0;
  if (m % 2 == 1) return v[m / 2];
  return 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::low: return "low";
    case Confidence::medium: return "medium";
    case Confidence::high: return "high";
    case Confidence::very_high: return "very_high";
  }
  return "low";
}

Confidence confidence_from_string(std::string_view s) {
  if (s == "low") return Confidence::low;
  if (s == "medium") return Confidence::medium;
  if (s == "high") return Confidence::high;
  if (s == "very_high") return Confidence::very_high;
  throw ConfigError("unknown confidence level: '" + std::string(s) + "'");
}

std::string_view to_string(PolicyMode m) {
  switch (m) {
    case PolicyMode::warn_only: return "warn_only";
    case PolicyMode::immediate: return "immediate";
    case PolicyMode::postpone: return "postpone";
  }
  return "warn_only";
}

PolicyMode policy_from_string(std::string_view s) {
  if (s == "warn_only") return PolicyMode::warn_only;
  if (s == "immediate") return PolicyMode::immediate;
  if (s == "postpone") return PolicyMode::postpone;
  throw ConfigError("unknown policy mode: '" + std::string(s) + "'");
}

std::string_view to_string(LoadBand b) {
  switch (b) {
    case LoadBand::low: return "low";
    case LoadBand::medium: return "medium";
    case LoadBand::high: return "high";
  }
  return "low";
}

LoadBand classify_load(double cpu_utilization, const LoadThresholds& thresholds) {
  if (cpu_utilization < thresholds.low_max_cpu) return LoadBand::low;
  if (cpu_utilization > thresholds.high_min_cpu) return LoadBand::high;
  return LoadBand::medium;
}

DetectorConfig DetectorConfig::defaults() {
  DetectorConfig cfg;
  cfg.rules.push_back(AlarmRule{{"launch_time:any", "pss:system_server"},
                                Confidence::very_high});
  cfg.degrades_when["launch_time"] = Degrades::up;
  cfg.degrades_when["pss"] = Degrades::up;
  cfg.degrades_when["free_mem"] = Degrades::down;
  cfg.degrades_when["cache_mem"] = Degrades::down;
  return cfg;
}

void DetectorConfig::validate() const {
  if (window < 3) throw ConfigError("detector: window must be >= 3");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("detector: alpha must be in (0,1)");
  if (min_persistence_s < 0.0) throw ConfigError("detector: min_persistence_s must be >= 0");
  if (failure_threshold_increase <= 0.0) {
    throw ConfigError("detector: failure threshold must be > 0");
  }
  for (const AlarmRule& rule : rules) {
    if (rule.required_indicators.empty()) {
      throw ConfigError("detector: alarm rule with empty indicator set");
    }
  }
  for (std::size_t i = 1; i < rules.size(); ++i) {
    if (rules[i].confidence > rules[i - 1].confidence) {
      throw ConfigError("detector: rules must be ordered by confidence descending");
    }
  }
  if (!(load.low_max_cpu <= load.high_min_cpu)) {
    throw ConfigError("detector: load thresholds must satisfy low_max_cpu <= high_min_cpu");
  }
}

std::optional<double> estimate_ttaf(double current_level, double slope,
                                    double failure_threshold) {
  if (!(slope > 0.0)) return std::nullopt;
  return std::max(0.0, (failure_threshold - current_level) / slope);
}

std::optional<AgingAlarm> fuse(std::span<const AgingAlert> alerts,
                               std::span<const AlarmRule> rules, double now) {
  for (const AlarmRule& rule : rules) {
    std::vector<AgingAlert> contributing;
    bool all_matched = true;
    for (const std::string& required : rule.required_indicators) {
      const AgingAlert* matched = nullptr;
      for (const AgingAlert& alert : alerts) {
        if (rule_matches(required, alert.indicator)) {
          matched = &alert;
          break;
        }
      }
      if (!matched) {
        all_matched = false;
        break;
      }
      contributing.push_back(*matched);
    }
    if (all_matched) {
      AgingAlarm alarm;
      alarm.confidence = rule.confidence;
      alarm.contributing_alerts = std::move(contributing);
      alarm.raised_at = now;
      return alarm;
    }
  }
  return std::nullopt;
}

Decision schedule(const AgingAlarm& alarm, const SchedulerPolicy& policy, LoadBand load,
                  double now) {
  switch (policy.mode) {
    case PolicyMode::warn_only:
      return Decision{Decision::Kind::warn, 0.0};
    case PolicyMode::immediate:
      return Decision{Decision::Kind::rejuvenate_now, 0.0};
    case PolicyMode::postpone:
      break;
  }
  if (load <= policy.load_gate) {
    return Decision{Decision::Kind::rejuvenate_now, 0.0};
  }
  if (!alarm.ttaf_s) {
    // No failure horizon: wait for the next low-load window.
    return Decision{Decision::Kind::rejuvenate_at,
                    std::numeric_limits<double>::infinity()};
  }
  const double deadline = alarm.raised_at + *alarm.ttaf_s;
  const double margin = std::max(0.0, policy.safety_margin_s);
  const double at = std::clamp(deadline - margin, now, deadline);
  return Decision{Decision::Kind::rejuvenate_at, at};
}

Decision RejuvenationScheduler::on_alarm(const AgingAlarm& alarm, LoadBand load, double now) {
  Decision decision = schedule(alarm, policy_, load, now);
  if (decision.kind == Decision::Kind::rejuvenate_at) {
    pending_due_ = decision.at;
  }
  return decision;
}

bool RejuvenationScheduler::should_fire(LoadBand load, double now) const {
  if (!pending_due_) return false;
  return load <= policy_.load_gate || now >= *pending_due_;
}

void RejuvenationScheduler::mark_fired() { pending_due_.reset(); }

AgingDetector::AgingDetector(DetectorConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.rules.empty()) {
    cfg_.rules = DetectorConfig::defaults().rules;
  }
  std::stable_sort(cfg_.rules.begin(), cfg_.rules.end(),
                   [](const AlarmRule& a, const AlarmRule& b) {
                     return a.confidence > b.confidence;
                   });
  cfg_.validate();
}

Degrades AgingDetector::degrades_for(const std::string& indicator) const {
  auto it = cfg_.degrades_when.find(indicator);
  if (it != cfg_.degrades_when.end()) return it->second;
  const auto colon = indicator.find(':');
  if (colon != std::string::npos) {
    it = cfg_.degrades_when.find(indicator.substr(0, colon));
    if (it != cfg_.degrades_when.end()) return it->second;
  }
  return Degrades::up;
}

void AgingDetector::emit(double t, const std::string& type,
                         const std::string& detail_json) const {
  if (!sink_) return;
  json event = json::parse(detail_json);
  event["t"] = t;
  event["type"] = type;
  sink_(event.dump());
}

std::optional<double> AgingDetector::alarm_ttaf(const std::vector<AgingAlert>& alerts) const {
  // Prefer the configured indicator (launch time by default); otherwise the
  // most urgent positive estimate.
  const AgingAlert* source = nullptr;
  for (const AgingAlert& alert : alerts) {
    if (alert.indicator.compare(0, cfg_.ttaf_indicator.size(), cfg_.ttaf_indicator) == 0) {
      source = &alert;
      break;
    }
  }
  auto ttaf_of = [&](const AgingAlert& alert) -> std::optional<double> {
    const auto it = states_.find(alert.indicator);
    if (it == states_.end() || !it->second.baseline) return std::nullopt;
    const double current = it->second.last_value - *it->second.baseline;
    if (degrades_for(alert.indicator) == Degrades::up) {
      return estimate_ttaf(current, alert.slope, cfg_.failure_threshold_increase);
    }
    return estimate_ttaf(-current, -alert.slope, cfg_.failure_threshold_increase);
  };
  if (source) return ttaf_of(*source);
  std::optional<double> best;
  for (const AgingAlert& alert : alerts) {
    const auto t = ttaf_of(alert);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

std::optional<AgingAlarm> AgingDetector::ingest(std::string_view indicator, double t,
                                                double value) {
  std::lock_guard<std::mutex> lock(mu_);
  IndicatorState& state = states_[std::string(indicator)];
  state.last_value = value;
  ++state.samples_since_reset;
  state.window.push_back(IndicatorSample{t, value});
  while (state.window.size() > cfg_.window) state.window.pop_front();
  if (state.baseline_buf.size() < cfg_.window) {
    state.baseline_buf.push_back(value);
    if (state.baseline_buf.size() == cfg_.window) {
      state.baseline = median_of(state.baseline_buf);
    }
  }

  if (state.samples_since_reset < cfg_.window) return std::nullopt;

  IndicatorSeries window_series;
  window_series.name = std::string(indicator);
  window_series.samples.assign(state.window.begin(), state.window.end());
  const TrendResult trend = windowed_trend(window_series, cfg_.window, cfg_.alpha);

  const Degrades degrades = degrades_for(window_series.name);
  const bool degrading =
      (degrades == Degrades::up && trend.direction == TrendDirection::increasing) ||
      (degrades == Degrades::down && trend.direction == TrendDirection::decreasing);

  if (!degrading) {
    state.degrade_since.reset();
    if (state.alert) {
      state.alert.reset();
      emit(t, "alert_cleared", json{{"indicator", window_series.name}}.dump());
    }
  } else {
    if (!state.degrade_since) state.degrade_since = t;
    const double persistence = t - *state.degrade_since;
    if (persistence >= cfg_.min_persistence_s) {
      const bool newly_raised = !state.alert.has_value();
      AgingAlert alert;
      alert.indicator = window_series.name;
      alert.first_seen = *state.degrade_since;
      alert.persistence_s = persistence;
      alert.slope = trend.slope;
      alert.p_value = trend.p_value;
      state.alert = alert;
      if (newly_raised) {
        emit(t, "alert",
             json{{"indicator", alert.indicator},
                  {"first_seen", alert.first_seen},
                  {"persistence_s", alert.persistence_s},
                  {"slope", alert.slope},
                  {"p_value", alert.p_value}}
                 .dump());
      }
    }
  }

  std::vector<AgingAlert> alerts;
  for (const auto& [name, st] : states_) {
    if (st.alert) alerts.push_back(*st.alert);
  }
  std::optional<AgingAlarm> fused = fuse(alerts, cfg_.rules, t);
  if (!fused) {
    alarm_active_ = false;
    return std::nullopt;
  }
  if (alarm_active_) return std::nullopt;  // already reported this episode
  alarm_active_ = true;
  fused->ttaf_s = alarm_ttaf(fused->contributing_alerts);

  json contributing = json::array();
  for (const AgingAlert& alert : fused->contributing_alerts) {
    contributing.push_back(alert.indicator);
  }
  json detail{{"confidence", std::string(to_string(fused->confidence))},
              {"contributing", contributing}};
  if (fused->ttaf_s) {
    detail["ttaf_s"] = *fused->ttaf_s;
  } else {
    detail["ttaf_s"] = "none";
  }
  emit(t, "alarm", detail.dump());
  return fused;
}

void AgingDetector::reset(double t) {
  std::lock_guard<std::mutex> lock(mu_);
  states_.clear();
  alarm_active_ = false;
  emit(t, "detector_reset", "{}");
}

std::vector<AgingAlert> AgingDetector::active_alerts() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<AgingAlert> alerts;
  for (const auto& [name, state] : states_) {
    if (state.alert) alerts.push_back(*state.alert);
  }
  return alerts;
}

std::uint64_t AgingDetector::samples_since_reset(std::string_view indicator) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = states_.find(std::string(indicator));
  return it == states_.end() ? 0 : it->second.samples_since_reset;
}

std::optional<double> AgingDetector::baseline(std::string_view indicator) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = states_.find(std::string(indicator));
  return it == states_.end() ? std::nullopt : it->second.baseline;
}

std::vector<AgingAlert> detect(std::span<const IndicatorSeries> series_set, std::size_t window,
                               double alpha, double min_persistence_s) {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = window;
  cfg.alpha = alpha;
  cfg.min_persistence_s = min_persistence_s;
  AgingDetector detector(cfg);

  struct Pending {
    double t;
    std::size_t series_index;
    std::size_t sample_index;
  };
  std::vector<Pending> order;
  for (std::size_t si = 0; si < series_set.size(); ++si) {
    for (std::size_t k = 0; k < series_set[si].samples.size(); ++k) {
      order.push_back(Pending{series_set[si].samples[k].timestamp_s, si, k});
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const Pending& a, const Pending& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.series_index < b.series_index;
  });
  for (const Pending& p : order) {
    const auto& sample = series_set[p.series_index].samples[p.sample_index];
    detector.ingest(series_set[p.series_index].name, sample.timestamp_s, sample.value);
  }
  return detector.active_alerts();
}

DetectorConfig parse_detector_config(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return detail::detector_config_from_json(doc, origin);
}

namespace detail {

DetectorConfig detector_config_from_json(const nlohmann::json& j, std::string_view origin) {
  DetectorConfig cfg = DetectorConfig::defaults();
  try {
    if (j.contains("window")) cfg.window = j["window"].get<std::size_t>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("min_persistence_s")) {
      cfg.min_persistence_s = j["min_persistence_s"].get<double>();
    }
    if (j.contains("failure_threshold_increase_ms")) {
      cfg.failure_threshold_increase = j["failure_threshold_increase_ms"].get<double>();
    }
    if (j.contains("ttaf_indicator")) cfg.ttaf_indicator = j["ttaf_indicator"].get<std::string>();
    if (j.contains("rules")) {
      cfg.rules.clear();
      for (const json& jr : j["rules"]) {
        AlarmRule rule;
        for (const json& name : jr.at("required_indicators")) {
          rule.required_indicators.push_back(name.get<std::string>());
        }
        rule.confidence = confidence_from_string(jr.at("confidence").get<std::string>());
        cfg.rules.push_back(std::move(rule));
      }
      std::stable_sort(cfg.rules.begin(), cfg.rules.end(),
                       [](const AlarmRule& a, const AlarmRule& b) {
                         return a.confidence > b.confidence;
                       });
    }
    if (j.contains("degrades_when")) {
      for (const auto& [key, value] : j["degrades_when"].items()) {
        const std::string s = value.get<std::string>();
        if (s == "up") {
          cfg.degrades_when[key] = Degrades::up;
        } else if (s == "down") {
          cfg.degrades_when[key] = Degrades::down;
        } else {
          throw ConfigError(std::string(origin) +
                            ": degrades_when values must be 'up' or 'down'");
        }
      }
    }
    if (j.contains("load_thresholds")) {
      const json& jl = j["load_thresholds"];
      if (jl.contains("low_max_cpu")) cfg.load.low_max_cpu = jl["low_max_cpu"].get<double>();
      if (jl.contains("high_min_cpu")) cfg.load.high_min_cpu = jl["high_min_cpu"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json detector_config_to_json(const DetectorConfig& cfg) {
  json j;
  j["window"] = cfg.window;
  j["alpha"] = cfg.alpha;
  j["min_persistence_s"] = cfg.min_persistence_s;
  j["failure_threshold_increase_ms"] = cfg.failure_threshold_increase;
  j["ttaf_indicator"] = cfg.ttaf_indicator;
  json rules = json::array();
  for (const AlarmRule& rule : cfg.rules) {
    rules.push_back(json{{"required_indicators", rule.required_indicators},
                         {"confidence", std::string(to_string(rule.confidence))}});
  }
  j["rules"] = std::move(rules);
  json degrades;
  for (const auto& [key, value] : cfg.degrades_when) {
    degrades[key] = value == Degrades::up ? "up" : "down";
  }
  j["degrades_when"] = std::move(degrades);
  j["load_thresholds"] =
      json{{"low_max_cpu", cfg.load.low_max_cpu}, {"high_min_cpu", cfg.load.high_min_cpu}};
  return j;
}

}  // namespace detail

}  // namespace agewatch
