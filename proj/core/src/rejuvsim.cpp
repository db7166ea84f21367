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

#include "agewatch/rejuvsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>

#include <json.hpp>

#include "detector_json.hpp"

namespace agewatch::sim {

namespace {

using nlohmann::json;

// Deterministic RNG: the engine is fully specified by the standard and the
// gaussian is an explicit Box-Muller, so identical seeds give identical
// streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double gaussian(double sd) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_ * sd;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2) * sd;
  }

  std::size_t below(std::size_t n) {
    return std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform01() * n));
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(GestureKind g) {
  switch (g) {
    case GestureKind::app_switch: return "app_switch";
    case GestureKind::navigation: return "navigation";
    case GestureKind::single_touch: return "single_touch";
    case GestureKind::swipe: return "swipe";
    case GestureKind::multi_touch: return "multi_touch";
  }
  return "app_switch";
}

SimSpec SimSpec::defaults() {
  SimSpec spec;
  spec.services = {
      ServiceSpec{"activity_manager",
                  true,
                  {{"java.util.HashMap", "svc.am.ReceiverRecord", 0.50, 512, true},
                   {"java.util.ArrayList", "svc.am.ProcessChange", 0.30, 256, true},
                   {"java.util.LinkedList", "svc.am.ProcStatsEntry", 0.20, 128, true}}},
      ServiceSpec{"wifi",
                  true,
                  {{"java.util.ArrayList", "svc.wifi.ScanResult", 0.25, 384, true},
                   {"java.util.Hashtable", "svc.wifi.NetworkRecord", 0.10, 256, true}}},
      ServiceSpec{"power_manager",
                  true,
                  {{"java.util.Vector", "svc.power.WakelockLog", 0.15, 128, true},
                   {"java.util.HashMap", "svc.power.SuspendStat", 0.08, 96, true}}},
      // Bloats too, but only a full reboot cleans it.
      ServiceSpec{"package_manager",
                  false,
                  {{"java.util.HashMap", "svc.pkg.IntentCacheEntry", 0.30, 256, true}}},
  };
  spec.workload.apps = {"search_app", "social_app", "browser_app", "video_app", "weather_app"};
  spec.launch_time.base_lt_ms = {{"search_app", 90.0},
                                 {"social_app", 110.0},
                                 {"browser_app", 100.0},
                                 {"video_app", 130.0},
                                 {"weather_app", 80.0}};
  spec.launch_time.sensitivity = {{"search_app", 1.30},
                                  {"social_app", 0.75},
                                  {"browser_app", 0.33},
                                  {"video_app", 1.70},
                                  {"weather_app", 1.00}};
  spec.load_profile = {{0.0, 0.5}};
  spec.experiments = {
      ExperimentSpec{"EXP1", {}, PolicyMode::warn_only, 600.0, LoadBand::low, std::nullopt, true},
      ExperimentSpec{"EXP2", {"activity_manager"}, PolicyMode::immediate, 600.0, LoadBand::low,
                     std::nullopt, false},
      ExperimentSpec{"EXP3", {"activity_manager", "wifi"}, PolicyMode::immediate, 600.0,
                     LoadBand::low, std::nullopt, false},
      ExperimentSpec{"EXP4", {"activity_manager", "wifi", "power_manager"},
                     PolicyMode::immediate, 600.0, LoadBand::low, std::nullopt, false},
      ExperimentSpec{"EXP5", {}, PolicyMode::warn_only, 600.0, LoadBand::low, 5400.0, false},
  };
  return spec;
}

void SimSpec::validate() const {
  if (services.empty()) throw ConfigError("sim: need at least one service");
  if (workload.apps.empty()) throw ConfigError("sim: need at least one app");
  if (workload.duration_s <= 0) throw ConfigError("sim: duration_s must be > 0");
  if (workload.launch_kill_period_s <= 0 || workload.gesture_period_s <= 0) {
    throw ConfigError("sim: workload periods must be > 0");
  }
  if (snapshot_period_s <= 0 || pss_period_s <= 0) {
    throw ConfigError("sim: sampling periods must be > 0");
  }
  if (pause_duration_s < 0) throw ConfigError("sim: pause_duration_s must be >= 0");
  if (!(flush_fraction > 0.0 && flush_fraction <= 1.0)) {
    throw ConfigError("sim: flush_fraction must be in (0,1]");
  }
  std::set<std::string> service_names;
  std::set<std::string> rejuvenable;
  for (const ServiceSpec& service : services) {
    if (service.name.empty()) throw ConfigError("sim: service with empty name");
    if (!service_names.insert(service.name).second) {
      throw ConfigError("sim: duplicate service name '" + service.name + "'");
    }
    if (service.rejuvenable) rejuvenable.insert(service.name);
    for (const ContainerSpec& container : service.containers) {
      if (container.growth_rate_per_s < 0) {
        throw ConfigError("sim: negative growth rate in service '" + service.name + "'");
      }
      if (container.element_size == 0) {
        throw ConfigError("sim: zero element size in service '" + service.name + "'");
      }
    }
  }
  std::set<std::string> exp_ids;
  for (const ExperimentSpec& exp : experiments) {
    if (exp.id.empty()) throw ConfigError("sim: experiment with empty id");
    if (!exp_ids.insert(exp.id).second) {
      throw ConfigError("sim: duplicate experiment id '" + exp.id + "'");
    }
    for (const std::string& name : exp.rejuvenated_services) {
      if (service_names.count(name) == 0) {
        throw ConfigError("sim: experiment '" + exp.id + "' rejuvenates unknown service '" +
                          name + "'");
      }
      if (rejuvenable.count(name) == 0) {
        throw ConfigError("sim: experiment '" + exp.id + "' targets service '" + name +
                          "' which is not registered as rejuvenable");
      }
    }
    if (exp.policy != PolicyMode::warn_only && exp.rejuvenated_services.empty()) {
      throw ConfigError("sim: experiment '" + exp.id +
                        "' has an acting policy but no services to rejuvenate");
    }
    if (exp.reboot_period_s && *exp.reboot_period_s <= 0) {
      throw ConfigError("sim: experiment '" + exp.id + "' has non-positive reboot period");
    }
  }
  detector.validate();
}

SimSpec parse_sim_spec(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  SimSpec spec;
  try {
    if (doc.contains("process")) spec.process_name = doc["process"].get<std::string>();
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("services")) {
      spec.services.clear();
      for (const json& js : doc["services"]) {
        ServiceSpec service;
        service.name = js.at("name").get<std::string>();
        if (js.contains("rejuvenable")) service.rejuvenable = js["rejuvenable"].get<bool>();
        for (const json& jc : js.value("containers", json::array())) {
          ContainerSpec container;
          if (jc.contains("class")) container.class_name = jc["class"].get<std::string>();
          if (jc.contains("element_class")) {
            container.element_class = jc["element_class"].get<std::string>();
          }
          container.growth_rate_per_s = jc.value("growth_rate_per_s", 0.0);
          container.element_size = jc.value("element_size", std::uint64_t{64});
          container.flush_on_rejuvenate = jc.value("flush_on_rejuvenate", true);
          service.containers.push_back(std::move(container));
        }
        spec.services.push_back(std::move(service));
      }
    } else {
      spec.services = SimSpec::defaults().services;
    }
    if (doc.contains("workload")) {
      const json& jw = doc["workload"];
      if (jw.contains("apps")) {
        spec.workload.apps.clear();
        for (const json& a : jw["apps"]) spec.workload.apps.push_back(a.get<std::string>());
      } else {
        spec.workload.apps = SimSpec::defaults().workload.apps;
      }
      spec.workload.duration_s = jw.value("duration_s", spec.workload.duration_s);
      spec.workload.launch_kill_period_s =
          jw.value("launch_kill_period_s", spec.workload.launch_kill_period_s);
      spec.workload.gesture_period_s =
          jw.value("gesture_period_s", spec.workload.gesture_period_s);
    } else {
      spec.workload = SimSpec::defaults().workload;
    }
    {
      const SimSpec def = SimSpec::defaults();
      spec.launch_time = def.launch_time;
      if (doc.contains("launch_time_model")) {
        const json& jm = doc["launch_time_model"];
        if (jm.contains("base_lt_ms")) {
          spec.launch_time.base_lt_ms.clear();
          for (const auto& [key, value] : jm["base_lt_ms"].items()) {
            spec.launch_time.base_lt_ms[key] = value.get<double>();
          }
        }
        if (jm.contains("sensitivity")) {
          spec.launch_time.sensitivity.clear();
          for (const auto& [key, value] : jm["sensitivity"].items()) {
            spec.launch_time.sensitivity[key] = value.get<double>();
          }
        }
        spec.launch_time.bloat_coefficient_ms_per_byte =
            jm.value("bloat_coefficient_ms_per_byte",
                     spec.launch_time.bloat_coefficient_ms_per_byte);
        spec.launch_time.noise_sd_ms = jm.value("noise_sd_ms", spec.launch_time.noise_sd_ms);
      }
    }
    if (doc.contains("detector")) {
      spec.detector = detail::detector_config_from_json(doc["detector"], origin);
    }
    if (doc.contains("load_profile")) {
      spec.load_profile.clear();
      for (const json& jp : doc["load_profile"]) {
        spec.load_profile.push_back(LoadPoint{jp.at("t").get<double>(), jp.at("cpu").get<double>()});
      }
    } else {
      spec.load_profile = {{0.0, 0.5}};
    }
    if (doc.contains("sampling")) {
      const json& js = doc["sampling"];
      spec.snapshot_period_s = js.value("snapshot_period_s", spec.snapshot_period_s);
      spec.pss_period_s = js.value("pss_period_s", spec.pss_period_s);
    }
    spec.pause_duration_s = doc.value("pause_duration_s", spec.pause_duration_s);
    spec.flush_fraction = doc.value("flush_fraction", spec.flush_fraction);
    spec.base_pss_bytes = doc.value("base_pss_bytes", spec.base_pss_bytes);
    spec.total_mem_bytes = doc.value("total_mem_bytes", spec.total_mem_bytes);
    spec.pss_noise_sd_bytes = doc.value("pss_noise_sd_bytes", spec.pss_noise_sd_bytes);
    if (doc.contains("experiments")) {
      spec.experiments.clear();
      for (const json& je : doc["experiments"]) {
        ExperimentSpec exp;
        exp.id = je.at("id").get<std::string>();
        for (const json& s : je.value("rejuvenated_services", json::array())) {
          exp.rejuvenated_services.insert(s.get<std::string>());
        }
        if (je.contains("policy")) exp.policy = policy_from_string(je["policy"].get<std::string>());
        exp.safety_margin_s = je.value("safety_margin_s", exp.safety_margin_s);
        if (je.contains("load_gate")) {
          const std::string gate = je["load_gate"].get<std::string>();
          if (gate == "low") {
            exp.load_gate = LoadBand::low;
          } else if (gate == "medium") {
            exp.load_gate = LoadBand::medium;
          } else if (gate == "high") {
            exp.load_gate = LoadBand::high;
          } else {
            throw ConfigError(std::string(origin) + ": unknown load gate '" + gate + "'");
          }
        }
        if (je.contains("reboot_period_s") && !je["reboot_period_s"].is_null()) {
          exp.reboot_period_s = je["reboot_period_s"].get<double>();
        }
        exp.emit_snapshots = je.value("emit_snapshots", false);
        spec.experiments.push_back(std::move(exp));
      }
    } else {
      spec.experiments = SimSpec::defaults().experiments;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  spec.validate();
  return spec;
}

SimSpec load_sim_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open simulation spec: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sim_spec(buf.str(), path.string());
}

std::string serialize_sim_spec(const SimSpec& spec) {
  json doc;
  doc["process"] = spec.process_name;
  doc["seed"] = spec.seed;
  json services = json::array();
  for (const ServiceSpec& service : spec.services) {
    json js;
    js["name"] = service.name;
    js["rejuvenable"] = service.rejuvenable;
    json containers = json::array();
    for (const ContainerSpec& container : service.containers) {
      containers.push_back(json{{"class", container.class_name},
                                {"element_class", container.element_class},
                                {"growth_rate_per_s", container.growth_rate_per_s},
                                {"element_size", container.element_size},
                                {"flush_on_rejuvenate", container.flush_on_rejuvenate}});
    }
    js["containers"] = std::move(containers);
    services.push_back(std::move(js));
  }
  doc["services"] = std::move(services);
  doc["workload"] = json{{"apps", spec.workload.apps},
                         {"duration_s", spec.workload.duration_s},
                         {"launch_kill_period_s", spec.workload.launch_kill_period_s},
                         {"gesture_period_s", spec.workload.gesture_period_s}};
  doc["launch_time_model"] =
      json{{"base_lt_ms", spec.launch_time.base_lt_ms},
           {"sensitivity", spec.launch_time.sensitivity},
           {"bloat_coefficient_ms_per_byte", spec.launch_time.bloat_coefficient_ms_per_byte},
           {"noise_sd_ms", spec.launch_time.noise_sd_ms}};
  doc["detector"] = detail::detector_config_to_json(spec.detector);
  json profile = json::array();
  for (const LoadPoint& p : spec.load_profile) {
    profile.push_back(json{{"t", p.t}, {"cpu", p.cpu}});
  }
  doc["load_profile"] = std::move(profile);
  doc["sampling"] =
      json{{"snapshot_period_s", spec.snapshot_period_s}, {"pss_period_s", spec.pss_period_s}};
  doc["pause_duration_s"] = spec.pause_duration_s;
  doc["flush_fraction"] = spec.flush_fraction;
  doc["base_pss_bytes"] = spec.base_pss_bytes;
  doc["total_mem_bytes"] = spec.total_mem_bytes;
  doc["pss_noise_sd_bytes"] = spec.pss_noise_sd_bytes;
  json experiments = json::array();
  for (const ExperimentSpec& exp : spec.experiments) {
    json je;
    je["id"] = exp.id;
    je["rejuvenated_services"] = exp.rejuvenated_services;
    je["policy"] = std::string(to_string(exp.policy));
    je["safety_margin_s"] = exp.safety_margin_s;
    je["load_gate"] = std::string(to_string(exp.load_gate));
    if (exp.reboot_period_s) je["reboot_period_s"] = *exp.reboot_period_s;
    je["emit_snapshots"] = exp.emit_snapshots;
    experiments.push_back(std::move(je));
  }
  doc["experiments"] = std::move(experiments);
  return doc.dump(2);
}

const IndicatorSeries* SimTrace::find_indicator(std::string_view name) const {
  for (const IndicatorSeries& series : indicators) {
    if (series.name == name) return &series;
  }
  return nullptr;
}

// --- ServiceRuntime --------------------------------------------------------

ServiceRuntime::ServiceRuntime(ServiceSpec spec) : spec_(std::move(spec)) {
  elements_.resize(spec_.containers.size());
  fill_accum_.resize(spec_.containers.size(), 0.0);
}

std::vector<std::uint64_t> ServiceRuntime::element_counts() const {
  std::vector<std::uint64_t> counts;
  counts.reserve(elements_.size());
  for (const auto& container : elements_) counts.push_back(container.size());
  return counts;
}

void ServiceRuntime::advance(double t, std::uint64_t* next_element_id) {
  const double dt = t - last_growth_t_;
  if (dt <= 0.0) return;
  last_growth_t_ = t;
  for (std::size_t i = 0; i < spec_.containers.size(); ++i) {
    fill_accum_[i] += spec_.containers[i].growth_rate_per_s * dt;
    while (fill_accum_[i] >= 1.0) {
      fill_accum_[i] -= 1.0;
      elements_[i].push_back(Element{(*next_element_id)++, t});
    }
  }
}

bool ServiceRuntime::request(double t, std::uint64_t request_id) {
  (void)t;
  ++arrived_;
  if (paused_) {
    queue_.push_back(request_id);
    return false;
  }
  ++processed_;
  return true;
}

std::uint64_t ServiceRuntime::rejuvenate(double t, double pause_duration_s,
                                         double flush_fraction) {
  if (!spec_.rejuvenable) {
    throw NotRejuvenable("service '" + spec_.name + "' is not registered as rejuvenable");
  }
  if (paused_) {
    throw InternalError("service '" + spec_.name + "' rejuvenated while already paused");
  }
  paused_ = true;
  pause_end_ = t + pause_duration_s;
  std::uint64_t flushed = 0;
  for (std::size_t i = 0; i < spec_.containers.size(); ++i) {
    if (!spec_.containers[i].flush_on_rejuvenate) continue;
    auto& elements = elements_[i];
    const std::size_t drop =
        flush_fraction >= 1.0
            ? elements.size()
            : static_cast<std::size_t>(flush_fraction * static_cast<double>(elements.size()));
    // Oldest first: elements are kept in creation order.
    elements.erase(elements.begin(), elements.begin() + static_cast<std::ptrdiff_t>(drop));
    flushed += drop;
  }
  return flushed;
}

std::uint64_t ServiceRuntime::flush_all() {
  std::uint64_t flushed = 0;
  for (auto& elements : elements_) {
    flushed += elements.size();
    elements.clear();
  }
  for (double& accum : fill_accum_) accum = 0.0;
  return flushed;
}

std::vector<std::uint64_t> ServiceRuntime::resume(double t) {
  (void)t;
  paused_ = false;
  std::vector<std::uint64_t> drained(queue_.begin(), queue_.end());
  processed_ += queue_.size();
  queue_.clear();
  return drained;
}

std::uint64_t ServiceRuntime::bloat_bytes() const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    total += elements_[i].size() * spec_.containers[i].element_size;
  }
  return total;
}

// --- Simulator --------------------------------------------------------------

namespace {

enum class EventKind : int {
  launch,
  gesture,
  pss_sample,
  snapshot,
  load_change,
  resume_service,
  reboot,
  due_rejuvenation,
};

struct Event {
  double t;
  std::uint64_t seq;
  EventKind kind;
  std::size_t aux;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

class Simulator {
 public:
  Simulator(const SimSpec& spec, const ExperimentSpec& exp, std::uint64_t seed)
      : spec_(spec),
        exp_(exp),
        gesture_rng_(splitmix64(seed ^ 0x6765737475726573ULL)),
        lt_rng_(splitmix64(seed ^ 0x6c61756e63686573ULL)),
        pss_rng_(splitmix64(seed ^ 0x7073735f6e6f6973ULL)),
        detector_(spec.detector),
        scheduler_(SchedulerPolicy{exp.policy, exp.safety_margin_s, exp.load_gate}) {
    for (const ServiceSpec& service : spec_.services) {
      services_.emplace_back(service);
    }
    trace_.experiment_id = exp_.id;
    trace_.experiment = exp_;
    trace_.duration_s = spec_.workload.duration_s;
    detector_.set_event_sink([this](const std::string& line) { trace_.events.push_back(line); });
  }

  SimTrace run() {
    const double duration = spec_.workload.duration_s;
    schedule(0.0, EventKind::launch, 0);
    if (spec_.workload.gesture_period_s <= duration) {
      schedule(spec_.workload.gesture_period_s, EventKind::gesture, 0);
    }
    if (spec_.pss_period_s <= duration) schedule(spec_.pss_period_s, EventKind::pss_sample, 0);
    if (exp_.emit_snapshots && spec_.snapshot_period_s <= duration) {
      schedule(spec_.snapshot_period_s, EventKind::snapshot, 0);
    }
    for (const LoadPoint& point : spec_.load_profile) {
      if (point.t <= 0.0) {
        cpu_utilization_ = point.cpu;
      } else if (point.t <= duration) {
        schedule(point.t, EventKind::load_change, 0);
      }
    }
    if (exp_.reboot_period_s && *exp_.reboot_period_s <= duration) {
      schedule(*exp_.reboot_period_s, EventKind::reboot, 0);
    }

    while (!queue_.empty()) {
      const Event event = queue_.top();
      queue_.pop();
      now_ = event.t;
      advance_growth();
      dispatch(event);
      // A pending postponed rejuvenation fires as soon as load allows or the
      // due time passes, whichever the current event reveals first.
      if (scheduler_.should_fire(current_load(), now_)) {
        perform_rejuvenation();
      }
      record_ledger();
    }

    finish_trace();
    return std::move(trace_);
  }

 private:
  void schedule(double t, EventKind kind, std::size_t aux) {
    queue_.push(Event{t, seq_++, kind, aux});
  }

  LoadBand current_load() const { return classify_load(cpu_utilization_, spec_.detector.load); }

  void advance_growth() {
    for (ServiceRuntime& service : services_) {
      service.advance(now_, &next_element_id_);
    }
  }

  void log(json event) {
    event["t"] = now_;
    trace_.events.push_back(event.dump());
  }

  void add_sample(const std::string& indicator, double value) {
    auto [it, inserted] = indicator_index_.emplace(indicator, trace_.indicators.size());
    if (inserted) {
      trace_.indicators.push_back(IndicatorSeries{indicator, {}});
    }
    trace_.indicators[it->second].samples.push_back(IndicatorSample{now_, value});
    if (auto alarm = detector_.ingest(indicator, now_, value)) {
      handle_alarm(*alarm);
    }
  }

  void issue_request(std::size_t service_index) {
    ServiceRuntime& service = services_[service_index];
    const std::uint64_t id = next_request_id_++;
    if (service.request(now_, id)) {
      trace_.processed_requests.push_back(ProcessedRequest{service_index, now_});
    } else {
      log(json{{"type", "request_queued"},
               {"service", service.spec().name},
               {"request_id", id}});
    }
  }

  void dispatch(const Event& event) {
    switch (event.kind) {
      case EventKind::launch: {
        const auto& apps = spec_.workload.apps;
        const std::string& app = apps[launch_counter_ % apps.size()];
        ++launch_counter_;
        issue_request(0);  // the first service launches activities
        sample_launch_time(app);
        const double next = now_ + spec_.workload.launch_kill_period_s;
        if (next <= spec_.workload.duration_s) schedule(next, EventKind::launch, 0);
        break;
      }
      case EventKind::gesture: {
        const std::size_t kind = gesture_rng_.below(kGestureKinds);
        issue_request(kind % services_.size());
        const double next = now_ + spec_.workload.gesture_period_s;
        if (next <= spec_.workload.duration_s) schedule(next, EventKind::gesture, 0);
        break;
      }
      case EventKind::pss_sample: {
        const double bloat = static_cast<double>(total_bloat_bytes());
        const double pss = spec_.base_pss_bytes + bloat + pss_rng_.gaussian(spec_.pss_noise_sd_bytes);
        add_sample("pss:" + spec_.process_name, pss);
        add_sample("free_mem", spec_.total_mem_bytes - pss);
        const double next = now_ + spec_.pss_period_s;
        if (next <= spec_.workload.duration_s) schedule(next, EventKind::pss_sample, 0);
        break;
      }
      case EventKind::snapshot: {
        emit_snapshot();
        const double next = now_ + spec_.snapshot_period_s;
        if (next <= spec_.workload.duration_s) schedule(next, EventKind::snapshot, 0);
        break;
      }
      case EventKind::load_change: {
        for (const LoadPoint& point : spec_.load_profile) {
          if (point.t <= now_) cpu_utilization_ = point.cpu;
        }
        log(json{{"type", "load_change"},
                 {"cpu", cpu_utilization_},
                 {"band", std::string(to_string(current_load()))}});
        break;
      }
      case EventKind::resume_service: {
        ServiceRuntime& service = services_[event.aux];
        const std::vector<std::uint64_t> drained = service.resume(now_);
        for (std::size_t i = 0; i < drained.size(); ++i) {
          trace_.processed_requests.push_back(ProcessedRequest{event.aux, now_});
        }
        log(json{{"type", "service_resumed"},
                 {"service", service.spec().name},
                 {"drained", drained}});
        break;
      }
      case EventKind::reboot: {
        perform_reboot();
        const double next = now_ + *exp_.reboot_period_s;
        if (next <= spec_.workload.duration_s) schedule(next, EventKind::reboot, 0);
        break;
      }
      case EventKind::due_rejuvenation: {
        if (scheduler_.pending_due() && now_ >= *scheduler_.pending_due()) {
          perform_rejuvenation();
        }
        break;
      }
    }
  }

  void sample_launch_time(const std::string& app) {
    const auto base_it = spec_.launch_time.base_lt_ms.find(app);
    const double base = base_it == spec_.launch_time.base_lt_ms.end() ? 100.0 : base_it->second;
    const auto sens_it = spec_.launch_time.sensitivity.find(app);
    const double sensitivity = sens_it == spec_.launch_time.sensitivity.end() ? 1.0 : sens_it->second;
    const double bloat = static_cast<double>(total_bloat_bytes());
    double lt = base + sensitivity * spec_.launch_time.bloat_coefficient_ms_per_byte * bloat +
                lt_rng_.gaussian(spec_.launch_time.noise_sd_ms);
    lt = std::max(lt, base / 2.0);
    add_sample("launch_time:" + app, lt);
  }

  std::uint64_t total_bloat_bytes() const {
    std::uint64_t total = 0;
    for (const ServiceRuntime& service : services_) total += service.bloat_bytes();
    return total;
  }

  void handle_alarm(const AgingAlarm& alarm) {
    const Decision decision = scheduler_.on_alarm(alarm, current_load(), now_);
    json detail{{"type", "decision"},
                {"policy", std::string(to_string(exp_.policy))},
                {"confidence", std::string(to_string(alarm.confidence))}};
    switch (decision.kind) {
      case Decision::Kind::warn:
        detail["decision"] = "warn";
        break;
      case Decision::Kind::rejuvenate_now:
        detail["decision"] = "rejuvenate_now";
        break;
      case Decision::Kind::rejuvenate_at:
        detail["decision"] = "rejuvenate_at";
        detail["at"] = std::isfinite(decision.at) ? json(decision.at) : json("low_load_window");
        break;
    }
    log(std::move(detail));
    if (decision.kind == Decision::Kind::rejuvenate_now) {
      perform_rejuvenation();
    } else if (decision.kind == Decision::Kind::rejuvenate_at && std::isfinite(decision.at) &&
               decision.at <= spec_.workload.duration_s) {
      schedule(decision.at, EventKind::due_rejuvenation, 0);
    }
  }

  void perform_rejuvenation() {
    scheduler_.mark_fired();
    if (exp_.rejuvenated_services.empty()) return;
    json flushed = json::object();
    std::uint64_t freed_bytes_before = total_bloat_bytes();
    for (std::size_t i = 0; i < services_.size(); ++i) {
      ServiceRuntime& service = services_[i];
      if (exp_.rejuvenated_services.count(service.spec().name) == 0) continue;
      if (service.paused()) continue;  // still inside a previous pause
      const std::uint64_t count =
          service.rejuvenate(now_, spec_.pause_duration_s, spec_.flush_fraction);
      flushed[service.spec().name] = count;
      trace_.pauses.push_back(
          PauseInterval{service.spec().name, i, now_, service.pause_end()});
      schedule(service.pause_end(), EventKind::resume_service, i);
    }
    const std::uint64_t freed = freed_bytes_before - total_bloat_bytes();
    trace_.rejuvenation_times.push_back(now_);
    log(json{{"type", "rejuvenation"},
             {"services", flushed},
             {"freed_bytes", freed},
             {"pause_s", spec_.pause_duration_s}});
    // Healthy state starts over: pre-rejuvenation samples must not feed
    // later alarms.
    detector_.reset(now_);
  }

  void perform_reboot() {
    // Drain any in-flight pauses first so no request is ever lost.
    for (std::size_t si = 0; si < services_.size(); ++si) {
      ServiceRuntime& service = services_[si];
      if (service.paused()) {
        const auto drained = service.resume(now_);
        for (std::size_t i = 0; i < drained.size(); ++i) {
          trace_.processed_requests.push_back(ProcessedRequest{si, now_});
        }
      }
    }
    std::uint64_t flushed = 0;
    for (ServiceRuntime& service : services_) flushed += service.flush_all();
    trace_.reboot_times.push_back(now_);
    log(json{{"type", "reboot"}, {"flushed_elements", flushed}});
    detector_.reset(now_);
    scheduler_.mark_fired();
  }

  void emit_snapshot() {
    HeapSnapshot snap;
    ++snapshot_counter_;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "snap_%05llu",
                  static_cast<unsigned long long>(snapshot_counter_));
    snap.snapshot_id = idbuf;
    snap.timestamp_s = now_;
    snap.process_name = spec_.process_name;

    const ObjectId root_id = 1;
    snap.gc_roots.push_back(root_id);
    ObjectRecord root;
    root.id = root_id;
    root.class_name = "svc.ProcessRoot";
    root.shallow_size = 64;

    ObjectId service_base = 10;
    ObjectId container_base = 1000;
    std::vector<ObjectRecord> records;
    for (std::size_t si = 0; si < services_.size(); ++si) {
      const ServiceRuntime& service = services_[si];
      ObjectRecord srec;
      srec.id = service_base + si;
      srec.class_name = "svc." + service.spec().name;
      srec.shallow_size = 128;
      root.refs.push_back(srec.id);
      const auto& containers = service.containers();
      for (std::size_t ci = 0; ci < containers.size(); ++ci) {
        ObjectRecord crec;
        crec.id = container_base + si * 100 + ci;
        crec.class_name = service.spec().containers[ci].class_name;
        crec.shallow_size = 48;
        srec.refs.push_back(crec.id);
        for (const ServiceRuntime::Element& element : containers[ci]) {
          ObjectRecord erec;
          erec.id = element.id;
          erec.class_name = service.spec().containers[ci].element_class;
          erec.shallow_size = service.spec().containers[ci].element_size;
          erec.created_at_s = element.created_at;
          erec.last_access_s = element.created_at;  // written once, never read back
          crec.refs.push_back(erec.id);
          records.push_back(std::move(erec));
        }
        records.push_back(std::move(crec));
      }
      records.push_back(std::move(srec));
    }
    snap.objects.push_back(std::move(root));
    for (ObjectRecord& rec : records) snap.objects.push_back(std::move(rec));
    snap.finalize();
    log(json{{"type", "snapshot"},
             {"snapshot_id", snap.snapshot_id},
             {"objects", snap.objects.size()},
             {"bloat_bytes", total_bloat_bytes()}});
    trace_.snapshots.push_back(std::move(snap));
  }

  void record_ledger() {
    RequestLedgerEntry entry;
    entry.t = now_;
    for (const ServiceRuntime& service : services_) {
      entry.arrived += service.arrived();
      entry.processed += service.processed();
      entry.queued += service.queued();
    }
    if (entry.processed + entry.queued != entry.arrived) {
      throw InternalError("request conservation violated at t=" + std::to_string(now_));
    }
    trace_.request_ledger.push_back(entry);
  }

  void finish_trace() {
    log(json{{"type", "run_end"},
             {"rejuvenations", trace_.rejuvenation_times.size()},
             {"reboots", trace_.reboot_times.size()}});
  }

  const SimSpec& spec_;
  const ExperimentSpec& exp_;
  Rng gesture_rng_;
  Rng lt_rng_;
  Rng pss_rng_;
  AgingDetector detector_;
  RejuvenationScheduler scheduler_;
  std::vector<ServiceRuntime> services_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  double cpu_utilization_ = 0.5;
  std::uint64_t next_element_id_ = 1000000;
  std::uint64_t next_request_id_ = 1;
  std::uint64_t launch_counter_ = 0;
  std::uint64_t snapshot_counter_ = 0;
  std::unordered_map<std::string, std::size_t> indicator_index_;
  SimTrace trace_;
};

}  // namespace

SimTrace run(const SimSpec& spec, const ExperimentSpec& experiment, std::uint64_t seed) {
  spec.validate();
  Simulator simulator(spec, experiment, seed);
  return simulator.run();
}

std::vector<SimTrace> run_all(const SimSpec& spec) {
  spec.validate();
  std::vector<SimTrace> traces;
  traces.reserve(spec.experiments.size());
  for (const ExperimentSpec& exp : spec.experiments) {
    traces.push_back(run(spec, exp, spec.seed));
  }
  return traces;
}

}  // namespace agewatch::sim
