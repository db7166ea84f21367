#include <doctest.h>

#include <cmath>

#include "agewatch/detector.hpp"

#include <json.hpp>

using namespace agewatch;

namespace {

AgingAlert alert_for(const char* indicator, double slope = 0.01) {
  AgingAlert a;
  a.indicator = indicator;
  a.slope = slope;
  a.p_value = 0.001;
  return a;
}

std::vector<AlarmRule> default_rules() { return DetectorConfig::defaults().rules; }

}  // namespace

TEST_CASE("estimate_ttaf basics") {
  // slope 0.003 ms/s toward a 200 ms increase from a clean state
  auto ttaf = estimate_ttaf(0.0, 0.003, 200.0);
  REQUIRE(ttaf.has_value());
  CHECK(*ttaf == doctest::Approx(66666.6666667).epsilon(1e-9));
  CHECK(*ttaf / 3600.0 == doctest::Approx(18.5185).epsilon(1e-4));

  CHECK_FALSE(estimate_ttaf(0.0, 0.0, 200.0).has_value());
  CHECK_FALSE(estimate_ttaf(0.0, -0.1, 200.0).has_value());

  // partially aged: accumulated increase shortens the horizon
  auto partial = estimate_ttaf(50.0, 0.003, 200.0);
  REQUIRE(partial.has_value());
  CHECK(*partial == doctest::Approx(50000.0));

  // already failed: clamped at zero
  auto failed = estimate_ttaf(250.0, 0.003, 200.0);
  REQUIRE(failed.has_value());
  CHECK(*failed == 0.0);
}

TEST_CASE("estimate_ttaf is inversely proportional to the slope") {
  for (double slope : {0.001, 0.003, 0.02, 1.5}) {
    const auto one = estimate_ttaf(10.0, slope, 200.0);
    const auto two = estimate_ttaf(10.0, 2.0 * slope, 200.0);
    REQUIRE(one.has_value());
    REQUIRE(two.has_value());
    CHECK(*two == doctest::Approx(*one / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("fuse matches the documented joint rule") {
  const auto rules = default_rules();
  std::vector<AgingAlert> alerts = {alert_for("launch_time:video_app"),
                                    alert_for("pss:system_server")};
  const auto alarm = fuse(alerts, rules, 100.0);
  REQUIRE(alarm.has_value());
  CHECK(alarm->confidence == Confidence::very_high);
  CHECK(alarm->raised_at == 100.0);
  CHECK(alarm->contributing_alerts.size() == 2);
}

TEST_CASE("fuse: single alert matches no rule") {
  const auto rules = default_rules();
  std::vector<AgingAlert> alerts = {alert_for("launch_time:video_app")};
  CHECK_FALSE(fuse(alerts, rules, 0.0).has_value());
}

TEST_CASE("fuse picks the highest-confidence matching rule") {
  std::vector<AlarmRule> rules = {
      AlarmRule{{"launch_time:any", "pss:system_server"}, Confidence::very_high},
      AlarmRule{{"free_mem"}, Confidence::medium},
  };
  std::vector<AgingAlert> alerts = {alert_for("free_mem", -0.5),
                                    alert_for("launch_time:a"),
                                    alert_for("pss:system_server")};
  const auto alarm = fuse(alerts, rules, 0.0);
  REQUIRE(alarm.has_value());
  CHECK(alarm->confidence == Confidence::very_high);
}

TEST_CASE("fuse is monotone: adding alerts never lowers confidence") {
  std::vector<AlarmRule> rules = {
      AlarmRule{{"launch_time:any", "pss:system_server"}, Confidence::very_high},
      AlarmRule{{"pss:system_server"}, Confidence::low},
  };
  std::vector<AgingAlert> alerts = {alert_for("pss:system_server")};
  const auto small = fuse(alerts, rules, 0.0);
  REQUIRE(small.has_value());
  alerts.push_back(alert_for("launch_time:x"));
  const auto big = fuse(alerts, rules, 0.0);
  REQUIRE(big.has_value());
  CHECK(big->confidence >= small->confidence);
}

TEST_CASE("schedule applies the policy") {
  AgingAlarm alarm;
  alarm.raised_at = 1000.0;
  alarm.ttaf_s = 10000.0;

  SUBCASE("warn_only warns") {
    SchedulerPolicy policy{PolicyMode::warn_only, 2000.0, LoadBand::low};
    CHECK(schedule(alarm, policy, LoadBand::high, 1000.0).kind == Decision::Kind::warn);
  }
  SUBCASE("immediate fires regardless of load") {
    SchedulerPolicy policy{PolicyMode::immediate, 2000.0, LoadBand::low};
    CHECK(schedule(alarm, policy, LoadBand::high, 1000.0).kind ==
          Decision::Kind::rejuvenate_now);
  }
  SUBCASE("postpone under sustained high load targets ttaf minus margin") {
    SchedulerPolicy policy{PolicyMode::postpone, 2000.0, LoadBand::low};
    const auto d = schedule(alarm, policy, LoadBand::high, 1000.0);
    CHECK(d.kind == Decision::Kind::rejuvenate_at);
    CHECK(d.at == doctest::Approx(1000.0 + 10000.0 - 2000.0));
  }
  SUBCASE("postpone fires immediately when load is already inside the gate") {
    SchedulerPolicy policy{PolicyMode::postpone, 2000.0, LoadBand::low};
    CHECK(schedule(alarm, policy, LoadBand::low, 1000.0).kind ==
          Decision::Kind::rejuvenate_now);
  }
  SUBCASE("postpone never schedules past the failure time") {
    SchedulerPolicy policy{PolicyMode::postpone, -5.0, LoadBand::low};
    const auto d = schedule(alarm, policy, LoadBand::high, 1000.0);
    CHECK(d.at <= alarm.raised_at + *alarm.ttaf_s);
  }
}

TEST_CASE("stateful scheduler fires on the load drop, not the due time") {
  AgingAlarm alarm;
  alarm.raised_at = 0.0;
  alarm.ttaf_s = 10000.0;
  RejuvenationScheduler scheduler(SchedulerPolicy{PolicyMode::postpone, 2000.0, LoadBand::low});
  const auto d = scheduler.on_alarm(alarm, LoadBand::high, 0.0);
  CHECK(d.kind == Decision::Kind::rejuvenate_at);
  CHECK(d.at == doctest::Approx(8000.0));
  CHECK_FALSE(scheduler.should_fire(LoadBand::high, 3000.0));
  CHECK(scheduler.should_fire(LoadBand::low, 3000.0));  // load drop at +3000
  scheduler.mark_fired();
  CHECK_FALSE(scheduler.should_fire(LoadBand::low, 3000.0));
}

TEST_CASE("load classification uses the configured thresholds") {
  LoadThresholds thresholds;
  CHECK(classify_load(0.1, thresholds) == LoadBand::low);
  CHECK(classify_load(0.5, thresholds) == LoadBand::medium);
  CHECK(classify_load(0.9, thresholds) == LoadBand::high);
}

TEST_CASE("batch detect: persistent trends alert, short or flat ones do not") {
  auto drifting = [](double persist_factor) {
    // window of 10 samples every 10 s fills at t=90; the drift then has
    // persist_factor * 100 s to hold before the series ends
    IndicatorSeries s;
    s.name = "launch_time:app";
    const int n = 10 + static_cast<int>(persist_factor * 10.0);
    for (int i = 0; i < n; ++i) {
      s.samples.push_back(IndicatorSample{10.0 * i, 100.0 + 2.0 * i});
    }
    return s;
  };

  // sustained for twice the persistence: one alert
  std::vector<IndicatorSeries> sustained = {drifting(2.0)};
  auto alerts = detect(sustained, 10, 0.05, 100.0);
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].indicator == "launch_time:app");
  CHECK(alerts[0].persistence_s >= 100.0);

  // only half the required persistence: no alert
  std::vector<IndicatorSeries> brief = {drifting(0.5)};
  CHECK(detect(brief, 10, 0.05, 100.0).empty());

  // flat series: no alert
  IndicatorSeries flat;
  flat.name = "pss:system_server";
  for (int i = 0; i < 40; ++i) flat.samples.push_back(IndicatorSample{10.0 * i, 500.0});
  std::vector<IndicatorSeries> flat_set = {flat};
  CHECK(detect(flat_set, 10, 0.05, 0.0).empty());

  // too little data for the window: silently no alert for that indicator
  IndicatorSeries tiny;
  tiny.name = "free_mem";
  tiny.samples = {IndicatorSample{0.0, 1.0}, IndicatorSample{1.0, 2.0}};
  std::vector<IndicatorSeries> tiny_set = {tiny};
  CHECK(detect(tiny_set, 10, 0.05, 0.0).empty());
}

TEST_CASE("detector raises an alert only after the trend persists") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 10;
  cfg.min_persistence_s = 100.0;
  AgingDetector detector(cfg);

  // Strong upward drift sampled every 10 s: window full at t=90, trend
  // detected from then on, alert at persistence >= 100 s.
  double t = 0.0;
  bool saw_alert = false;
  for (int i = 0; i < 40; ++i, t += 10.0) {
    detector.ingest("launch_time:app", t, 100.0 + 2.0 * i);
    if (!detector.active_alerts().empty() && !saw_alert) {
      saw_alert = true;
      CHECK(t >= 90.0 + 100.0);
    }
  }
  CHECK(saw_alert);
  const auto alerts = detector.active_alerts();
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].indicator == "launch_time:app");
  CHECK(alerts[0].slope > 0.0);
  CHECK(alerts[0].persistence_s >= 100.0);
}

TEST_CASE("flat series never alerts") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 10;
  cfg.min_persistence_s = 0.0;
  AgingDetector detector(cfg);
  for (int i = 0; i < 50; ++i) {
    detector.ingest("launch_time:app", 10.0 * i, 100.0);
  }
  CHECK(detector.active_alerts().empty());
}

TEST_CASE("joint alerts raise one alarm with the launch-time TTAF") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 10;
  cfg.min_persistence_s = 50.0;
  AgingDetector detector(cfg);

  std::optional<AgingAlarm> alarm;
  int alarms_seen = 0;
  for (int i = 0; i < 60; ++i) {
    const double t = 10.0 * i;
    auto a1 = detector.ingest("launch_time:app", t, 100.0 + 0.5 * i);
    auto a2 = detector.ingest("pss:system_server", t, 1.0e8 + 50000.0 * i);
    for (const auto& a : {a1, a2}) {
      if (a) {
        alarm = a;
        ++alarms_seen;
      }
    }
  }
  REQUIRE(alarm.has_value());
  CHECK(alarms_seen == 1);  // debounced while the episode lasts
  CHECK(alarm->confidence == Confidence::very_high);
  REQUIRE(alarm->ttaf_s.has_value());
  // launch-time slope is 0.05 ms/s toward a 200 ms increase
  CHECK(*alarm->ttaf_s == doctest::Approx(200.0 / 0.05).epsilon(0.25));
}

TEST_CASE("reset drops pre-rejuvenation state: no alarm within a fresh window") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 10;
  cfg.min_persistence_s = 0.0;
  AgingDetector detector(cfg);

  double t = 0.0;
  bool alarmed_before_reset = false;
  for (int i = 0; i < 40; ++i, t += 10.0) {
    if (detector.ingest("launch_time:app", t, 100.0 + 2.0 * i)) alarmed_before_reset = true;
    if (detector.ingest("pss:system_server", t, 1.0e8 + 1.0e5 * i)) alarmed_before_reset = true;
  }
  CHECK(alarmed_before_reset);

  detector.reset(t);
  CHECK(detector.active_alerts().empty());
  CHECK(detector.samples_since_reset("launch_time:app") == 0);

  // Fewer than `window` fresh samples can never alarm, however steep.
  for (int i = 0; i < 9; ++i, t += 10.0) {
    CHECK_FALSE(detector.ingest("launch_time:app", t, 200.0 + 50.0 * i).has_value());
    CHECK_FALSE(detector.ingest("pss:system_server", t, 2.0e8 + 1.0e6 * i).has_value());
  }
  CHECK(detector.active_alerts().empty());
}

TEST_CASE("free memory degrades downward") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 10;
  cfg.min_persistence_s = 0.0;
  cfg.rules = {AlarmRule{{"free_mem"}, Confidence::low}};
  // the threshold is an increase (here: drop) in the TTAF source
  // indicator's own units, bytes in this case
  cfg.failure_threshold_increase = 5.0e8;
  cfg.ttaf_indicator = "free_mem";
  AgingDetector detector(cfg);

  std::optional<AgingAlarm> alarm;
  for (int i = 0; i < 30; ++i) {
    auto a = detector.ingest("free_mem", 10.0 * i, 1.0e9 - 2.0e6 * i);
    if (a) alarm = a;
  }
  REQUIRE(alarm.has_value());
  REQUIRE(alarm->ttaf_s.has_value());
  CHECK(*alarm->ttaf_s > 0.0);
}

TEST_CASE("detector event sink emits JSON lines for alerts and alarms") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 5;
  cfg.min_persistence_s = 0.0;
  cfg.rules = {AlarmRule{{"launch_time:any"}, Confidence::medium}};
  AgingDetector detector(cfg);
  std::vector<std::string> lines;
  detector.set_event_sink([&](const std::string& line) { lines.push_back(line); });
  for (int i = 0; i < 10; ++i) {
    detector.ingest("launch_time:app", 10.0 * i, 100.0 + 5.0 * i);
  }
  detector.reset(100.0);
  REQUIRE(!lines.empty());
  bool saw_alert = false, saw_alarm = false, saw_reset = false;
  for (const std::string& line : lines) {
    const auto event = nlohmann::json::parse(line);
    REQUIRE(event.contains("type"));
    REQUIRE(event.contains("t"));
    if (event["type"] == "alert") saw_alert = true;
    if (event["type"] == "alarm") saw_alarm = true;
    if (event["type"] == "detector_reset") saw_reset = true;
  }
  CHECK(saw_alert);
  CHECK(saw_alarm);
  CHECK(saw_reset);
}

TEST_CASE("detector config validation") {
  DetectorConfig cfg = DetectorConfig::defaults();
  cfg.window = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = DetectorConfig::defaults();
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = DetectorConfig::defaults();
  cfg.rules.push_back(AlarmRule{{}, Confidence::low});
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(confidence_from_string("extreme"), ConfigError);
  CHECK_THROWS_AS(policy_from_string("sometimes"), ConfigError);
}
