#include <doctest.h>

#include <sstream>

#include "agewatch/candidacy.hpp"
#include "support/builders.hpp"

using namespace agewatch;
using agewatch_test::designed_series;
using agewatch_test::SnapshotBuilder;

namespace {

const ContainerCandidate* find_row(const AnalysisReport& report, const std::string& name) {
  for (const ContainerCandidate& row : report.rows) {
    if (row.object_name == name) return &row;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("track_containers keeps only containers present throughout") {
  const auto series = designed_series();
  CandidacyConfig cfg;
  std::vector<std::string> transient;
  const auto tracked = track_containers(series, cfg, &transient);
  CHECK(tracked.size() == 5);
  REQUIRE(transient.size() == 1);
  CHECK(transient[0] == "java.util.ArrayList@15");

  for (const TrackedContainer& tc : tracked) {
    REQUIRE(tc.retained.size() == 3);
    if (tc.id == 10) {
      // growing cache: retained = 48 + elements * 40
      CHECK(tc.retained[0] == doctest::Approx(128));
      CHECK(tc.retained[1] == doctest::Approx(168));
      CHECK(tc.retained[2] == doctest::Approx(208));
      CHECK(tc.element_counts.back() == 4);
    }
  }
}

TEST_CASE("track_containers rejects short series") {
  const auto series = designed_series();
  SnapshotSeries two;
  two.snapshots.assign(series.snapshots.begin(), series.snapshots.begin() + 2);
  CandidacyConfig cfg;
  CHECK_THROWS_AS(track_containers(two, cfg, nullptr), SeriesTooShort);
}

TEST_CASE("designed series: exactly the growing cache is rejuvenable") {
  const auto series = designed_series();
  CandidacyConfig cfg;
  const auto report = build_report(series, cfg);

  CHECK(report.process_name == "demo_proc");
  CHECK(report.rows.size() == 5);
  REQUIRE(report.list.containers.size() == 1);
  CHECK(report.list.containers[0] == "java.util.ArrayList@10");

  const auto* growing = find_row(report, "java.util.ArrayList@10");
  REQUIRE(growing != nullptr);
  CHECK(growing->rejuvenate);
  CHECK(growing->dominator_name == "svc.cache_owner@2");
  CHECK(growing->sole_inbound);
  CHECK(growing->per_criterion.at("C1") == CriterionResult::pass);
  CHECK(growing->per_criterion.at("C2") == CriterionResult::pass);
  CHECK(growing->per_criterion.at("C3") == CriterionResult::pass);
  CHECK(growing->per_criterion.at("C4") == CriterionResult::skipped);
  CHECK(growing->mean_retained == doctest::Approx(168.0));

  const auto* shared = find_row(report, "java.util.HashMap@11");
  REQUIRE(shared != nullptr);
  CHECK_FALSE(shared->rejuvenate);
  CHECK(shared->per_criterion.at("C1") == CriterionResult::fail);
  CHECK(shared->dominator_name == "SuperRoot");

  const auto* fixed = find_row(report, "java.util.Hashtable@12");
  REQUIRE(fixed != nullptr);
  CHECK_FALSE(fixed->rejuvenate);
  CHECK(fixed->per_criterion.at("C2") == CriterionResult::fail);
  CHECK(fixed->stddev_retained == doctest::Approx(0.0));

  const auto* shrinking = find_row(report, "java.util.Vector@13");
  REQUIRE(shrinking != nullptr);
  CHECK(shrinking->per_criterion.at("C2") == CriterionResult::fail);
  CHECK(shrinking->stddev_retained > 0.0);

  const auto* churn = find_row(report, "java.util.LinkedList@14");
  REQUIRE(churn != nullptr);
  CHECK(churn->per_criterion.at("C2") == CriterionResult::pass);
  CHECK(churn->per_criterion.at("C3") == CriterionResult::fail);
}

TEST_CASE("shrinking containers pass C2 when net growth is not required") {
  const auto series = designed_series();
  CandidacyConfig cfg;
  cfg.require_net_growth = false;
  const auto report = build_report(series, cfg);
  const auto* shrinking = find_row(report, "java.util.Vector@13");
  REQUIRE(shrinking != nullptr);
  CHECK(shrinking->per_criterion.at("C2") == CriterionResult::pass);
}

TEST_CASE("whitelist and blacklist shrink but never grow the list") {
  const auto series = designed_series();

  CandidacyConfig plain;
  const auto baseline = build_report(series, plain);

  CandidacyConfig with_blacklist = plain;
  with_blacklist.use_blacklist = true;
  with_blacklist.blacklist = {"app.CacheEntry"};
  const auto blacklisted = build_report(series, with_blacklist);
  CHECK(blacklisted.list.containers.empty());
  const auto* growing = find_row(blacklisted, "java.util.ArrayList@10");
  REQUIRE(growing != nullptr);
  CHECK(growing->per_criterion.at("C6") == CriterionResult::fail);

  CandidacyConfig with_whitelist = plain;
  with_whitelist.use_whitelist = true;
  with_whitelist.whitelist = {"app.SomethingElse"};
  const auto whitelisted = build_report(series, with_whitelist);
  CHECK(whitelisted.list.containers.empty());

  // monotonicity: disabling the lists never shrinks the list
  CHECK(baseline.list.containers.size() >= blacklisted.list.containers.size());
  CHECK(baseline.list.containers.size() >= whitelisted.list.containers.size());

  // a whitelist that covers the elements keeps the candidate
  CandidacyConfig covering = plain;
  covering.use_whitelist = true;
  covering.whitelist = {"app.CacheEntry"};
  const auto covered = build_report(series, covering);
  CHECK(covered.list.containers.size() == baseline.list.containers.size());
}

TEST_CASE("rejuvenate implies C1 and C2 pass ordering and list is a subset") {
  const auto series = designed_series();
  CandidacyConfig cfg;
  const auto report = build_report(series, cfg);
  std::size_t marked = 0;
  for (const ContainerCandidate& row : report.rows) {
    if (row.rejuvenate) {
      ++marked;
      CHECK(row.per_criterion.at("C1") == CriterionResult::pass);
      CHECK(row.per_criterion.at("C2") == CriterionResult::pass);
    }
  }
  CHECK(marked == report.list.containers.size());
  // descending mean ordering
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i - 1].mean_retained >= report.rows[i].mean_retained);
  }
}

TEST_CASE("all containers constant-size: the rejuvenation list is empty") {
  auto make = [](int index) {
    SnapshotBuilder b;
    b.id("const_" + std::to_string(index)).timestamp(100.0 * index).process("p");
    b.root(1);
    b.object(1, "svc.ProcessRoot", 64, {2, 3});
    b.object(2, "svc.owner_a", 32, {10});
    b.object(3, "svc.owner_b", 32, {11});
    b.object(10, "java.util.HashMap", 48, {100, 101});
    b.object(11, "java.util.Vector", 48, {110});
    for (ObjectId e : {100, 101, 110}) b.object(e, "app.E", 24, {});
    return b.build();
  };
  std::vector<HeapSnapshot> snaps;
  for (int i = 0; i < 3; ++i) snaps.push_back(make(i));
  const auto series = make_series(std::move(snaps));
  const auto report = build_report(series, CandidacyConfig{});
  CHECK(report.rows.size() == 2);
  CHECK(report.list.containers.empty());
}

TEST_CASE("C4 uses last_access metadata when present") {
  auto make = [](int index, double last_access) {
    SnapshotBuilder b;
    b.id("c4_" + std::to_string(index)).timestamp(1000.0 * index).process("p");
    b.root(1);
    b.object(1, "svc.ProcessRoot", 64, {2});
    b.object(2, "svc.owner", 32, {10});
    std::vector<ObjectId> ids;
    for (int k = 0; k <= index; ++k) ids.push_back(100 + k);
    b.object(10, "java.util.ArrayList", 48, ids);
    for (ObjectId e : ids) b.object(e, "app.E", 40, {}, 0.0, last_access);
    return b;
  };

  SUBCASE("stale elements pass") {
    std::vector<HeapSnapshot> snaps;
    for (int i = 0; i < 3; ++i) snaps.push_back(make(i, 100.0).build());
    const auto series = make_series(std::move(snaps));
    const auto report = build_report(series, CandidacyConfig{});
    CHECK(report.rows[0].per_criterion.at("C4") == CriterionResult::pass);
    CHECK(report.rows[0].rejuvenate);
  }
  SUBCASE("recently accessed elements fail") {
    std::vector<HeapSnapshot> snaps;
    for (int i = 0; i < 3; ++i) snaps.push_back(make(i, 1000.0 * i).build());
    const auto series = make_series(std::move(snaps));
    const auto report = build_report(series, CandidacyConfig{});
    CHECK(report.rows[0].per_criterion.at("C4") == CriterionResult::fail);
    CHECK_FALSE(report.rows[0].rejuvenate);
  }
}

TEST_CASE("C3 honors an explicit lifetime threshold") {
  const auto series = designed_series();
  CandidacyConfig cfg;
  cfg.long_lifetime_s = 100.0;  // satisfied: elements persist 60-120 s spans
  const auto report = build_report(series, cfg);
  const auto* growing = find_row(report, "java.util.ArrayList@10");
  REQUIRE(growing != nullptr);
  CHECK(growing->per_criterion.at("C3") == CriterionResult::pass);

  cfg.long_lifetime_s = 1000.0;  // not satisfiable within the 120 s series
  const auto strict = build_report(series, cfg);
  const auto* strict_growing = find_row(strict, "java.util.ArrayList@10");
  REQUIRE(strict_growing != nullptr);
  CHECK(strict_growing->per_criterion.at("C3") == CriterionResult::fail);
}

TEST_CASE("reports are deterministic and carry the documented columns") {
  const auto series = designed_series();
  CandidacyConfig cfg;
  const auto report1 = build_report(series, cfg);
  const auto report2 = build_report(series, cfg);

  std::ostringstream csv1, csv2, json1, json2, list1;
  write_report_csv(csv1, report1);
  write_report_csv(csv2, report2);
  write_report_json(json1, report1);
  write_report_json(json2, report2);
  CHECK(csv1.str() == csv2.str());
  CHECK(json1.str() == json2.str());
  CHECK(csv1.str().rfind("object_name,dominator_name,mean,standard_deviation,number,rejuvenate\n",
                         0) == 0);

  write_rejuvenation_list(list1, report1.list);
  const auto parsed = parse_rejuvenation_list(list1.str());
  CHECK(parsed.process_name == "demo_proc");
  CHECK(parsed.containers == report1.list.containers);
}

TEST_CASE("config validation") {
  CandidacyConfig cfg;
  cfg.min_snapshots = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = CandidacyConfig{};
  cfg.container_classes.class_names.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = CandidacyConfig{};
  cfg.idle_threshold_s = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
