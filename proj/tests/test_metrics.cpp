#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "agewatch/metrics.hpp"

using namespace agewatch;
using namespace agewatch::sim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ActivityOutcome outcome(double slope, double horizon_s = 21600.0, double threshold = 200.0) {
  ActivityOutcome o;
  o.slope = slope;
  o.lt_increase = lt_increase(slope, horizon_s);
  o.ttaf_h = ttaf_hours(slope, threshold);
  return o;
}

}  // namespace

TEST_CASE("launch-time increase extrapolation") {
  // 0.003 ms/s over six hours
  CHECK(lt_increase(0.003, 3600.0 * 6) == doctest::Approx(64.8).epsilon(1e-12));
}

TEST_CASE("TTAF from slope and threshold") {
  CHECK(ttaf_hours(0.003, 200.0) == doctest::Approx(200.0 / 0.003 / 3600.0));
  CHECK(ttaf_hours(0.003, 200.0) == doctest::Approx(18.5185).epsilon(1e-4));
  CHECK(std::isinf(ttaf_hours(0.0, 200.0)));
  CHECK(std::isinf(ttaf_hours(-0.004, 200.0)));
}

TEST_CASE("gain formulas") {
  CHECK(gain_lt_pct(100.0, 60.0) == doctest::Approx(40.0));
  CHECK(gain_ttaf_pct(6.0, 8.0) == doctest::Approx(33.3333333).epsilon(1e-6));
  CHECK(std::isinf(gain_ttaf_pct(6.0, kInf)));
}

TEST_CASE("published-style row: launch-time and TTAF gains within a point") {
  // 167.181 -> 95.974 ms and 7.178 -> 12.503 h
  CHECK(gain_lt_pct(167.181, 95.974) == doctest::Approx(43.0).epsilon(0.025));
  CHECK(gain_ttaf_pct(7.178, 12.503) == doctest::Approx(74.0).epsilon(0.015));
}

TEST_CASE("averages with +inf exclusion reproduce printed table averages") {
  // Gain_TTAF rows of the two-service experiment: mean of the finite gains
  const std::vector<double> t3 = {238, 123, 18, 200, 9, -3, 19};
  CHECK(mean_with_exclusions(t3, std::vector<bool>(7, true)) ==
        doctest::Approx(86.2857).epsilon(1e-4));

  // Gain_LT rows of the three-service experiment
  const std::vector<double> t4 = {76, 150, 41, 45, 62, 15, 46};
  CHECK(mean_with_exclusions(t4, std::vector<bool>(7, true)) ==
        doctest::Approx(62.142857).epsilon(1e-4));

  // exclusions drop values from the mean
  const std::vector<double> with_inf = {100.0, kInf};
  CHECK(mean_with_exclusions(with_inf, {true, false}) == doctest::Approx(100.0));
  // everything excluded: unbounded improvement
  CHECK(std::isinf(mean_with_exclusions({kInf}, {false})));
}

TEST_CASE("compute_gains on identical outcomes gives zero gains") {
  std::map<std::string, ActivityOutcome> outcomes = {{"a", outcome(0.004)},
                                                     {"b", outcome(0.010)}};
  const auto rows = compute_gains(outcomes, outcomes);
  REQUIRE(rows.size() == 2);
  for (const GainRow& row : rows) {
    CHECK(row.gain_lt_pct == doctest::Approx(0.0));
    CHECK(row.gain_ttaf_pct == doctest::Approx(0.0));
    CHECK(row.lt_in_mean);
    CHECK(row.ttaf_in_mean);
  }
}

TEST_CASE("treated slope <= 0 reports infinite TTAF gain and leaves the mean") {
  std::map<std::string, ActivityOutcome> baseline = {{"a", outcome(0.008)},
                                                     {"b", outcome(0.004)}};
  std::map<std::string, ActivityOutcome> treated = {{"a", outcome(-0.004)},
                                                    {"b", outcome(0.002)}};
  const auto rows = compute_gains(baseline, treated);
  REQUIRE(rows.size() == 2);
  const GainRow& a = rows[0];
  CHECK(a.activity == "a");
  CHECK(std::isinf(a.gain_ttaf_pct));
  CHECK_FALSE(a.ttaf_in_mean);
  // negative treated slope still yields a finite, >100% launch-time gain
  CHECK(a.gain_lt_pct == doctest::Approx(150.0));
  CHECK(a.lt_in_mean);

  // exactly-zero treated slope: the 100% LT gain is degenerate
  treated["a"] = outcome(0.0);
  const auto rows2 = compute_gains(baseline, treated);
  CHECK(rows2[0].gain_lt_pct == doctest::Approx(100.0));
  CHECK_FALSE(rows2[0].lt_in_mean);
}

TEST_CASE("compute_gains demands every baseline activity in the treated trace") {
  std::map<std::string, ActivityOutcome> baseline = {{"a", outcome(0.008)},
                                                     {"b", outcome(0.004)}};
  std::map<std::string, ActivityOutcome> treated = {{"a", outcome(0.004)}};
  CHECK_THROWS_AS(compute_gains(baseline, treated), MissingActivity);
}

TEST_CASE("summarize_outcomes needs a baseline run") {
  RunOutcomes treated;
  treated.id = "EXP2";
  treated.experiment.id = "EXP2";
  treated.experiment.rejuvenated_services = {"activity_manager"};
  treated.activities = {{"a", outcome(0.004)}};
  std::vector<RunOutcomes> runs = {treated};
  CHECK_THROWS_AS(summarize_outcomes(runs, 21600.0, 200.0), MissingBaseline);
}

TEST_CASE("summarize_outcomes builds per-experiment averages") {
  RunOutcomes baseline;
  baseline.id = "EXP1";
  baseline.experiment.id = "EXP1";
  baseline.activities = {{"a", outcome(0.008)}, {"b", outcome(0.004)}};

  RunOutcomes treated;
  treated.id = "EXP2";
  treated.experiment.id = "EXP2";
  treated.experiment.rejuvenated_services = {"activity_manager"};
  treated.activities = {{"a", outcome(0.004)}, {"b", outcome(0.002)}};

  std::vector<RunOutcomes> runs = {baseline, treated};
  const auto table = summarize_outcomes(runs, 21600.0, 200.0);
  CHECK(table.baseline_id == "EXP1");
  REQUIRE(table.experiments.size() == 1);
  const auto& summary = table.experiments[0];
  CHECK(summary.id == "EXP2");
  REQUIRE(summary.rows.size() == 2);
  CHECK(summary.mean_gain_lt_pct == doctest::Approx(50.0));
  CHECK(summary.mean_gain_ttaf_pct == doctest::Approx(100.0));

  std::ostringstream csv, md;
  write_comparison_csv(csv, table);
  write_comparison_markdown(md, table);
  CHECK(csv.str().find("EXP2,AVERAGE") != std::string::npos);
  CHECK(md.str().find("## EXP2") != std::string::npos);
}
