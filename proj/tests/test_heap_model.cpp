#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "agewatch/heap_model.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace agewatch;
using agewatch_test::SnapshotBuilder;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "agewatch_heap_model_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("empty snapshot parses and is valid") {
  const auto snap = parse_snapshot(
      R"({"snapshot_id":"s0","timestamp_s":0,"process":"p","gc_roots":[],"objects":[]})");
  CHECK(snap.objects.empty());
  CHECK(snap.gc_roots.empty());
  CHECK(snap.snapshot_id == "s0");
}

TEST_CASE("snapshot parsing rejects broken graphs") {
  SUBCASE("dangling reference") {
    const char* text = R"({"snapshot_id":"s","timestamp_s":0,"process":"p","gc_roots":[5],
      "objects":[{"id":5,"class":"A","shallow_size":8,"refs":[99]}]})";
    CHECK_THROWS_AS(parse_snapshot(text), DanglingReference);
  }
  SUBCASE("duplicate id") {
    const char* text = R"({"snapshot_id":"s","timestamp_s":0,"process":"p","gc_roots":[7],
      "objects":[{"id":7,"class":"A","shallow_size":8,"refs":[]},
                 {"id":7,"class":"B","shallow_size":8,"refs":[]}]})";
    CHECK_THROWS_AS(parse_snapshot(text), DuplicateId);
  }
  SUBCASE("dangling gc_root") {
    const char* text = R"({"snapshot_id":"s","timestamp_s":0,"process":"p","gc_roots":[1],
      "objects":[]})";
    CHECK_THROWS_AS(parse_snapshot(text), DanglingReference);
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_AS(parse_snapshot("{nope"), ParseError);
  }
  SUBCASE("negative integer") {
    const char* text = R"({"snapshot_id":"s","timestamp_s":0,"process":"p","gc_roots":[],
      "objects":[{"id":-3,"class":"A","shallow_size":8,"refs":[]}]})";
    CHECK_THROWS_AS(parse_snapshot(text), ParseError);
  }
}

TEST_CASE("unknown keys are ignored, optional keys may be missing") {
  const char* text = R"({"snapshot_id":"s","timestamp_s":1.5,"process":"p","gc_roots":[1],
    "objects":[{"id":1,"class":"A","shallow_size":8,"refs":[],"color":"red"}],
    "vendor_extension":{"x":1}})";
  const auto snap = parse_snapshot(text);
  CHECK(snap.objects[0].created_at_s == std::nullopt);
  CHECK(snap.objects[0].last_access_s == std::nullopt);
}

TEST_CASE("series loading keeps order and rejects non-increasing timestamps") {
  const auto dir = temp_dir();
  std::vector<std::filesystem::path> paths;
  for (int i = 0; i < 3; ++i) {
    auto snap = SnapshotBuilder()
                    .id("s" + std::to_string(i))
                    .timestamp(60.0 * i)
                    .process("p")
                    .object(1, "A", 8, {})
                    .root(1)
                    .build();
    auto path = dir / ("series_" + std::to_string(i) + ".json");
    save_snapshot(snap, path);
    paths.push_back(path);
  }
  const auto series = load_series(paths);
  CHECK(series.size() == 3);
  CHECK(series[2].timestamp_s == doctest::Approx(120.0));

  SUBCASE("single file is a valid series") {
    const auto single = load_series({paths[0]});
    CHECK(single.size() == 1);
  }
  SUBCASE("equal timestamps rejected") {
    std::vector<std::filesystem::path> dup = {paths[0], paths[0]};
    // identical snapshot ids also make this invalid; timestamp check needs
    // distinct ids, so rewrite one file with a new id but the same time
    auto snap = load_snapshot(paths[0]);
    snap.snapshot_id = "other";
    auto path = dir / "same_time.json";
    save_snapshot(snap, path);
    CHECK_THROWS_AS(load_series({paths[0], path}), NonMonotonicTimestamps);
  }
}

TEST_CASE("serialize/load round trip preserves the graph") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 20; ++iter) {
    HeapSnapshot original = agewatch_test::random_graph(rng, 40);
    original.objects[0].created_at_s = 12.5;
    original.objects[0].last_access_s = 80.0;
    const HeapSnapshot reparsed = parse_snapshot(serialize_snapshot(original));
    REQUIRE(reparsed.objects.size() == original.objects.size());
    CHECK(reparsed.snapshot_id == original.snapshot_id);
    CHECK(reparsed.timestamp_s == original.timestamp_s);
    CHECK(reparsed.gc_roots == original.gc_roots);
    for (const ObjectRecord& rec : original.objects) {
      const ObjectRecord* other = reparsed.find_object(rec.id);
      REQUIRE(other != nullptr);
      CHECK(other->class_name == rec.class_name);
      CHECK(other->shallow_size == rec.shallow_size);
      CHECK(other->refs == rec.refs);
      CHECK(other->created_at_s == rec.created_at_s);
      CHECK(other->last_access_s == rec.last_access_s);
    }
  }
}

TEST_CASE("find_containers basics") {
  // one array list holding 3 refs, referenced by one owner
  auto snap = SnapshotBuilder()
                  .id("s")
                  .timestamp(0)
                  .process("p")
                  .root(1)
                  .object(1, "svc.Owner", 16, {2})
                  .object(2, "java.util.ArrayList", 48, {3, 4, 5})
                  .object(3, "app.E", 8, {})
                  .object(4, "app.E", 8, {})
                  .object(5, "app.E", 8, {})
                  .build();
  const auto views = find_containers(snap, ContainerClassSet::default_set());
  REQUIRE(views.size() == 1);
  CHECK(views[0].object_id == 2);
  CHECK(views[0].element_count == 3);
  CHECK(views[0].inbound_count == 1);

  SUBCASE("no container classes present") {
    ContainerClassSet none{{"com.example.Nothing"}};
    CHECK(find_containers(snap, none).empty());
  }
}

TEST_CASE("find_containers agrees with brute-force scans on random graphs") {
  std::mt19937_64 rng(12345);
  ContainerClassSet classes{{"node.Class0", "node.Class3"}};
  for (int iter = 0; iter < 25; ++iter) {
    const HeapSnapshot snap = agewatch_test::random_graph(rng, 40);
    const auto views = find_containers(snap, classes);

    std::size_t expected = 0;
    for (const ObjectRecord& rec : snap.objects) {
      if (classes.contains(rec.class_name)) ++expected;
    }
    CHECK(views.size() == expected);

    for (const ContainerView& view : views) {
      CHECK(view.element_count == snap.object(view.object_id).refs.size());
      // Brute-force inbound counts records, not distinct referrers; the
      // random graphs have de-duplicated edges so both definitions agree.
      CHECK(view.inbound_count == agewatch_test::brute_force_inbound(snap, view.object_id));
    }
  }
}

TEST_CASE("display names are class@id") {
  auto snap = SnapshotBuilder()
                  .id("s")
                  .timestamp(0)
                  .process("p")
                  .root(4)
                  .object(4, "java.util.HashMap", 48, {})
                  .build();
  CHECK(display_name(snap, 4) == "java.util.HashMap@4");
}
