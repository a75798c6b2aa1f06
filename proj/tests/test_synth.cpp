#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "seq4d/rng.hpp"
#include "seq4d/synth.hpp"
#include "temp_dir.hpp"

using namespace seq4d;
using synth::ObjectSnippet;
using synth::SnippetFrame;
using synth::SynthConfig;
using synth::ValidMap;

namespace {

Scan ground_plane(double half, double spacing) {
  Scan s;
  for (double x = -half; x <= half; x += spacing) {
    for (double y = -half; y <= half; y += spacing) {
      s.points.push_back(Point{x, y, 0, 0});
    }
  }
  return s;
}

ObjectSnippet box_snippet(std::uint32_t id, double width, int frames,
                          double speed = 0.0) {
  ObjectSnippet snip;
  snip.id = id;
  Rng rng(id * 771);
  for (int f = 0; f < frames; ++f) {
    SnippetFrame sf;
    sf.frame_offset = f;
    for (int i = 0; i < 40; ++i) {
      sf.points.push_back(Point{speed * f + rng.next_in(-width / 2, width / 2),
                                rng.next_in(-width / 2, width / 2),
                                rng.next_in(0, 1.0), 0.5});
    }
    snip.frames.push_back(std::move(sf));
  }
  return snip;
}

Sequence empty_window(int frames) {
  Sequence seq;
  for (int t = 0; t < frames; ++t) {
    Scan s;
    s.frame_index = t;
    seq.scans.push_back(s);
    seq.poses.emplace_back();
  }
  return seq;
}

synth::GroundHeightMap flat_heights(const ValidMap& map) {
  synth::GroundHeightMap hm;
  hm.frame = map;
  hm.frame.cells.clear();
  hm.mean_z.assign(static_cast<std::size_t>(map.width) * map.height, 0.0);
  hm.counts.assign(static_cast<std::size_t>(map.width) * map.height, 1);
  return hm;
}

ValidMap all_valid(int width, int height, double res) {
  ValidMap map;
  map.resolution = res;
  map.origin_x = -width * res / 2;
  map.origin_y = -height * res / 2;
  map.width = width;
  map.height = height;
  map.cells.assign(static_cast<std::size_t>(width) * height, 1);
  return map;
}

}  // namespace

TEST_CASE("validmap: empty ground means every cell invalid") {
  Scan empty;
  const ValidMap map = synth::build_validmap(empty, 0.5);
  CHECK(map.empty_map());
  CHECK_FALSE(map.valid(0, 0));
}

TEST_CASE("validmap floor arithmetic with an explicit frame") {
  // one ground point at (0.3, 0.7) with res 0.5 and origin (0,0):
  // only cell (0,1) becomes valid
  const std::vector<Point> ground{{0.3, 0.7, 0, 0}};
  const ValidMap map = synth::build_validmap(ground, 0.5, 0, 0, 2, 2);
  CHECK(map.cell(0, 1) == 1);
  CHECK(map.cell(0, 0) == 0);
  CHECK(map.cell(1, 0) == 0);
  CHECK(map.cell(1, 1) == 0);
  CHECK(map.valid(0.3, 0.7));
  CHECK_FALSE(map.valid(0.3, 0.2));
}

TEST_CASE("validmap is binary: multiple points in a cell count once") {
  const std::vector<Point> ground{{0.1, 0.1, 0, 0}, {0.2, 0.2, 5, 0}};
  const ValidMap map = synth::build_validmap(ground, 0.5, 0, 0, 1, 1);
  CHECK(map.cell(0, 0) == 1);
}

TEST_CASE("validmap from scan uses the BEV min corner as origin") {
  Scan ground;
  ground.points = {{-1.0, 2.0, 0, 0}, {1.4, 3.9, 0, 0}};
  const ValidMap map = synth::build_validmap(ground, 0.5);
  CHECK(map.origin_x == doctest::Approx(-1.0));
  CHECK(map.origin_y == doctest::Approx(2.0));
  CHECK(map.valid(-1.0, 2.0));
  CHECK(map.valid(1.4, 3.9));
  CHECK_FALSE(map.valid(5.0, 5.0));
}

TEST_CASE("ground height map averages cell z") {
  const std::vector<Point> ground{{0.1, 0.1, 1.0, 0}, {0.2, 0.2, 3.0, 0}};
  const ValidMap map = synth::build_validmap(ground, 0.5, 0, 0, 1, 1);
  const auto hm = synth::GroundHeightMap::build(ground, map);
  CHECK(hm.height_at(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("extract_object_db re-centers snippets") {
  // one instance visible in 3 frames of a window, moving in x
  Sequence seq;
  std::vector<InstanceLabeling> labels;
  for (int t = 0; t < 3; ++t) {
    Scan s;
    s.frame_index = t;
    Rng rng(t + 50);
    for (int i = 0; i < 40; ++i) {
      s.points.push_back(Point{2.0 * t + rng.next_in(-0.5, 0.5),
                               7 + rng.next_in(-0.5, 0.5),
                               3 + rng.next_in(0, 1.2), 0.9});
    }
    seq.scans.push_back(s);
    seq.poses.emplace_back();
    labels.emplace_back(40, 1);
  }
  cluster::WindowPseudoLabels window;
  window.start_frame = 0;
  window.labels = labels;
  window.cluster_count = 1;

  SynthConfig cfg;
  cfg.min_points = 30;
  const auto db = synth::extract_object_db(seq, std::span(&window, 1), cfg);
  REQUIRE(db.size() == 1);
  REQUIRE(db[0].frames.size() == 3);

  // first-frame BEV centroid at the origin, min z at 0
  double cx = 0, cy = 0, min_z = 1e9;
  for (const Point& p : db[0].frames[0].points) {
    cx += p.x;
    cy += p.y;
    min_z = std::min(min_z, p.z);
  }
  cx /= db[0].frames[0].points.size();
  cy /= db[0].frames[0].points.size();
  CHECK(std::abs(cx) < 1e-9);
  CHECK(std::abs(cy) < 1e-9);
  CHECK(std::abs(min_z) < 1e-12);

  // the recorded motion survives re-centering
  double cx2 = 0;
  for (const Point& p : db[0].frames[2].points) {
    cx2 += p.x;
  }
  cx2 /= db[0].frames[2].points.size();
  CHECK(cx2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("extract_object_db skips undersized instances") {
  Sequence seq = empty_window(2);
  std::vector<InstanceLabeling> labels(2);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 10; ++i) {
      seq.scans[t].points.push_back(Point{1.0 * i, 0, 0, 0});
      labels[t].push_back(1);
    }
  }
  cluster::WindowPseudoLabels window;
  window.start_frame = 0;
  window.labels = labels;
  window.cluster_count = 1;
  SynthConfig cfg;
  cfg.min_points = 30;  // 10 points per frame < 30 everywhere
  CHECK(synth::extract_object_db(seq, std::span(&window, 1), cfg).empty());
}

TEST_CASE("place_objects with zero attempts returns the input unchanged") {
  Sequence window = empty_window(2);
  window.scans[0].points.push_back(Point{1, 2, 3, 0.5});
  window.scans[1].points.push_back(Point{1, 2, 3, 0.5});
  const std::vector<InstanceLabeling> labels{{4}, {4}};
  const ValidMap map = all_valid(10, 10, 0.5);
  const auto db = std::vector<ObjectSnippet>{box_snippet(1, 1.0, 2)};
  SynthConfig cfg;
  cfg.n_s = 0;
  const auto result = synth::place_objects(window, labels, map,
                                           flat_heights(map), db, cfg);
  CHECK(result.records.empty());
  CHECK(result.sequence.scans[0].points.size() == 1);
  CHECK(result.labels[0] == labels[0]);
}

TEST_CASE("single snippet on an empty scene is accepted") {
  Sequence window = empty_window(2);
  const std::vector<InstanceLabeling> labels{{}, {}};
  const ValidMap map = all_valid(40, 40, 0.5);
  const auto db = std::vector<ObjectSnippet>{box_snippet(1, 1.0, 2)};
  SynthConfig cfg;
  cfg.n_s = 1;
  cfg.seed = 3;
  const auto result = synth::place_objects(window, labels, map,
                                           flat_heights(map), db, cfg);
  REQUIRE(result.records.size() == 1);
  CHECK(result.sequence.scans[0].points.size() == db[0].frames[0].points.size());
  CHECK(result.sequence.scans[1].points.size() == db[0].frames[1].points.size());
  CHECK(result.labels[0].size() == result.sequence.scans[0].points.size());
  for (auto id : result.labels[0]) {
    CHECK(id == result.records[0].instance_id);
  }
}

TEST_CASE("second snippet at the same anchor is rejected") {
  Sequence window = empty_window(1);
  const std::vector<InstanceLabeling> labels{{}};
  // a single valid cell forces both draws onto the same anchor
  ValidMap map = all_valid(1, 1, 0.5);
  const auto db = std::vector<ObjectSnippet>{box_snippet(1, 2.0, 1)};
  SynthConfig cfg;
  cfg.n_s = 2;
  cfg.seed = 9;
  const auto result = synth::place_objects(window, labels, map,
                                           flat_heights(map), db, cfg);
  CHECK(result.records.size() == 1);
}

TEST_CASE("acceptance count is bounded by n_s and hits it on a sparse plane") {
  Sequence window = empty_window(1);
  const std::vector<InstanceLabeling> labels{{}};
  const ValidMap map = all_valid(200, 200, 0.5);
  ObjectSnippet tiny;
  tiny.id = 1;
  tiny.frames.push_back(SnippetFrame{0, {Point{0, 0, 0, 1}}});
  const auto db = std::vector<ObjectSnippet>{tiny};
  SynthConfig cfg;
  cfg.n_s = 30;
  cfg.seed = 1;
  const auto result = synth::place_objects(window, labels, map,
                                           flat_heights(map), db, cfg);
  CHECK(result.records.size() <= 30);
  CHECK(result.records.size() == 30);  // seed-fixed: no anchor collisions
}

TEST_CASE("no valid cells leaves the scene untouched") {
  Sequence window = empty_window(1);
  window.scans[0].points.push_back(Point{0, 0, 0, 0});
  const std::vector<InstanceLabeling> labels{{0}};
  ValidMap map = all_valid(4, 4, 0.5);
  map.cells.assign(map.cells.size(), 0);
  const auto db = std::vector<ObjectSnippet>{box_snippet(1, 1.0, 1)};
  SynthConfig cfg;
  cfg.n_s = 5;
  const auto result = synth::place_objects(window, labels, map,
                                           flat_heights(map), db, cfg);
  CHECK(result.records.empty());
  CHECK(result.sequence.scans[0].points.size() == 1);
}

TEST_CASE("audit: no pairwise overlaps, anchors valid, originals preserved") {
  // a real-ish window: flat ground + one existing labeled object
  Sequence seq;
  std::vector<InstanceLabeling> labels;
  for (int t = 0; t < 3; ++t) {
    Scan s = ground_plane(10, 0.5);
    s.frame_index = t;
    InstanceLabeling l(s.points.size(), 0);
    Rng rng(t);
    for (int i = 0; i < 50; ++i) {
      s.points.push_back(
          Point{3 + rng.next_in(-0.5, 0.5), 3 + rng.next_in(-0.5, 0.5),
                rng.next_in(0.3, 1.5), 0.7});
      l.push_back(9);
    }
    seq.scans.push_back(s);
    seq.poses.emplace_back();
    labels.push_back(std::move(l));
  }
  const auto db = std::vector<ObjectSnippet>{box_snippet(1, 1.0, 3),
                                             box_snippet(2, 0.8, 2, 0.5)};
  SynthConfig cfg;
  cfg.n_s = 200;
  cfg.seed = 77;
  ground::GroundConfig gcfg;
  const auto result = synth::synth_sequence(seq, labels, db, cfg, gcfg);

  CHECK(result.records.size() > 0);
  CHECK(result.records.size() <= 200);

  // original points and labels are preserved bit-exactly as a prefix
  for (std::size_t t = 0; t < seq.size(); ++t) {
    REQUIRE(result.sequence.scans[t].points.size() >=
            seq.scans[t].points.size());
    for (std::size_t i = 0; i < seq.scans[t].points.size(); ++i) {
      CHECK(result.sequence.scans[t].points[i].x == seq.scans[t].points[i].x);
      CHECK(result.sequence.scans[t].points[i].y == seq.scans[t].points[i].y);
      CHECK(result.sequence.scans[t].points[i].z == seq.scans[t].points[i].z);
      CHECK(result.labels[t][i] == labels[t][i]);
    }
  }

  // synthetic IDs start above the existing maximum
  for (const auto& rec : result.records) {
    CHECK(rec.instance_id > 9);
  }

  // pairwise per-frame AABB overlap audit over the records
  for (std::size_t a = 0; a < result.records.size(); ++a) {
    for (std::size_t b = a + 1; b < result.records.size(); ++b) {
      for (const auto& [fa, box_a] : result.records[a].frame_boxes) {
        for (const auto& [fb, box_b] : result.records[b].frame_boxes) {
          if (fa == fb) {
            CHECK_FALSE(aabb_overlap(box_a, box_b));
          }
        }
      }
    }
  }
}

TEST_CASE("placement is deterministic for a fixed seed") {
  Sequence window = empty_window(2);
  const std::vector<InstanceLabeling> labels{{}, {}};
  const ValidMap map = all_valid(60, 60, 0.5);
  const auto db = std::vector<ObjectSnippet>{box_snippet(1, 1.0, 2),
                                             box_snippet(2, 1.5, 1)};
  SynthConfig cfg;
  cfg.n_s = 50;
  cfg.seed = 31;
  const auto a = synth::place_objects(window, labels, map, flat_heights(map),
                                      db, cfg);
  const auto b = synth::place_objects(window, labels, map, flat_heights(map),
                                      db, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].anchor_x == b.records[i].anchor_x);
    CHECK(a.records[i].yaw == b.records[i].yaw);
  }
  for (std::size_t t = 0; t < a.sequence.size(); ++t) {
    REQUIRE(a.sequence.scans[t].points.size() ==
            b.sequence.scans[t].points.size());
    for (std::size_t i = 0; i < a.sequence.scans[t].points.size(); ++i) {
      CHECK(a.sequence.scans[t].points[i].x == b.sequence.scans[t].points[i].x);
    }
  }
}

TEST_CASE("object database round trips through the directory layout") {
  TempDir tmp("seq4d_db");
  const std::vector<ObjectSnippet> db{box_snippet(1, 1.0, 3),
                                      box_snippet(2, 0.6, 1)};
  synth::save_object_db(db, tmp.path);
  const auto back = synth::load_object_db(tmp.path);
  REQUIRE(back.size() == 2);
  REQUIRE(back[0].frames.size() == 3);
  REQUIRE(back[1].frames.size() == 1);
  CHECK(back[0].frames[2].frame_offset == 2);
  // float32 storage: compare through a float cast
  for (std::size_t f = 0; f < db[0].frames.size(); ++f) {
    REQUIRE(back[0].frames[f].points.size() == db[0].frames[f].points.size());
    for (std::size_t i = 0; i < db[0].frames[f].points.size(); ++i) {
      CHECK(back[0].frames[f].points[i].x ==
            static_cast<float>(db[0].frames[f].points[i].x));
    }
  }
}
