#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seq4d/ground.hpp"
#include "seq4d/rng.hpp"

using namespace seq4d;

namespace {

Scan flat_plane(int side, double spacing, double sigma, std::uint64_t seed) {
  Scan s;
  Rng rng(seed);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      double z = 0;
      if (sigma > 0) {
        const double u1 = 1.0 - rng.next_double();
        const double u2 = rng.next_double();
        z = sigma * std::sqrt(-2.0 * std::log(u1)) *
            std::cos(2.0 * 3.14159265358979323846 * u2);
      }
      s.points.push_back(Point{i * spacing, j * spacing, z, 0});
    }
  }
  return s;
}

}  // namespace

TEST_CASE("noiseless plane plus one outlier") {
  Scan s = flat_plane(12, 0.5, 0.0, 0);
  s.points.push_back(Point{2, 2, 5, 0});  // the outlier
  ground::GroundConfig cfg;
  cfg.inlier_threshold = 0.1;
  const auto mask = ground::segment_ground_ransac(s, cfg);
  REQUIRE(mask.size() == s.size());
  for (std::size_t i = 0; i + 1 < mask.size(); ++i) {
    CHECK(mask[i] == 1);
  }
  CHECK(mask.back() == 0);
}

TEST_CASE("vertical wall is rejected by the tilt gate") {
  Scan s;
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      s.points.push_back(Point{0.0, i * 0.3, j * 0.3, 0});  // x = 0 plane
    }
  }
  const auto mask = ground::segment_ground_ransac(s, ground::GroundConfig{});
  for (std::size_t i = 0; i < mask.size(); ++i) {
    CHECK(mask[i] == 0);
  }
}

TEST_CASE("fewer than 3 points yields an all-false mask") {
  Scan s;
  s.points.push_back(Point{0, 0, 0, 0});
  s.points.push_back(Point{1, 0, 0, 0});
  const auto mask = ground::segment_ground_ransac(s, ground::GroundConfig{});
  CHECK(mask == ground::GroundMask{0, 0});
}

TEST_CASE("fixed seed reproduces the exact mask") {
  Scan s = flat_plane(20, 0.4, 0.05, 42);
  ground::GroundConfig cfg;
  cfg.seed = 1234;
  const auto a = ground::segment_ground_ransac(s, cfg);
  const auto b = ground::segment_ground_ransac(s, cfg);
  CHECK(a == b);
}

TEST_CASE("noisy plane at threshold 3 sigma captures at least 99 percent") {
  const double sigma = 0.02;
  Scan s = flat_plane(40, 0.5, sigma, 7);
  ground::GroundConfig cfg;
  cfg.inlier_threshold = 3 * sigma;
  cfg.seed = 5;
  const auto mask = ground::segment_ground_ransac(s, cfg);
  std::size_t hits = 0;
  for (auto m : mask) {
    hits += m;
  }
  CHECK(static_cast<double>(hits) >= 0.99 * static_cast<double>(s.size()));
}

TEST_CASE("split_scan partitions and the index map restores order") {
  Scan s;
  for (int i = 0; i < 4; ++i) {
    s.points.push_back(Point{static_cast<double>(i), 0, 0, 0.25 * i});
  }

  SUBCASE("all ground") {
    const auto split = ground::split_scan(s, {1, 1, 1, 1});
    CHECK(split.objects.empty());
    CHECK(split.ground.size() == 4);
  }
  SUBCASE("all objects") {
    const auto split = ground::split_scan(s, {0, 0, 0, 0});
    CHECK(split.ground.empty());
    CHECK(split.objects.size() == 4);
  }
  SUBCASE("alternating mask") {
    const auto split = ground::split_scan(s, {1, 0, 1, 0});
    REQUIRE(split.ground.size() == 2);
    REQUIRE(split.objects.size() == 2);
    CHECK(split.ground_indices == std::vector<std::size_t>{0, 2});
    CHECK(split.object_indices == std::vector<std::size_t>{1, 3});
    // rebuild and compare
    std::vector<Point> rebuilt(4);
    for (std::size_t k = 0; k < split.ground_indices.size(); ++k) {
      rebuilt[split.ground_indices[k]] = split.ground.points[k];
    }
    for (std::size_t k = 0; k < split.object_indices.size(); ++k) {
      rebuilt[split.object_indices[k]] = split.objects.points[k];
    }
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(rebuilt[i].x == s.points[i].x);
      CHECK(rebuilt[i].intensity == s.points[i].intensity);
    }
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS(ground::split_scan(s, {1, 0}));
  }
}

TEST_CASE("split sizes always sum to the scan size") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Scan s;
    ground::GroundMask mask;
    const int n = 1 + static_cast<int>(rng.next_index(40));
    for (int i = 0; i < n; ++i) {
      s.points.push_back(
          Point{rng.next_in(-5, 5), rng.next_in(-5, 5), rng.next_in(-5, 5), 0});
      mask.push_back(rng.next_bool() ? 1 : 0);
    }
    const auto split = ground::split_scan(s, mask);
    CHECK(split.ground.size() + split.objects.size() == s.size());
  }
}
