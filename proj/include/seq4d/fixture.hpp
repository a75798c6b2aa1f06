// Synthetic toy scenes for tests and demos: a flat ground plane plus three
// well-separated boxes, one moving at constant speed, with exact ground-truth
// labels. No dataset download needed.
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "seq4d/core.hpp"

namespace seq4d::fixture {

struct FixtureConfig {
  int num_scans = 10;
  double plane_half_extent = 20.0;  // ground covers [-e, e]^2
  double plane_spacing = 0.4;
  double plane_noise_sigma = 0.0;
  int box_points = 240;          // returns per box per frame
  double moving_speed = 1.0;     // meters per frame, +x
  double ego_step = 0.1;         // ego translation per frame, +y
  std::uint64_t seed = 0;
};

struct Fixture {
  Sequence sequence;                        // sensor-frame scans + poses
  std::vector<InstanceLabeling> gt_labels;  // ground 0, boxes 1..3
};

Fixture generate(const FixtureConfig& cfg);

// Writes out_dir/scans/NNNNNN.bin, out_dir/labels/NNNNNN.label and
// out_dir/poses.txt.
void write(const Fixture& fixture, const std::filesystem::path& out_dir);

}  // namespace seq4d::fixture
