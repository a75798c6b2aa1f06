// Unsupervised ground/non-ground split per scan. Ships a RANSAC plane fitter
// as the built-in segmenter; external masks (files, other segmenters) can be
// substituted anywhere a GroundMask is accepted.
#pragma once

#include <cstdint>
#include <vector>

#include "seq4d/core.hpp"

namespace seq4d::ground {

// One byte per point of a Scan, 1 = ground.
using GroundMask = std::vector<std::uint8_t>;

struct GroundConfig {
  double inlier_threshold = 0.25;   // meters to the fitted plane
  double max_normal_tilt_deg = 15;  // plane normal vs vertical
  int iterations = 200;
  std::uint64_t seed = 0;
};

// Fits a dominant plane by repeated 3-point sampling. Candidate planes whose
// normal tilts more than max_normal_tilt_deg from vertical are discarded;
// points within inlier_threshold of the best remaining plane are ground.
// Deterministic given cfg.seed. Scans with fewer than 3 points yield an
// all-false mask and a warning on stderr.
GroundMask segment_ground_ransac(const Scan& scan, const GroundConfig& cfg);

struct SplitResult {
  Scan ground;
  Scan objects;
  // Original point index per entry of ground/objects; together they restore
  // the input ordering exactly.
  std::vector<std::size_t> ground_indices;
  std::vector<std::size_t> object_indices;
};

// Partitions a scan by mask. Throws on length mismatch.
SplitResult split_scan(const Scan& scan, const GroundMask& mask);

}  // namespace seq4d::ground
