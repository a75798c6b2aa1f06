// Spatio-temporal clustering over pose-aligned, temporally aggregated scans.
// Non-ground points of a window are accumulated in the world frame,
// voxel-downsampled, density-clustered, and the cluster IDs are propagated
// back to full resolution as per-scan pseudo-labels.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seq4d/core.hpp"
#include "seq4d/ground.hpp"

namespace seq4d::cluster {

struct ClusterConfig {
  int window_len = 12;     // scans per temporal window
  int stride = 12;         // window step; == window_len means non-overlapping
  double voxel_size = 0.15;  // clustering grid, meters
  double eps = 0.5;          // density radius, meters
  int min_pts = 5;           // neighbors (self included) for a core point
};

struct PointRef {
  int scan_index;          // absolute index into the sequence
  std::size_t point_index; // index into that scan
};

struct AggregatedCloud {
  std::vector<Point> points;   // world frame
  std::vector<PointRef> refs;  // provenance, aligned with points
};

// Transforms the non-ground points of scans [start, start+len) to the world
// frame. masks must either be empty (all points kept) or hold one mask per
// scan of the sequence. Throws if the window is out of range.
AggregatedCloud aggregate_window(const Sequence& seq, int start, int len,
                                 std::span<const ground::GroundMask> masks);

// Occupied cells of a voxel grid. Cell index = floor(coord / voxel_size) per
// axis, so a point exactly on a boundary k*voxel_size belongs to cell k.
// Representatives are the centroids of their member points and appear in
// first-occupancy order of the input, which makes downstream clustering
// deterministic for a given input order.
struct VoxelGrid {
  double voxel_size = 0.0;
  std::vector<Point> representatives;
  std::vector<std::vector<std::size_t>> members;  // input indices per cell
};

VoxelGrid voxel_downsample(std::span<const Point> points, double voxel_size);

// Density clustering with a fixed radius. A point is core when it has at
// least min_pts neighbors within eps (inclusive, itself counted). Clusters
// are connected sets of core points, numbered from 1 in order of their
// lowest core index; non-core points adopt the cluster of their lowest-index
// core neighbor, or 0 (noise) if none. Neighbor search uses an integer cell
// hash with a 27-cell stencil at cell size eps, which is exact.
std::vector<std::uint32_t> dbscan(std::span<const Point> points, double eps,
                                  int min_pts);

struct WindowPseudoLabels {
  int start_frame = 0;                   // absolute index of the first scan
  std::vector<InstanceLabeling> labels;  // one per scan in the window
  std::uint32_t cluster_count = 0;
};

// Propagates representative cluster IDs to every member point and back
// through provenance to (scan, point) slots; untouched points stay 0.
WindowPseudoLabels upsample_labels(const VoxelGrid& grid,
                                   std::span<const std::uint32_t> rep_labels,
                                   const AggregatedCloud& agg,
                                   const Sequence& seq, int start, int len);

// Full pseudo-labeling pass: sliding windows of ccfg.window_len scans with
// ccfg.stride, ground-segmented with gcfg (per-scan seeds derived from
// gcfg.seed), clustered as above. IDs are window-local.
std::vector<WindowPseudoLabels> pseudo_label_sequence(
    const Sequence& seq, const ClusterConfig& ccfg,
    const ground::GroundConfig& gcfg, int threads = 1);

// Same pass over externally supplied ground masks (one per scan), e.g. from
// a stronger ground segmenter; the built-in RANSAC is bypassed entirely.
std::vector<WindowPseudoLabels> pseudo_label_sequence(
    const Sequence& seq, const ClusterConfig& ccfg,
    std::span<const ground::GroundMask> masks, int threads = 1);

// Ground masks for every scan of the sequence, per-scan seeded so results do
// not depend on evaluation order or thread count.
std::vector<ground::GroundMask> sequence_ground_masks(
    const Sequence& seq, const ground::GroundConfig& gcfg, int threads = 1);

}  // namespace seq4d::cluster
