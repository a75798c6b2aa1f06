// Point cloud sequence synthesis: a binary BEV occupancy map over ground
// points defines where objects may be placed; tracked object snippets from a
// database are then pasted into every frame of a window with per-frame
// AABB collision rejection.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "seq4d/cluster.hpp"
#include "seq4d/core.hpp"
#include "seq4d/ground.hpp"

namespace seq4d::synth {

struct SynthConfig {
  int n_s = 600;               // placement attempts per window
  double validmap_res = 0.5;   // BEV cell size, meters
  int min_points = 30;         // extraction threshold per instance frame
  std::uint64_t seed = 0;
  // Also reject snippets whose boxes hit pre-existing labeled instances.
  // Disable to test only against previously placed synthetic objects.
  bool collide_existing = true;
};

// Binary BEV grid; a cell is valid iff at least one ground point fell in it.
struct ValidMap {
  double resolution = 0.5;
  double origin_x = 0.0;
  double origin_y = 0.0;
  int width = 0;   // cells along x
  int height = 0;  // cells along y
  std::vector<std::uint8_t> cells;  // row-major, iy * width + ix

  bool empty_map() const { return width == 0 || height == 0; }
  std::uint8_t& cell(int ix, int iy) { return cells[iy * width + ix]; }
  std::uint8_t cell(int ix, int iy) const { return cells[iy * width + ix]; }

  // floor((coord - origin) / resolution); false when outside the grid.
  bool cell_index(double x, double y, int& ix, int& iy) const;
  bool valid(double x, double y) const;
  std::pair<double, double> cell_center(int ix, int iy) const;
  // Valid cells in row-major order (deterministic).
  std::vector<std::pair<int, int>> valid_cells() const;
};

// Builds the map over the bounding rectangle of the ground points, origin at
// their BEV min corner. Empty ground yields an empty (all-invalid) map.
ValidMap build_validmap(const Scan& ground, double resolution);

// Same, with an explicit grid frame; points outside the grid are ignored.
ValidMap build_validmap(std::span<const Point> ground, double resolution,
                        double origin_x, double origin_y, int width,
                        int height);

// Mean ground z per ValidMap cell; used to rest placed objects on the ground.
struct GroundHeightMap {
  ValidMap frame;  // geometry only; cells unused
  std::vector<double> mean_z;
  std::vector<std::uint32_t> counts;

  static GroundHeightMap build(std::span<const Point> ground,
                               const ValidMap& map);
  double height_at(int ix, int iy) const;
};

// A temporally tracked object in object-local coordinates: the BEV centroid
// of its first frame sits at the origin and that frame's lowest point at
// z = 0, so later frames keep the recorded motion.
struct SnippetFrame {
  int frame_offset = 0;
  std::vector<Point> points;
};

struct ObjectSnippet {
  std::uint32_t id = 0;
  std::vector<SnippetFrame> frames;
};

// Collects every pseudo-instance that has at least cfg.min_points in some
// frame into a snippet (world-frame points, then re-centered as above).
// Undersized instances are skipped silently.
std::vector<ObjectSnippet> extract_object_db(
    const Sequence& seq, std::span<const cluster::WindowPseudoLabels> windows,
    const SynthConfig& cfg);

struct PlacementRecord {
  std::uint32_t snippet_id = 0;
  double anchor_x = 0.0;
  double anchor_y = 0.0;
  double yaw = 0.0;  // radians
  std::vector<std::pair<int, Aabb2D>> frame_boxes;  // (window frame, box)
  std::uint32_t instance_id = 0;
};

struct PlacementResult {
  Sequence sequence;
  std::vector<InstanceLabeling> labels;
  std::vector<PlacementRecord> records;
};

// Draws cfg.n_s snippets from the database with replacement; each gets a
// uniform valid anchor cell and uniform yaw, is rejected when its first-frame
// box center leaves the valid region or any frame box overlaps an already
// accepted (or, with collide_existing, pre-existing) box, and is otherwise
// pasted into every window frame it spans under a fresh instance ID.
// Rejected draws are not retried. Deterministic given cfg.seed.
PlacementResult place_objects(const Sequence& window,
                              std::span<const InstanceLabeling> existing_labels,
                              const ValidMap& validmap,
                              const GroundHeightMap& heights,
                              std::span<const ObjectSnippet> db,
                              const SynthConfig& cfg);

// Ground split -> ValidMap -> placement -> merge, over the whole sequence as
// one window. Original points and labels are preserved bit-exactly; synthetic
// instances get IDs above the existing maximum.
PlacementResult synth_sequence(const Sequence& seq,
                               std::span<const InstanceLabeling> labels,
                               std::span<const ObjectSnippet> db,
                               const SynthConfig& cfg,
                               const ground::GroundConfig& gcfg,
                               int threads = 1);

// Same with externally supplied ground masks (one per scan).
PlacementResult synth_sequence(const Sequence& seq,
                               std::span<const InstanceLabeling> labels,
                               std::span<const ObjectSnippet> db,
                               const SynthConfig& cfg,
                               std::span<const ground::GroundMask> masks);

// Database layout: one directory per object holding one scan file per frame
// plus manifest.txt with the frame offsets in file order.
void save_object_db(std::span<const ObjectSnippet> db,
                    const std::filesystem::path& dir);
std::vector<ObjectSnippet> load_object_db(const std::filesystem::path& dir);

}  // namespace seq4d::synth
