#include "seq4d/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "seq4d/io.hpp"
#include "seq4d/rng.hpp"

namespace seq4d::synth {

bool ValidMap::cell_index(double x, double y, int& ix, int& iy) const {
  if (empty_map()) {
    return false;
  }
  ix = static_cast<int>(std::floor((x - origin_x) / resolution));
  iy = static_cast<int>(std::floor((y - origin_y) / resolution));
  return ix >= 0 && ix < width && iy >= 0 && iy < height;
}

bool ValidMap::valid(double x, double y) const {
  int ix, iy;
  if (!cell_index(x, y, ix, iy)) {
    return false;
  }
  return cell(ix, iy) != 0;
}

std::pair<double, double> ValidMap::cell_center(int ix, int iy) const {
  return {origin_x + (ix + 0.5) * resolution,
          origin_y + (iy + 0.5) * resolution};
}

std::vector<std::pair<int, int>> ValidMap::valid_cells() const {
  std::vector<std::pair<int, int>> out;
  for (int iy = 0; iy < height; ++iy) {
    for (int ix = 0; ix < width; ++ix) {
      if (cell(ix, iy)) {
        out.emplace_back(ix, iy);
      }
    }
  }
  return out;
}

ValidMap build_validmap(std::span<const Point> ground, double resolution,
                        double origin_x, double origin_y, int width,
                        int height) {
  if (resolution <= 0) {
    throw std::invalid_argument("validmap resolution must be > 0");
  }
  ValidMap map;
  map.resolution = resolution;
  map.origin_x = origin_x;
  map.origin_y = origin_y;
  map.width = width;
  map.height = height;
  map.cells.assign(static_cast<std::size_t>(width) * height, 0);
  for (const Point& p : ground) {
    int ix, iy;
    if (map.cell_index(p.x, p.y, ix, iy)) {
      map.cell(ix, iy) = 1;
    }
  }
  return map;
}

ValidMap build_validmap(const Scan& ground, double resolution) {
  if (resolution <= 0) {
    throw std::invalid_argument("validmap resolution must be > 0");
  }
  if (ground.points.empty()) {
    ValidMap map;
    map.resolution = resolution;
    return map;  // all invalid
  }
  const Aabb2D box = bev_aabb(ground.points);
  const int width =
      static_cast<int>(std::floor((box.x_max - box.x_min) / resolution)) + 1;
  const int height =
      static_cast<int>(std::floor((box.y_max - box.y_min) / resolution)) + 1;
  return build_validmap(ground.points, resolution, box.x_min, box.y_min, width,
                        height);
}

GroundHeightMap GroundHeightMap::build(std::span<const Point> ground,
                                       const ValidMap& map) {
  GroundHeightMap hm;
  hm.frame = map;
  hm.frame.cells.clear();
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
  hm.mean_z.assign(n, 0.0);
  hm.counts.assign(n, 0);
  for (const Point& p : ground) {
    int ix, iy;
    if (map.cell_index(p.x, p.y, ix, iy)) {
      const std::size_t c = static_cast<std::size_t>(iy) * map.width + ix;
      hm.mean_z[c] += p.z;
      hm.counts[c] += 1;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (hm.counts[c] > 0) {
      hm.mean_z[c] /= hm.counts[c];
    }
  }
  return hm;
}

double GroundHeightMap::height_at(int ix, int iy) const {
  const std::size_t c = static_cast<std::size_t>(iy) * frame.width + ix;
  return counts.empty() || counts[c] == 0 ? 0.0 : mean_z[c];
}

std::vector<ObjectSnippet> extract_object_db(
    const Sequence& seq, std::span<const cluster::WindowPseudoLabels> windows,
    const SynthConfig& cfg) {
  seq.validate();
  std::vector<ObjectSnippet> db;
  for (const auto& window : windows) {
    // World-frame points per (instance, frame), frames in temporal order.
    std::map<std::uint32_t, std::map<int, std::vector<Point>>> instances;
    for (std::size_t f = 0; f < window.labels.size(); ++f) {
      const int scan_idx = window.start_frame + static_cast<int>(f);
      const Scan world =
          transform_scan(seq.scans[scan_idx], seq.poses[scan_idx]);
      const InstanceLabeling& ids = window.labels[f];
      if (ids.size() != world.points.size()) {
        throw std::invalid_argument("label length does not match scan " +
                                    std::to_string(scan_idx));
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] != 0) {
          instances[ids[i]][static_cast<int>(f)].push_back(world.points[i]);
        }
      }
    }
    for (const auto& [id, frames] : instances) {
      std::size_t max_frame_points = 0;
      for (const auto& [f, pts] : frames) {
        max_frame_points = std::max(max_frame_points, pts.size());
      }
      if (max_frame_points < static_cast<std::size_t>(cfg.min_points)) {
        continue;
      }
      ObjectSnippet snip;
      snip.id = static_cast<std::uint32_t>(db.size()) + 1;
      const int first_frame = frames.begin()->first;
      const auto& first_points = frames.begin()->second;
      const Eigen::Vector3d c = centroid(first_points);
      double min_z = std::numeric_limits<double>::infinity();
      for (const Point& p : first_points) {
        min_z = std::min(min_z, p.z);
      }
      for (const auto& [f, pts] : frames) {
        SnippetFrame sf;
        sf.frame_offset = f - first_frame;
        sf.points.reserve(pts.size());
        for (const Point& p : pts) {
          sf.points.push_back(
              Point{p.x - c.x(), p.y - c.y(), p.z - min_z, p.intensity});
        }
        snip.frames.push_back(std::move(sf));
      }
      db.push_back(std::move(snip));
    }
  }
  return db;
}

namespace {

// Collision tests run on boxes inflated by this margin. Scan files store
// float32, so pasted points round by up to ~1e-6 m; the margin keeps
// accepted placements separated even after that rounding.
constexpr double kCollisionMargin = 1e-3;

Aabb2D inflate(const Aabb2D& box, double margin) {
  return Aabb2D{box.x_min - margin, box.x_max + margin, box.y_min - margin,
                box.y_max + margin};
}

Point rotate_z(const Point& p, double cos_yaw, double sin_yaw) {
  return Point{cos_yaw * p.x - sin_yaw * p.y, sin_yaw * p.x + cos_yaw * p.y,
               p.z, p.intensity};
}

Aabb2D placed_aabb(const SnippetFrame& frame, double cos_yaw, double sin_yaw,
                   double ax, double ay) {
  Aabb2D box{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const Point& p : frame.points) {
    const Point r = rotate_z(p, cos_yaw, sin_yaw);
    box.x_min = std::min(box.x_min, r.x + ax);
    box.x_max = std::max(box.x_max, r.x + ax);
    box.y_min = std::min(box.y_min, r.y + ay);
    box.y_max = std::max(box.y_max, r.y + ay);
  }
  return box;
}

}  // namespace

PlacementResult place_objects(const Sequence& window,
                              std::span<const InstanceLabeling> existing_labels,
                              const ValidMap& validmap,
                              const GroundHeightMap& heights,
                              std::span<const ObjectSnippet> db,
                              const SynthConfig& cfg) {
  window.validate();
  if (cfg.n_s < 0) {
    throw std::invalid_argument("synth.n_s must be >= 0");
  }
  if (existing_labels.size() != window.size()) {
    throw std::invalid_argument("need one labeling per window scan");
  }

  PlacementResult out;
  out.sequence = window;
  out.labels.assign(existing_labels.begin(), existing_labels.end());
  if (cfg.n_s == 0 || db.empty()) {
    return out;
  }

  const auto anchors = validmap.valid_cells();
  if (anchors.empty()) {
    std::fprintf(stderr, "warning: ValidMap has no valid cells, nothing placed\n");
    return out;
  }

  // AABBs of pre-existing labeled instances per frame, in world coordinates.
  const int n_frames = static_cast<int>(window.size());
  std::vector<std::vector<Aabb2D>> existing_boxes(n_frames);
  std::uint32_t max_existing_id = 0;
  for (int f = 0; f < n_frames; ++f) {
    const Scan world = transform_scan(window.scans[f], window.poses[f]);
    std::map<std::uint32_t, std::vector<Point>> by_id;
    for (std::size_t i = 0; i < existing_labels[f].size(); ++i) {
      const std::uint32_t id = existing_labels[f][i];
      if (id != 0) {
        by_id[id].push_back(world.points[i]);
        max_existing_id = std::max(max_existing_id, id);
      }
    }
    if (cfg.collide_existing) {
      for (const auto& [id, pts] : by_id) {
        existing_boxes[f].push_back(bev_aabb(pts));
      }
    }
  }

  Rng rng(cfg.seed);
  std::uint32_t next_id = max_existing_id + 1;
  std::vector<std::vector<Aabb2D>> placed_boxes(n_frames);

  for (int attempt = 0; attempt < cfg.n_s; ++attempt) {
    // One fixed-length draw per attempt keeps the stream deterministic.
    const ObjectSnippet& snip = db[rng.next_index(db.size())];
    const auto [ix, iy] = anchors[rng.next_index(anchors.size())];
    const double yaw = rng.next_in(0.0, 2.0 * std::numbers::pi);
    const auto [ax, ay] = validmap.cell_center(ix, iy);
    const double cos_yaw = std::cos(yaw);
    const double sin_yaw = std::sin(yaw);

    std::vector<std::pair<int, Aabb2D>> frame_boxes;
    for (const SnippetFrame& sf : snip.frames) {
      if (sf.frame_offset >= 0 && sf.frame_offset < n_frames) {
        frame_boxes.emplace_back(sf.frame_offset,
                                 placed_aabb(sf, cos_yaw, sin_yaw, ax, ay));
      }
    }
    if (frame_boxes.empty()) {
      continue;
    }

    // Reject when the box center leaves the valid region.
    const Aabb2D& first_box = frame_boxes.front().second;
    const double cx = 0.5 * (first_box.x_min + first_box.x_max);
    const double cy = 0.5 * (first_box.y_min + first_box.y_max);
    if (!validmap.valid(cx, cy)) {
      continue;
    }

    bool collides = false;
    for (const auto& [f, box] : frame_boxes) {
      const Aabb2D padded = inflate(box, kCollisionMargin);
      for (const Aabb2D& other : placed_boxes[f]) {
        if (aabb_overlap(padded, other)) {
          collides = true;
          break;
        }
      }
      if (!collides && cfg.collide_existing) {
        for (const Aabb2D& other : existing_boxes[f]) {
          if (aabb_overlap(padded, other)) {
            collides = true;
            break;
          }
        }
      }
      if (collides) {
        break;
      }
    }
    if (collides) {
      continue;
    }

    // Accept: paste into every frame the snippet spans.
    const double z_base = heights.height_at(ix, iy);
    for (const SnippetFrame& sf : snip.frames) {
      if (sf.frame_offset < 0 || sf.frame_offset >= n_frames) {
        continue;
      }
      const int f = sf.frame_offset;
      const Pose to_sensor = window.poses[f].inverse();
      for (const Point& p : sf.points) {
        const Point w = rotate_z(p, cos_yaw, sin_yaw);
        const Eigen::Vector3d sensor =
            to_sensor.apply(Eigen::Vector3d(w.x + ax, w.y + ay, w.z + z_base));
        out.sequence.scans[f].points.push_back(
            Point{sensor.x(), sensor.y(), sensor.z(), p.intensity});
        out.labels[f].push_back(next_id);
      }
    }
    for (auto& [f, box] : frame_boxes) {
      placed_boxes[f].push_back(box);
    }
    PlacementRecord rec;
    rec.snippet_id = snip.id;
    rec.anchor_x = ax;
    rec.anchor_y = ay;
    rec.yaw = yaw;
    rec.frame_boxes = std::move(frame_boxes);
    rec.instance_id = next_id;
    out.records.push_back(std::move(rec));
    ++next_id;
  }
  return out;
}

PlacementResult synth_sequence(const Sequence& seq,
                               std::span<const InstanceLabeling> labels,
                               std::span<const ObjectSnippet> db,
                               const SynthConfig& cfg,
                               const ground::GroundConfig& gcfg, int threads) {
  const auto masks = cluster::sequence_ground_masks(seq, gcfg, threads);
  return synth_sequence(seq, labels, db, cfg, masks);
}

PlacementResult synth_sequence(const Sequence& seq,
                               std::span<const InstanceLabeling> labels,
                               std::span<const ObjectSnippet> db,
                               const SynthConfig& cfg,
                               std::span<const ground::GroundMask> masks) {
  seq.validate();
  if (labels.size() != seq.size()) {
    throw std::invalid_argument("need one labeling per scan");
  }
  if (masks.size() != seq.size()) {
    throw std::invalid_argument("need one ground mask per scan");
  }
  for (std::size_t s = 0; s < seq.size(); ++s) {
    if (labels[s].size() != seq.scans[s].points.size()) {
      throw std::invalid_argument("label length does not match scan " +
                                  std::to_string(s));
    }
  }
  Scan ground_world;
  for (std::size_t s = 0; s < seq.size(); ++s) {
    const auto split = ground::split_scan(seq.scans[s], masks[s]);
    const Scan world = transform_scan(split.ground, seq.poses[s]);
    ground_world.points.insert(ground_world.points.end(), world.points.begin(),
                               world.points.end());
  }
  const ValidMap map = build_validmap(ground_world, cfg.validmap_res);
  const GroundHeightMap heights =
      GroundHeightMap::build(ground_world.points, map);
  return place_objects(seq, labels, map, heights, db, cfg);
}

void save_object_db(std::span<const ObjectSnippet> db,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char name[32];
  for (const ObjectSnippet& snip : db) {
    std::snprintf(name, sizeof(name), "obj_%06u", snip.id);
    const std::filesystem::path obj_dir = dir / name;
    std::filesystem::create_directories(obj_dir);
    std::ofstream manifest(obj_dir / "manifest.txt", std::ios::trunc);
    if (!manifest) {
      throw std::runtime_error("cannot write manifest in " + obj_dir.string());
    }
    for (std::size_t f = 0; f < snip.frames.size(); ++f) {
      std::snprintf(name, sizeof(name), "%06zu.bin", f);
      manifest << snip.frames[f].frame_offset << ' ' << name << '\n';
      Scan scan;
      scan.points = snip.frames[f].points;
      io::write_scan(scan, obj_dir / name);
    }
  }
}

std::vector<ObjectSnippet> load_object_db(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> obj_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory()) {
      obj_dirs.push_back(entry.path());
    }
  }
  std::sort(obj_dirs.begin(), obj_dirs.end());
  std::vector<ObjectSnippet> db;
  for (const auto& obj_dir : obj_dirs) {
    std::ifstream manifest(obj_dir / "manifest.txt");
    if (!manifest) {
      throw std::runtime_error("missing manifest.txt in " + obj_dir.string());
    }
    ObjectSnippet snip;
    snip.id = static_cast<std::uint32_t>(db.size()) + 1;
    int offset;
    std::string file;
    while (manifest >> offset >> file) {
      SnippetFrame sf;
      sf.frame_offset = offset;
      sf.points = io::read_scan(obj_dir / file).points;
      if (sf.points.empty()) {
        throw std::runtime_error("empty snippet frame: " +
                                 (obj_dir / file).string());
      }
      snip.frames.push_back(std::move(sf));
    }
    if (snip.frames.empty()) {
      throw std::runtime_error("object with no frames: " + obj_dir.string());
    }
    db.push_back(std::move(snip));
  }
  return db;
}

}  // namespace seq4d::synth
