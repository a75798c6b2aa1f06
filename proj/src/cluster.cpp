#include "seq4d/cluster.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <unordered_map>

#include "seq4d/parallel.hpp"
#include "seq4d/rng.hpp"

namespace seq4d::cluster {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Point& p, double cell_size) {
  return CellKey{
      static_cast<std::int64_t>(std::floor(p.x / cell_size)),
      static_cast<std::int64_t>(std::floor(p.y / cell_size)),
      static_cast<std::int64_t>(std::floor(p.z / cell_size)),
  };
}

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

AggregatedCloud aggregate_window(const Sequence& seq, int start, int len,
                                 std::span<const ground::GroundMask> masks) {
  seq.validate();
  if (len < 1 || start < 0 ||
      static_cast<std::size_t>(start + len) > seq.size()) {
    throw std::out_of_range("window [" + std::to_string(start) + ", " +
                            std::to_string(start + len) +
                            ") outside sequence of " +
                            std::to_string(seq.size()) + " scans");
  }
  if (!masks.empty() && masks.size() != seq.size()) {
    throw std::invalid_argument("need one ground mask per scan");
  }
  AggregatedCloud agg;
  for (int s = start; s < start + len; ++s) {
    const Scan world = transform_scan(seq.scans[s], seq.poses[s]);
    for (std::size_t i = 0; i < world.points.size(); ++i) {
      if (!masks.empty() && masks[s][i]) {
        continue;  // ground is excluded from clustering
      }
      agg.points.push_back(world.points[i]);
      agg.refs.push_back(PointRef{s, i});
    }
  }
  return agg;
}

VoxelGrid voxel_downsample(std::span<const Point> points, double voxel_size) {
  if (voxel_size <= 0) {
    throw std::invalid_argument("voxel_size must be > 0");
  }
  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  std::unordered_map<CellKey, std::size_t, CellKeyHash> slot_of_cell;
  slot_of_cell.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CellKey key = cell_of(points[i], voxel_size);
    auto [it, inserted] = slot_of_cell.try_emplace(key, grid.members.size());
    if (inserted) {
      grid.members.emplace_back();
    }
    grid.members[it->second].push_back(i);
  }
  grid.representatives.resize(grid.members.size());
  for (std::size_t c = 0; c < grid.members.size(); ++c) {
    Point rep{};
    for (std::size_t i : grid.members[c]) {
      rep.x += points[i].x;
      rep.y += points[i].y;
      rep.z += points[i].z;
      rep.intensity += points[i].intensity;
    }
    const double inv = 1.0 / static_cast<double>(grid.members[c].size());
    rep.x *= inv;
    rep.y *= inv;
    rep.z *= inv;
    rep.intensity *= inv;
    grid.representatives[c] = rep;
  }
  return grid;
}

std::vector<std::uint32_t> dbscan(std::span<const Point> points, double eps,
                                  int min_pts) {
  if (eps <= 0) {
    throw std::invalid_argument("eps must be > 0");
  }
  if (min_pts < 1) {
    throw std::invalid_argument("min_pts must be >= 1");
  }
  const std::size_t n = points.size();
  std::vector<std::uint32_t> labels(n, 0);
  if (n == 0) {
    return labels;
  }

  // Cell size == eps keeps every eps-neighbor within the 27-cell stencil.
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[cell_of(points[i], eps)].push_back(i);
  }

  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CellKey c = cell_of(points[i], eps);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells.find(CellKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end()) {
            continue;
          }
          for (std::size_t j : it->second) {
            if (dist2(points[i], points[j]) <= eps2) {
              neighbors[i].push_back(j);
            }
          }
        }
      }
    }
  }

  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);
  }

  // Connected components over core points, seeds in ascending index order.
  std::uint32_t next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || labels[i] != 0) {
      continue;
    }
    ++next_id;
    std::deque<std::size_t> queue{i};
    labels[i] = next_id;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (std::size_t q : neighbors[p]) {
        if (core[q] && labels[q] == 0) {
          labels[q] = next_id;
          queue.push_back(q);
        }
      }
    }
  }

  // Border points adopt the cluster of their lowest-index core neighbor.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      continue;
    }
    std::size_t lowest_core = n;
    for (std::size_t q : neighbors[i]) {
      if (core[q] && q < lowest_core) {
        lowest_core = q;
      }
    }
    labels[i] = lowest_core < n ? labels[lowest_core] : 0;
  }
  return labels;
}

WindowPseudoLabels upsample_labels(const VoxelGrid& grid,
                                   std::span<const std::uint32_t> rep_labels,
                                   const AggregatedCloud& agg,
                                   const Sequence& seq, int start, int len) {
  if (rep_labels.size() != grid.representatives.size()) {
    throw std::invalid_argument(
        "one label per voxel representative expected");
  }
  WindowPseudoLabels out;
  out.start_frame = start;
  out.labels.resize(static_cast<std::size_t>(len));
  for (int s = 0; s < len; ++s) {
    out.labels[s].assign(seq.scans[start + s].points.size(), 0);
  }
  std::uint32_t max_id = 0;
  for (std::size_t c = 0; c < grid.members.size(); ++c) {
    const std::uint32_t id = rep_labels[c];
    max_id = std::max(max_id, id);
    if (id == 0) {
      continue;  // noise cells keep label 0
    }
    for (std::size_t member : grid.members[c]) {
      const PointRef& ref = agg.refs[member];
      out.labels[ref.scan_index - start][ref.point_index] = id;
    }
  }
  out.cluster_count = max_id;
  return out;
}

std::vector<ground::GroundMask> sequence_ground_masks(
    const Sequence& seq, const ground::GroundConfig& gcfg, int threads) {
  std::vector<ground::GroundMask> masks(seq.size());
  parallel_for(seq.size(), threads, [&](std::size_t s) {
    ground::GroundConfig per_scan = gcfg;
    per_scan.seed = derive_seed(gcfg.seed, s);
    masks[s] = ground::segment_ground_ransac(seq.scans[s], per_scan);
  });
  return masks;
}

std::vector<WindowPseudoLabels> pseudo_label_sequence(
    const Sequence& seq, const ClusterConfig& ccfg,
    const ground::GroundConfig& gcfg, int threads) {
  const auto masks = sequence_ground_masks(seq, gcfg, threads);
  return pseudo_label_sequence(seq, ccfg, masks, threads);
}

std::vector<WindowPseudoLabels> pseudo_label_sequence(
    const Sequence& seq, const ClusterConfig& ccfg,
    std::span<const ground::GroundMask> masks, int threads) {
  seq.validate();
  if (ccfg.window_len < 1) {
    throw std::invalid_argument("cluster.window_len must be >= 1");
  }
  if (ccfg.stride < 1) {
    throw std::invalid_argument("cluster.stride must be >= 1");
  }
  if (masks.size() != seq.size()) {
    throw std::invalid_argument("need one ground mask per scan");
  }

  std::vector<int> starts;
  for (int start = 0; start < static_cast<int>(seq.size());
       start += ccfg.stride) {
    starts.push_back(start);
  }
  std::vector<WindowPseudoLabels> windows(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t w) {
    const int start = starts[w];
    const int len =
        std::min(ccfg.window_len, static_cast<int>(seq.size()) - start);
    const AggregatedCloud agg = aggregate_window(seq, start, len, masks);
    const VoxelGrid grid = voxel_downsample(agg.points, ccfg.voxel_size);
    const auto rep_labels =
        dbscan(grid.representatives, ccfg.eps, ccfg.min_pts);
    windows[w] = upsample_labels(grid, rep_labels, agg, seq, start, len);
  });
  return windows;
}

}  // namespace seq4d::cluster
