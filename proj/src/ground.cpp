#include "seq4d/ground.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "seq4d/rng.hpp"

namespace seq4d::ground {

namespace {

struct Plane {
  Eigen::Vector3d normal;  // unit, nz >= 0
  double offset;           // normal . p = offset on the plane
};

bool plane_from_points(const Point& a, const Point& b, const Point& c,
                       Plane& out) {
  const Eigen::Vector3d pa(a.x, a.y, a.z);
  const Eigen::Vector3d ab = Eigen::Vector3d(b.x, b.y, b.z) - pa;
  const Eigen::Vector3d ac = Eigen::Vector3d(c.x, c.y, c.z) - pa;
  Eigen::Vector3d n = ab.cross(ac);
  const double norm = n.norm();
  if (norm < 1e-12) {
    return false;  // collinear sample
  }
  n /= norm;
  if (n.z() < 0) {
    n = -n;
  }
  out.normal = n;
  out.offset = n.dot(pa);
  return true;
}

}  // namespace

GroundMask segment_ground_ransac(const Scan& scan, const GroundConfig& cfg) {
  if (cfg.inlier_threshold <= 0) {
    throw std::invalid_argument("ground.inlier_threshold must be > 0");
  }
  if (cfg.iterations < 1) {
    throw std::invalid_argument("ground.iterations must be >= 1");
  }
  const std::size_t n = scan.points.size();
  GroundMask mask(n, 0);
  if (n < 3) {
    std::fprintf(stderr,
                 "warning: scan %d has %zu points, skipping ground fit\n",
                 scan.frame_index, n);
    return mask;
  }

  const double cos_max_tilt =
      std::cos(cfg.max_normal_tilt_deg * std::numbers::pi / 180.0);
  Rng rng(cfg.seed);
  Plane best{};
  std::size_t best_inliers = 0;
  bool have_plane = false;

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::size_t i = rng.next_index(n);
    std::size_t j = rng.next_index(n);
    std::size_t k = rng.next_index(n);
    if (i == j || i == k || j == k) {
      continue;
    }
    Plane cand;
    if (!plane_from_points(scan.points[i], scan.points[j], scan.points[k],
                           cand)) {
      continue;
    }
    if (cand.normal.z() < cos_max_tilt) {
      continue;  // tilt gate: near-vertical surfaces are never ground
    }
    std::size_t inliers = 0;
    for (const Point& p : scan.points) {
      const double d =
          std::abs(cand.normal.dot(Eigen::Vector3d(p.x, p.y, p.z)) -
                   cand.offset);
      if (d <= cfg.inlier_threshold) {
        ++inliers;
      }
    }
    if (!have_plane || inliers > best_inliers) {
      best = cand;
      best_inliers = inliers;
      have_plane = true;
    }
  }

  if (!have_plane) {
    return mask;  // e.g. everything on a vertical wall
  }
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Point& p = scan.points[idx];
    const double d = std::abs(
        best.normal.dot(Eigen::Vector3d(p.x, p.y, p.z)) - best.offset);
    mask[idx] = d <= cfg.inlier_threshold ? 1 : 0;
  }
  return mask;
}

SplitResult split_scan(const Scan& scan, const GroundMask& mask) {
  if (mask.size() != scan.points.size()) {
    throw std::invalid_argument("ground mask length does not match scan");
  }
  SplitResult out;
  out.ground.frame_index = scan.frame_index;
  out.objects.frame_index = scan.frame_index;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (mask[i]) {
      out.ground.points.push_back(scan.points[i]);
      out.ground_indices.push_back(i);
    } else {
      out.objects.points.push_back(scan.points[i]);
      out.object_indices.push_back(i);
    }
  }
  return out;
}

}  // namespace seq4d::ground
