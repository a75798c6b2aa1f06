// Core geometry primitives and the shared data model for LiDAR scans,
// sequences, ego poses and per-point instance labelings.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace seq4d {

// One LiDAR return. Coordinates are meters in the sensor frame and must be
// finite; intensity is the raw reflectance value and is carried through
// every transform untouched.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;
};

struct Scan {
  std::vector<Point> points;
  int frame_index = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Rigid sensor-to-world transform. The constructor rejects matrices that are
// not orthonormal (RtR = I within 1e-6) or not proper rotations (det = +1
// within 1e-6).
class Pose {
 public:
  Pose();
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }
  Pose inverse() const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

// Ordered scans plus one ego pose per scan.
struct Sequence {
  std::vector<Scan> scans;
  std::vector<Pose> poses;

  std::size_t size() const { return scans.size(); }

  // Throws if |scans| != |poses| or frame indices are not strictly increasing.
  void validate() const;
};

// Per-point instance IDs for one scan. ID 0 is reserved for
// unassigned/background; clustering and synthesis allocate from 1 upward.
using InstanceLabeling = std::vector<std::uint32_t>;

// Axis-aligned box in the bird's-eye-view (x-y) plane.
struct Aabb2D {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

// Applies pose to every point (p' = R*p + t), preserving order and intensity.
// Throws if any input or output coordinate is non-finite.
Scan transform_scan(const Scan& scan, const Pose& pose);

// Tight min/max box over x and y; z is ignored. Throws "empty object" on an
// empty input.
Aabb2D bev_aabb(std::span<const Point> points);

// True iff the boxes overlap on both axes. Touching edges count as overlap.
bool aabb_overlap(const Aabb2D& a, const Aabb2D& b);

// Arithmetic mean of coordinates. Throws on empty input.
Eigen::Vector3d centroid(std::span<const Point> points);

}  // namespace seq4d
