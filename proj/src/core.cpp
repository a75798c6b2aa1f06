#include "seq4d/core.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seq4d {

namespace {

bool finite(const Point& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

void check_rotation(const Eigen::Matrix3d& r) {
  const double ortho_err =
      (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-6) {
    throw std::invalid_argument("pose rotation is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > 1e-6) {
    throw std::invalid_argument("pose rotation determinant is not +1");
  }
}

}  // namespace

Pose::Pose()
    : rotation_(Eigen::Matrix3d::Identity()),
      translation_(Eigen::Vector3d::Zero()) {}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  check_rotation(rotation_);
}

Pose Pose::inverse() const {
  return Pose(rotation_.transpose(), -(rotation_.transpose() * translation_));
}

void Sequence::validate() const {
  if (scans.size() != poses.size()) {
    throw std::invalid_argument("sequence has " + std::to_string(scans.size()) +
                                " scans but " + std::to_string(poses.size()) +
                                " poses");
  }
  for (std::size_t i = 1; i < scans.size(); ++i) {
    if (scans[i].frame_index <= scans[i - 1].frame_index) {
      throw std::invalid_argument(
          "sequence frame indices are not strictly increasing");
    }
  }
}

Scan transform_scan(const Scan& scan, const Pose& pose) {
  Scan out;
  out.frame_index = scan.frame_index;
  out.points.reserve(scan.points.size());
  for (const Point& p : scan.points) {
    if (!finite(p)) {
      throw std::invalid_argument("non-finite point in scan");
    }
    const Eigen::Vector3d q = pose.apply(Eigen::Vector3d(p.x, p.y, p.z));
    if (!q.allFinite()) {
      throw std::invalid_argument("non-finite point after transform");
    }
    out.points.push_back(Point{q.x(), q.y(), q.z(), p.intensity});
  }
  return out;
}

Aabb2D bev_aabb(std::span<const Point> points) {
  if (points.empty()) {
    throw std::invalid_argument("empty object");
  }
  Aabb2D box{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (const Point& p : points) {
    box.x_min = std::min(box.x_min, p.x);
    box.x_max = std::max(box.x_max, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

bool aabb_overlap(const Aabb2D& a, const Aabb2D& b) {
  return a.x_min <= b.x_max && b.x_min <= a.x_max &&  //
         a.y_min <= b.y_max && b.y_min <= a.y_max;
}

Eigen::Vector3d centroid(std::span<const Point> points) {
  if (points.empty()) {
    throw std::invalid_argument("centroid of empty point set");
  }
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const Point& p : points) {
    sum += Eigen::Vector3d(p.x, p.y, p.z);
  }
  return sum / static_cast<double>(points.size());
}

}  // namespace seq4d
