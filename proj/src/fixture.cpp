#include "seq4d/fixture.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "seq4d/io.hpp"
#include "seq4d/rng.hpp"

namespace seq4d::fixture {

namespace {

double gaussian(Rng& rng, double sigma) {
  const double u1 = 1.0 - rng.next_double();  // (0,1]
  const double u2 = rng.next_double();
  return sigma * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

struct Box {
  double cx, cy;      // footprint center at frame 0
  double speed_x;     // meters per frame
  std::uint32_t id;
};

}  // namespace

Fixture generate(const FixtureConfig& cfg) {
  const Box boxes[] = {
      {6.0, 6.0, 0.0, 1},
      {-7.0, 5.0, 0.0, 2},
      {-8.0, -6.0, cfg.moving_speed, 3},
  };

  Fixture fx;
  for (int t = 0; t < cfg.num_scans; ++t) {
    Scan world;
    world.frame_index = t;
    InstanceLabeling labels;

    Rng plane_rng(derive_seed(cfg.seed, 1000 + t));
    const int cells =
        static_cast<int>(std::round(2 * cfg.plane_half_extent /
                                    cfg.plane_spacing)) + 1;
    for (int gx = 0; gx < cells; ++gx) {
      for (int gy = 0; gy < cells; ++gy) {
        Point p;
        p.x = -cfg.plane_half_extent + gx * cfg.plane_spacing;
        p.y = -cfg.plane_half_extent + gy * cfg.plane_spacing;
        p.z = cfg.plane_noise_sigma > 0
                  ? gaussian(plane_rng, cfg.plane_noise_sigma)
                  : 0.0;
        p.intensity = plane_rng.next_double();
        world.points.push_back(p);
        labels.push_back(0);
      }
    }

    for (const Box& box : boxes) {
      Rng box_rng(derive_seed(cfg.seed, 2000 + 100 * box.id + t));
      const double cx = box.cx + box.speed_x * t;
      for (int i = 0; i < cfg.box_points; ++i) {
        Point p;
        p.x = cx + box_rng.next_in(-0.5, 0.5);
        p.y = box.cy + box_rng.next_in(-0.5, 0.5);
        p.z = box_rng.next_in(0.4, 1.6);
        p.intensity = box_rng.next_double();
        world.points.push_back(p);
        labels.push_back(box.id);
      }
    }

    const Pose pose(Eigen::Matrix3d::Identity(),
                    Eigen::Vector3d(0.0, cfg.ego_step * t, 0.0));
    fx.sequence.scans.push_back(transform_scan(world, pose.inverse()));
    fx.sequence.scans.back().frame_index = t;
    fx.sequence.poses.push_back(pose);
    fx.gt_labels.push_back(std::move(labels));
  }
  return fx;
}

void write(const Fixture& fixture, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "scans");
  std::filesystem::create_directories(out_dir / "labels");
  char name[32];
  for (std::size_t t = 0; t < fixture.sequence.size(); ++t) {
    std::snprintf(name, sizeof(name), "%06zu", t);
    io::write_scan(fixture.sequence.scans[t],
                   out_dir / "scans" / (std::string(name) + ".bin"));
    io::write_labels(fixture.gt_labels[t],
                     out_dir / "labels" / (std::string(name) + ".label"));
  }
  io::write_poses(fixture.sequence.poses, out_dir / "poses.txt");
}

}  // namespace seq4d::fixture
