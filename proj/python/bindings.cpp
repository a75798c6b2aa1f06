// Python bindings for the main seq4d operations. Point clouds cross the
// boundary as (N,3) or (N,4) float64 numpy arrays, matrices as float64
// numpy 2D arrays.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seq4d/cluster.hpp"
#include "seq4d/config.hpp"
#include "seq4d/core.hpp"
#include "seq4d/ground.hpp"
#include "seq4d/loss.hpp"
#include "seq4d/metrics.hpp"
#include "seq4d/sampling.hpp"
#include "seq4d/synth.hpp"

namespace py = pybind11;
using namespace seq4d;

namespace {

std::vector<Point> points_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || (arr.shape(1) != 3 && arr.shape(1) != 4)) {
    throw std::invalid_argument("expected an (N,3) or (N,4) array");
  }
  const auto n = arr.shape(0);
  const auto cols = arr.shape(1);
  const double* data = arr.data();
  std::vector<Point> points(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    points[i].x = data[i * cols + 0];
    points[i].y = data[i * cols + 1];
    points[i].z = data[i * cols + 2];
    points[i].intensity = cols == 4 ? data[i * cols + 3] : 0.0;
  }
  return points;
}

py::array_t<double> array_from_points(const std::vector<Point>& points) {
  py::array_t<double> arr({static_cast<py::ssize_t>(points.size()),
                           static_cast<py::ssize_t>(4)});
  double* data = arr.mutable_data();
  for (std::size_t i = 0; i < points.size(); ++i) {
    data[i * 4 + 0] = points[i].x;
    data[i * 4 + 1] = points[i].y;
    data[i * 4 + 2] = points[i].z;
    data[i * 4 + 3] = points[i].intensity;
  }
  return arr;
}

std::vector<InstanceLabeling> labels_from_lists(
    const std::vector<std::vector<std::uint32_t>>& labels) {
  return {labels.begin(), labels.end()};
}

}  // namespace

PYBIND11_MODULE(_seq4d, m) {
  m.doc() = "point cloud sequence toolkit";

  // core
  m.def(
      "transform_points",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             points,
         const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
        Scan scan;
        scan.points = points_from_array(points);
        return array_from_points(
            transform_scan(scan, Pose(rotation, translation)).points);
      },
      py::arg("points"), py::arg("rotation"), py::arg("translation"));
  m.def(
      "bev_aabb",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             points) {
        const auto pts = points_from_array(points);
        const Aabb2D box = bev_aabb(pts);
        return py::make_tuple(box.x_min, box.x_max, box.y_min, box.y_max);
      },
      py::arg("points"));
  m.def(
      "aabb_overlap",
      [](const py::tuple& a, const py::tuple& b) {
        auto unpack = [](const py::tuple& t) {
          return Aabb2D{t[0].cast<double>(), t[1].cast<double>(),
                        t[2].cast<double>(), t[3].cast<double>()};
        };
        return aabb_overlap(unpack(a), unpack(b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "centroid",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             points) {
        const auto pts = points_from_array(points);
        return Eigen::Vector3d(centroid(pts));
      },
      py::arg("points"));

  // ground
  m.def(
      "segment_ground",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             points,
         double inlier_threshold, double max_normal_tilt_deg, int iterations,
         std::uint64_t seed) {
        Scan scan;
        scan.points = points_from_array(points);
        ground::GroundConfig cfg;
        cfg.inlier_threshold = inlier_threshold;
        cfg.max_normal_tilt_deg = max_normal_tilt_deg;
        cfg.iterations = iterations;
        cfg.seed = seed;
        const auto mask = ground::segment_ground_ransac(scan, cfg);
        py::array_t<bool> out(static_cast<py::ssize_t>(mask.size()));
        for (std::size_t i = 0; i < mask.size(); ++i) {
          out.mutable_data()[i] = mask[i] != 0;
        }
        return out;
      },
      py::arg("points"), py::arg("inlier_threshold") = 0.25,
      py::arg("max_normal_tilt_deg") = 15.0, py::arg("iterations") = 200,
      py::arg("seed") = 0);

  // cluster
  m.def(
      "dbscan",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             points,
         double eps, int min_pts) {
        const auto pts = points_from_array(points);
        const auto labels = cluster::dbscan(pts, eps, min_pts);
        py::array_t<std::uint32_t> out(
            static_cast<py::ssize_t>(labels.size()));
        std::copy(labels.begin(), labels.end(), out.mutable_data());
        return out;
      },
      py::arg("points"), py::arg("eps"), py::arg("min_pts"));
  m.def(
      "voxel_downsample",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             points,
         double voxel_size) {
        const auto pts = points_from_array(points);
        return array_from_points(
            cluster::voxel_downsample(pts, voxel_size).representatives);
      },
      py::arg("points"), py::arg("voxel_size"));

  // synth
  m.def(
      "build_validmap",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             ground_points,
         double resolution) {
        Scan ground;
        ground.points = points_from_array(ground_points);
        const synth::ValidMap map = synth::build_validmap(ground, resolution);
        py::array_t<bool> cells({static_cast<py::ssize_t>(map.height),
                                 static_cast<py::ssize_t>(map.width)});
        for (int iy = 0; iy < map.height; ++iy) {
          for (int ix = 0; ix < map.width; ++ix) {
            cells.mutable_data()[iy * map.width + ix] = map.cell(ix, iy) != 0;
          }
        }
        py::dict out;
        out["resolution"] = map.resolution;
        out["origin"] = py::make_tuple(map.origin_x, map.origin_y);
        out["cells"] = cells;
        return out;
      },
      py::arg("ground_points"), py::arg("resolution"));

  // sampling
  m.def(
      "sample_pairs",
      [](int seq_len, int n_pairs, int max_gap, bool enable_nfs,
         bool enable_rto, bool rto_duplicate, std::uint64_t seed) {
        sampling::SamplingConfig cfg;
        cfg.max_gap = max_gap;
        cfg.enable_nfs = enable_nfs;
        cfg.enable_rto = enable_rto;
        cfg.rto_duplicate = rto_duplicate;
        cfg.seed = seed;
        const auto pairs = sampling::sample_pairs(seq_len, n_pairs, cfg);
        py::list out;
        for (const auto& pair : pairs) {
          out.append(py::make_tuple(pair.first, pair.second));
        }
        return out;
      },
      py::arg("seq_len"), py::arg("n_pairs"), py::arg("max_gap") = 4,
      py::arg("enable_nfs") = true, py::arg("enable_rto") = true,
      py::arg("rto_duplicate") = false, py::arg("seed") = 0);

  // loss kernels
  py::class_<loss::LossWeights>(m, "LossWeights")
      .def(py::init<>())
      .def_readwrite("lambda_dice", &loss::LossWeights::lambda_dice)
      .def_readwrite("lambda_bce", &loss::LossWeights::lambda_bce)
      .def_readwrite("lambda_cons", &loss::LossWeights::lambda_cons)
      .def_readwrite("alpha", &loss::LossWeights::alpha)
      .def_readwrite("epsilon", &loss::LossWeights::epsilon)
      .def_readwrite("beta", &loss::LossWeights::beta);

  m.def("dice_coefficient", &loss::dice_coefficient, py::arg("s"),
        py::arg("m"));
  m.def("bce_loss", &loss::bce_loss, py::arg("s"), py::arg("m"));
  m.def(
      "cost_matrix",
      [](const Eigen::MatrixXd& s, const Eigen::MatrixXd& m,
         const loss::LossWeights& w) { return loss::cost_matrix(s, m, w); },
      py::arg("s"), py::arg("m"), py::arg("weights") = loss::LossWeights{});
  m.def(
      "hungarian",
      [](const Eigen::MatrixXd& c) {
        const loss::Matching matching = loss::hungarian(c);
        return py::make_tuple(matching.query_of_object, matching.total_cost);
      },
      py::arg("cost"),
      "returns (query_of_object list with -1 for unmatched, total cost)");
  m.def("confidence_weight", &loss::confidence_weight, py::arg("s"),
        py::arg("alpha") = 0.6, py::arg("epsilon") = 0.1);
  m.def("scaled_dice", &loss::scaled_dice, py::arg("s"), py::arg("m"),
        py::arg("w"));
  m.def("scaled_bce", &loss::scaled_bce, py::arg("s"), py::arg("m"),
        py::arg("w"));
  m.def(
      "motion_weights",
      [](const std::vector<Eigen::Vector3d>& c_t,
         const std::vector<Eigen::Vector3d>& c_tk,
         const std::vector<std::pair<bool, bool>>& presence, double beta) {
        return loss::motion_weights(c_t, c_tk, presence, beta);
      },
      py::arg("centroids_t"), py::arg("centroids_tk"), py::arg("presence"),
      py::arg("beta") = 0.2);
  m.def("consistency_loss", &loss::consistency_loss, py::arg("h_t"),
        py::arg("h_tk"));
  m.def("softmax_query_distribution", &loss::softmax_query_distribution,
        py::arg("avg_scores"));
  m.def(
      "total_loss",
      [](const Eigen::MatrixXd& s_t, const Eigen::MatrixXd& s_tk,
         const Eigen::MatrixXd& m_t, const Eigen::MatrixXd& m_tk,
         const Eigen::MatrixXd& raw_t, const Eigen::MatrixXd& raw_tk,
         const std::vector<Eigen::Vector3d>& centroids_t,
         const std::vector<Eigen::Vector3d>& centroids_tk,
         const loss::LossWeights& w) {
        loss::FramePairData data{s_t,    s_tk,   m_t,         m_tk,
                                 raw_t,  raw_tk, centroids_t, centroids_tk};
        const loss::TotalLossResult result = loss::total_loss(data, w);
        py::list objects;
        for (const auto& terms : result.objects) {
          py::dict d;
          d["object"] = terms.object;
          d["query"] = terms.query;
          d["scaled_dice"] = terms.scaled_dice;
          d["scaled_bce"] = terms.scaled_bce;
          d["consistency"] = terms.consistency;
          d["motion_weight"] = terms.motion_weight;
          d["contribution"] = terms.contribution;
          objects.append(d);
        }
        py::dict out;
        out["total"] = result.total;
        out["objects"] = objects;
        return out;
      },
      py::arg("s_t"), py::arg("s_tk"), py::arg("m_t"), py::arg("m_tk"),
      py::arg("raw_t"), py::arg("raw_tk"), py::arg("centroids_t"),
      py::arg("centroids_tk"), py::arg("weights") = loss::LossWeights{});

  // metrics
  m.def(
      "evaluate_labels",
      [](const std::vector<std::vector<std::uint32_t>>& gt,
         const std::vector<std::vector<std::uint32_t>>& pred, int min_points,
         const std::string& filter_mode) {
        const auto mode = filter_mode == "4d"
                              ? metrics::FilterMode::kWhole4D
                              : metrics::FilterMode::kPerScanSlice;
        const auto report = metrics::evaluate_labels(
            labels_from_lists(gt), labels_from_lists(pred), min_points, mode);
        py::dict out;
        out["s_assoc_temp"] = report.s_assoc_temp;
        out["iou_star"] = report.iou_star;
        out["s_assoc"] = report.s_assoc;
        out["s_assoc_temp_filtered"] = report.s_assoc_temp_filtered;
        out["s_assoc_filtered"] = report.s_assoc_filtered;
        return out;
      },
      py::arg("gt"), py::arg("pred"), py::arg("min_points") = 50,
      py::arg("filter_mode") = "slice",
      "gt/pred: one uint32 label array per scan, 0 = background");

  // config
  m.def("config_defaults", []() {
    py::dict out;
    const std::string dump = dump_config(default_config());
    std::size_t start = 0;
    while (start < dump.size()) {
      const auto end = dump.find('\n', start);
      const std::string line = dump.substr(start, end - start);
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        out[py::str(line.substr(0, eq))] = line.substr(eq + 1);
      }
      start = end + 1;
    }
    return out;
  });
}
