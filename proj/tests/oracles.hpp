// Independent brute-force references the fast implementations are checked
// against. Everything here favors obviousness over speed and shares no code
// with the library paths it validates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "seq4d/core.hpp"
#include "seq4d/metrics.hpp"

namespace oracle {

// DBSCAN by explicit eps-graph: adjacency matrix, core flags, connected
// components over cores (BFS), then borders claimed by their lowest-index
// core neighbor.
inline std::vector<std::uint32_t> dbscan_bruteforce(
    const std::vector<seq4d::Point>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x;
      const double dy = pts[i].y - pts[j].y;
      const double dz = pts[i].z - pts[j].z;
      adj[i][j] = dx * dx + dy * dy + dz * dz <= eps * eps;
    }
  }
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      count += adj[i][j];
    }
    core[i] = count >= min_pts;
  }
  std::vector<std::uint32_t> labels(n, 0);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || labels[i] != 0) {
      continue;
    }
    ++next;
    std::vector<std::size_t> stack{i};
    labels[i] = next;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (adj[p][q] && core[q] && labels[q] == 0) {
          labels[q] = next;
          stack.push_back(q);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      continue;
    }
    for (std::size_t q = 0; q < n; ++q) {
      if (adj[i][q] && core[q]) {
        labels[i] = labels[q];
        break;  // ascending q = lowest-index core
      }
    }
  }
  return labels;
}

// Minimum assignment cost by enumerating every injective map of the smaller
// side into the larger one.
inline double hungarian_bruteforce(const Eigen::MatrixXd& c) {
  const int n_q = static_cast<int>(c.rows());
  const int n_o = static_cast<int>(c.cols());
  double best = std::numeric_limits<double>::infinity();
  if (n_q >= n_o) {
    // choose a distinct query per object
    std::vector<int> queries(n_q);
    std::iota(queries.begin(), queries.end(), 0);
    std::sort(queries.begin(), queries.end());
    do {
      double cost = 0;
      for (int o = 0; o < n_o; ++o) {
        cost += c(queries[o], o);
      }
      best = std::min(best, cost);
    } while (std::next_permutation(queries.begin(), queries.end()));
  } else {
    std::vector<int> objects(n_o);
    std::iota(objects.begin(), objects.end(), 0);
    do {
      double cost = 0;
      for (int q = 0; q < n_q; ++q) {
        cost += c(q, objects[q]);
      }
      best = std::min(best, cost);
    } while (std::next_permutation(objects.begin(), objects.end()));
  }
  return best;
}

// Naive set-theoretic association metrics over materialized point sets.
using PointSet = std::set<std::pair<int, std::uint32_t>>;

inline PointSet to_set(const seq4d::metrics::Segment4D& seg) {
  return PointSet(seg.points.begin(), seg.points.end());
}

inline double iou(const PointSet& a, const PointSet& b) {
  std::vector<std::pair<int, std::uint32_t>> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  const double i = static_cast<double>(inter.size());
  return i / (static_cast<double>(a.size()) + static_cast<double>(b.size()) - i);
}

inline double tpa(const PointSet& a, const PointSet& b) {
  std::vector<std::pair<int, std::uint32_t>> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  return static_cast<double>(inter.size());
}

inline double s_assoc_temp_naive(
    const std::vector<seq4d::metrics::Segment4D>& gt,
    const std::vector<seq4d::metrics::Segment4D>& pred) {
  double total = 0;
  for (const auto& g : gt) {
    const PointSet gs = to_set(g);
    double inner = 0;
    for (const auto& s : pred) {
      const PointSet ss = to_set(s);
      const double t = tpa(ss, gs);
      if (t > 0) {
        inner += t * iou(ss, gs);
      }
    }
    total += inner / static_cast<double>(gs.size());
  }
  return total / static_cast<double>(gt.size());
}

inline std::vector<seq4d::metrics::Segment4D> slice_naive(
    const std::vector<seq4d::metrics::Segment4D>& segments) {
  std::vector<seq4d::metrics::Segment4D> out;
  for (const auto& seg : segments) {
    std::map<int, seq4d::metrics::Segment4D> by_scan;
    for (const auto& p : seg.points) {
      by_scan[p.first].id = seg.id;
      by_scan[p.first].points.push_back(p);
    }
    for (auto& [scan, slice] : by_scan) {
      out.push_back(slice);
    }
  }
  return out;
}

inline double s_assoc_naive(const std::vector<seq4d::metrics::Segment4D>& gt,
                            const std::vector<seq4d::metrics::Segment4D>& pred) {
  return s_assoc_temp_naive(slice_naive(gt), slice_naive(pred));
}

inline double iou_star_naive(
    const std::vector<seq4d::metrics::Segment4D>& gt,
    const std::vector<seq4d::metrics::Segment4D>& pred) {
  double total = 0;
  for (const auto& g : gt) {
    const PointSet gs = to_set(g);
    double best = 0;
    for (const auto& s : pred) {
      best = std::max(best, iou(to_set(s), gs));
    }
    total += best;
  }
  return total / static_cast<double>(gt.size());
}

}  // namespace oracle
