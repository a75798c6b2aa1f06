#include "seq4d/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "seq4d/io.hpp"

namespace seq4d::metrics {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<int, std::uint32_t>& p) const {
    return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
  }
};

void normalize(Segment4D& seg) {
  std::sort(seg.points.begin(), seg.points.end());
  seg.points.erase(std::unique(seg.points.begin(), seg.points.end()),
                   seg.points.end());
}

// Per-gt inner sums of the association formula, computed by streaming every
// gt point through a hash of the (disjoint) predictions.
struct AssocAccumulator {
  std::vector<double> per_gt;  // sum_{s∩g≠∅} TPA * IoU, one per gt segment
};

AssocAccumulator accumulate(std::span<const Segment4D> gt,
                            std::span<const Segment4D> pred) {
  std::unordered_map<std::pair<int, std::uint32_t>, std::uint32_t, PairHash>
      pred_of_point;
  pred_of_point.reserve(pred.size() * 16);
  for (std::size_t s = 0; s < pred.size(); ++s) {
    for (const auto& p : pred[s].points) {
      const auto [it, inserted] =
          pred_of_point.emplace(p, static_cast<std::uint32_t>(s));
      if (!inserted) {
        throw std::invalid_argument(
            "predicted segments are not disjoint: a point is predicted twice");
      }
    }
  }
  AssocAccumulator acc;
  acc.per_gt.assign(gt.size(), 0.0);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    std::map<std::uint32_t, std::size_t> intersection;  // pred index -> TPA
    for (const auto& p : gt[g].points) {
      const auto it = pred_of_point.find(p);
      if (it != pred_of_point.end()) {
        ++intersection[it->second];
      }
    }
    double inner = 0.0;
    for (const auto& [s, tpa] : intersection) {
      const double uni = static_cast<double>(gt[g].points.size()) +
                         static_cast<double>(pred[s].points.size()) -
                         static_cast<double>(tpa);
      inner += static_cast<double>(tpa) * (static_cast<double>(tpa) / uni);
    }
    acc.per_gt[g] = inner;
  }
  return acc;
}

double assoc_score(std::span<const Segment4D> gt,
                   std::span<const Segment4D> pred) {
  if (gt.empty()) {
    throw std::invalid_argument("no ground truth");
  }
  const AssocAccumulator acc = accumulate(gt, pred);
  double total = 0.0;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    total += acc.per_gt[g] / static_cast<double>(gt[g].points.size());
  }
  return total / static_cast<double>(gt.size());
}

std::vector<Segment4D> slice_per_scan(std::span<const Segment4D> segments) {
  std::vector<Segment4D> sliced;
  for (const Segment4D& seg : segments) {
    std::map<int, Segment4D> by_scan;
    for (const auto& p : seg.points) {
      by_scan[p.first].points.push_back(p);
    }
    for (auto& [scan, slice] : by_scan) {
      slice.id = seg.id;
      sliced.push_back(std::move(slice));
    }
  }
  return sliced;
}

}  // namespace

std::vector<Segment4D> segments_from_labels(
    std::span<const InstanceLabeling> labels) {
  std::map<std::uint32_t, Segment4D> by_id;
  for (std::size_t scan = 0; scan < labels.size(); ++scan) {
    for (std::size_t i = 0; i < labels[scan].size(); ++i) {
      const std::uint32_t id = labels[scan][i];
      if (id == 0) {
        continue;  // background forms no segment
      }
      Segment4D& seg = by_id[id];
      seg.id = id;
      seg.points.emplace_back(static_cast<int>(scan),
                              static_cast<std::uint32_t>(i));
    }
  }
  std::vector<Segment4D> segments;
  segments.reserve(by_id.size());
  for (auto& [id, seg] : by_id) {
    normalize(seg);
    segments.push_back(std::move(seg));
  }
  return segments;
}

double s_assoc_temp(std::span<const Segment4D> gt,
                    std::span<const Segment4D> pred) {
  return assoc_score(gt, pred);
}

double s_assoc(std::span<const Segment4D> gt,
               std::span<const Segment4D> pred) {
  if (gt.empty()) {
    throw std::invalid_argument("no ground truth");
  }
  const auto gt_sliced = slice_per_scan(gt);
  const auto pred_sliced = slice_per_scan(pred);
  return assoc_score(gt_sliced, pred_sliced);
}

double iou_star(std::span<const Segment4D> gt,
                std::span<const Segment4D> pred) {
  if (gt.empty()) {
    throw std::invalid_argument("no ground truth");
  }
  std::unordered_map<std::pair<int, std::uint32_t>, std::uint32_t, PairHash>
      pred_of_point;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    for (const auto& p : pred[s].points) {
      pred_of_point.emplace(p, static_cast<std::uint32_t>(s));
    }
  }
  double total = 0.0;
  for (const Segment4D& g : gt) {
    std::map<std::uint32_t, std::size_t> intersection;
    for (const auto& p : g.points) {
      const auto it = pred_of_point.find(p);
      if (it != pred_of_point.end()) {
        ++intersection[it->second];
      }
    }
    double best = 0.0;
    for (const auto& [s, tpa] : intersection) {
      const double uni = static_cast<double>(g.points.size()) +
                         static_cast<double>(pred[s].points.size()) -
                         static_cast<double>(tpa);
      best = std::max(best, static_cast<double>(tpa) / uni);
    }
    total += best;
  }
  return total / static_cast<double>(gt.size());
}

std::vector<Segment4D> filter_gt(std::span<const Segment4D> gt, int min_points,
                                 FilterMode mode) {
  std::vector<Segment4D> out;
  for (const Segment4D& seg : gt) {
    if (mode == FilterMode::kWhole4D) {
      if (static_cast<int>(seg.points.size()) >= min_points) {
        out.push_back(seg);
      }
      continue;
    }
    Segment4D kept;
    kept.id = seg.id;
    std::map<int, std::size_t> per_scan;
    for (const auto& p : seg.points) {
      ++per_scan[p.first];
    }
    for (const auto& p : seg.points) {
      if (static_cast<int>(per_scan[p.first]) >= min_points) {
        kept.points.push_back(p);
      }
    }
    if (!kept.points.empty()) {
      out.push_back(std::move(kept));
    }
  }
  return out;
}

EvalReport evaluate_labels(std::span<const InstanceLabeling> gt,
                           std::span<const InstanceLabeling> pred,
                           int min_points, FilterMode mode) {
  if (gt.size() != pred.size()) {
    throw std::invalid_argument("gt and pred cover different scan counts");
  }
  for (std::size_t s = 0; s < gt.size(); ++s) {
    if (gt[s].size() != pred[s].size()) {
      throw std::invalid_argument("gt/pred label length mismatch at scan " +
                                  std::to_string(s));
    }
  }
  const auto gt_segments = segments_from_labels(gt);
  const auto pred_segments = segments_from_labels(pred);

  EvalReport report;
  report.s_assoc_temp = s_assoc_temp(gt_segments, pred_segments);
  report.s_assoc = s_assoc(gt_segments, pred_segments);
  report.iou_star = iou_star(gt_segments, pred_segments);

  const auto filtered = filter_gt(gt_segments, min_points, mode);
  if (filtered.empty()) {
    report.s_assoc_temp_filtered = 0.0;
    report.s_assoc_filtered = 0.0;
  } else {
    report.s_assoc_temp_filtered = s_assoc_temp(filtered, pred_segments);
    report.s_assoc_filtered = s_assoc(filtered, pred_segments);
  }

  const AssocAccumulator acc = accumulate(gt_segments, pred_segments);
  for (std::size_t g = 0; g < gt_segments.size(); ++g) {
    EvalReport::PerObject po;
    po.gt_id = gt_segments[g].id;
    po.point_count = gt_segments[g].points.size();
    po.temp_contribution =
        acc.per_gt[g] / static_cast<double>(gt_segments[g].points.size());
    po.best_iou =
        iou_star(std::span<const Segment4D>(&gt_segments[g], 1), pred_segments);
    report.per_object.push_back(po);
  }
  return report;
}

EvalReport evaluate(const std::filesystem::path& gt_label_dir,
                    const std::filesystem::path& pred_label_dir,
                    const std::filesystem::path& scan_dir, int min_points,
                    FilterMode mode) {
  const auto scan_files = io::list_files(scan_dir, ".bin");
  if (scan_files.empty()) {
    throw std::runtime_error("no scans in " + scan_dir.string());
  }
  std::vector<InstanceLabeling> gt, pred;
  for (const auto& scan_file : scan_files) {
    const std::size_t count = io::read_scan(scan_file).size();
    const auto name = scan_file.stem().string() + ".label";
    gt.push_back(io::read_labels(gt_label_dir / name, count));
    pred.push_back(io::read_labels(pred_label_dir / name, count));
  }
  return evaluate_labels(gt, pred, min_points, mode);
}

std::string format_report(const EvalReport& r) {
  char buf[512];
  std::string out;
  out += "                 s_assoc_temp   iou_star    s_assoc\n";
  std::snprintf(buf, sizeof(buf), "  unfiltered       %10.6f %10.6f %10.6f\n",
                r.s_assoc_temp, r.iou_star, r.s_assoc);
  out += buf;
  std::snprintf(buf, sizeof(buf), "  filtered         %10.6f          - %10.6f\n",
                r.s_assoc_temp_filtered, r.s_assoc_filtered);
  out += buf;
  return out;
}

std::string report_key_values(const EvalReport& r) {
  char buf[128];
  std::string out;
  const std::pair<const char*, double> rows[] = {
      {"s_assoc_temp", r.s_assoc_temp},
      {"iou_star", r.iou_star},
      {"s_assoc", r.s_assoc},
      {"s_assoc_temp_filtered", r.s_assoc_temp_filtered},
      {"s_assoc_filtered", r.s_assoc_filtered},
  };
  for (const auto& [key, value] : rows) {
    std::snprintf(buf, sizeof(buf), "%s=%.12f\n", key, value);
    out += buf;
  }
  for (const auto& po : r.per_object) {
    std::snprintf(buf, sizeof(buf),
                  "gt_%u.points=%zu\ngt_%u.temp=%.12f\ngt_%u.best_iou=%.12f\n",
                  po.gt_id, po.point_count, po.gt_id, po.temp_contribution,
                  po.gt_id, po.best_iou);
    out += buf;
  }
  return out;
}

}  // namespace seq4d::metrics
