// 4D association metrics: temporal and per-scan association scores, best
// achievable IoU, and the small-segment filter. A 4D segment is one object's
// (scan, point) set across a sequence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seq4d/core.hpp"

namespace seq4d::metrics {

struct Segment4D {
  std::uint32_t id = 0;
  // Sorted, unique (scan index, point index) pairs.
  std::vector<std::pair<int, std::uint32_t>> points;
};

// One 4D segment per instance ID >= 1 found in the per-scan labelings.
std::vector<Segment4D> segments_from_labels(
    std::span<const InstanceLabeling> labels);

// (1/|G|) * sum_g (1/|g|) * sum_{s: s∩g≠∅} TPA(s,g) * IoU(s,g) over 4D point
// sets, TPA = |s ∩ g|. Predictions must be disjoint (each point predicted at
// most once); throws "no ground truth" when gt is empty.
double s_assoc_temp(std::span<const Segment4D> gt,
                    std::span<const Segment4D> pred);

// Same formula after slicing every 4D segment into independent per-scan
// segments.
double s_assoc(std::span<const Segment4D> gt, std::span<const Segment4D> pred);

// (1/|G|) * sum_g max_s IoU(s,g); a prediction may be the best match of
// several ground-truth objects.
double iou_star(std::span<const Segment4D> gt,
                std::span<const Segment4D> pred);

enum class FilterMode {
  kPerScanSlice,  // drop per-scan slices with < min_points points
  kWhole4D,       // drop whole 4D segments with < min_points points
};

// Removes small ground-truth content before evaluation; segments left empty
// disappear. A threshold of 0 is the identity; exactly min_points survives
// (strict less-than removal).
std::vector<Segment4D> filter_gt(std::span<const Segment4D> gt,
                                 int min_points = 50,
                                 FilterMode mode = FilterMode::kPerScanSlice);

struct EvalReport {
  double s_assoc_temp = 0.0;
  double iou_star = 0.0;
  double s_assoc = 0.0;
  double s_assoc_temp_filtered = 0.0;
  double s_assoc_filtered = 0.0;

  struct PerObject {
    std::uint32_t gt_id = 0;
    std::size_t point_count = 0;
    double temp_contribution = 0.0;  // this object's inner sum
    double best_iou = 0.0;
  };
  std::vector<PerObject> per_object;  // unfiltered
};

EvalReport evaluate_labels(std::span<const InstanceLabeling> gt,
                           std::span<const InstanceLabeling> pred,
                           int min_points = 50,
                           FilterMode mode = FilterMode::kPerScanSlice);

// Reads per-scan label files (point counts taken from scan_dir) and runs the
// full evaluation.
EvalReport evaluate(const std::filesystem::path& gt_label_dir,
                    const std::filesystem::path& pred_label_dir,
                    const std::filesystem::path& scan_dir,
                    int min_points = 50,
                    FilterMode mode = FilterMode::kPerScanSlice);

std::string format_report(const EvalReport& report);
// One key=value per line, for CI diffing.
std::string report_key_values(const EvalReport& report);

}  // namespace seq4d::metrics
