#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "detvlm/detection/labels.hpp"
#include "detvlm/imagery/raster.hpp"

namespace detvlm::detection {

// Area-based IoU. Rectangle area is (x_max - x_min) * (y_max - y_min), so
// (0,0,2,2) covers four unit cells. Returns 0 when the union is empty.
double iou(const imagery::PixelRect& a, const imagery::PixelRect& b) noexcept;
double iou(const NormalizedBox& a, const NormalizedBox& b) noexcept;

struct MatchResult {
  // Indexed like the input detections.
  std::vector<bool> true_positive;
  // Ground-truth index each detection matched, or -1.
  std::vector<int> matched_gt;
  std::size_t false_negatives = 0;
};

// Greedy matching: detections in descending confidence (stable for ties)
// each take the unmatched same-class ground truth with the highest IoU,
// provided it reaches `iou_threshold`. Throws std::invalid_argument unless
// 0 < iou_threshold <= 1.
MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruthLabel> gts,
                             double iou_threshold);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

struct ScoredOutcome {
  double confidence = 0.0;
  bool true_positive = false;
};

// Cumulative precision/recall after each outcome in descending-confidence
// order. Throws MetricError when total_ground_truth == 0.
std::vector<PrPoint> precision_recall_curve(std::vector<ScoredOutcome> outcomes, std::size_t total_ground_truth);
std::vector<PrPoint> precision_recall_curve(std::span<const Detection> dets, std::span<const GroundTruthLabel> gts,
                                            double iou_threshold);

// All-point interpolated AP: area under the monotone envelope
// p(r) = max{precision at recall >= r}. Empty curve gives 0.
double average_precision(std::span<const PrPoint> curve);

// One image worth of detections and labels.
struct ImageEvaluation {
  std::vector<Detection> detections;
  std::vector<GroundTruthLabel> ground_truth;
};

struct ClassReport {
  std::size_t ground_truth = 0;
  std::vector<PrPoint> curve;
  double average_precision = 0.0;
};

struct DatasetReport {
  std::map<int, ClassReport> per_class;
  double mean_average_precision = 0.0;
};

// Matches per image, pools outcomes per class across images, and averages
// AP over every class that has ground truth.
DatasetReport evaluate_dataset(std::span<const ImageEvaluation> images, double iou_threshold);

}  // namespace detvlm::detection
