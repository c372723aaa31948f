#include "detvlm/detection/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "detvlm/errors.hpp"

namespace detvlm::detection {
namespace {

struct Corners {
  double x0, y0, x1, y1;
};

double corner_iou(const Corners& a, const Corners& b) noexcept {
  const double area_a = std::max(0.0, a.x1 - a.x0) * std::max(0.0, a.y1 - a.y0);
  const double area_b = std::max(0.0, b.x1 - b.x0) * std::max(0.0, b.y1 - b.y0);
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Corners corners(const NormalizedBox& b) noexcept {
  return {b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2};
}

std::vector<std::size_t> confidence_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  return order;
}

}  // namespace

double iou(const imagery::PixelRect& a, const imagery::PixelRect& b) noexcept {
  return corner_iou({double(a.x_min), double(a.y_min), double(a.x_max), double(a.y_max)},
                    {double(b.x_min), double(b.y_min), double(b.x_max), double(b.y_max)});
}

double iou(const NormalizedBox& a, const NormalizedBox& b) noexcept { return corner_iou(corners(a), corners(b)); }

MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruthLabel> gts,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw std::invalid_argument("iou threshold must be in (0,1]");
  MatchResult result;
  result.true_positive.assign(dets.size(), false);
  result.matched_gt.assign(dets.size(), -1);
  std::vector<bool> taken(gts.size(), false);

  for (std::size_t di : confidence_order(dets)) {
    const auto& d = dets[di];
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi] || gts[gi].class_id != d.class_id) continue;
      const double v = iou(d.box, gts[gi].box);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(gi);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      result.true_positive[di] = true;
      result.matched_gt[di] = best;
    }
  }
  result.false_negatives = static_cast<std::size_t>(std::count(taken.begin(), taken.end(), false));
  return result;
}

std::vector<PrPoint> precision_recall_curve(std::vector<ScoredOutcome> outcomes, std::size_t total_ground_truth) {
  if (total_ground_truth == 0) throw MetricError("precision-recall curve needs at least one ground truth");
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.confidence > b.confidence; });
  std::vector<PrPoint> curve;
  curve.reserve(outcomes.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].true_positive) ++tp;
    curve.push_back({static_cast<double>(tp) / static_cast<double>(total_ground_truth),
                     static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  return curve;
}

std::vector<PrPoint> precision_recall_curve(std::span<const Detection> dets, std::span<const GroundTruthLabel> gts,
                                            double iou_threshold) {
  if (gts.empty()) throw MetricError("precision-recall curve needs at least one ground truth");
  const auto match = match_detections(dets, gts, iou_threshold);
  std::vector<ScoredOutcome> outcomes;
  outcomes.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) outcomes.push_back({dets[i].confidence, match.true_positive[i]});
  return precision_recall_curve(std::move(outcomes), gts.size());
}

double average_precision(std::span<const PrPoint> curve) {
  if (curve.empty()) return 0.0;
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    ap += (curve[i].recall - prev_recall) * envelope[i];
    prev_recall = curve[i].recall;
  }
  return std::clamp(ap, 0.0, 1.0);
}

DatasetReport evaluate_dataset(std::span<const ImageEvaluation> images, double iou_threshold) {
  std::map<int, std::vector<ScoredOutcome>> outcomes;
  std::map<int, std::size_t> gt_counts;
  for (const auto& img : images) {
    const auto match = match_detections(img.detections, img.ground_truth, iou_threshold);
    for (std::size_t i = 0; i < img.detections.size(); ++i) {
      outcomes[img.detections[i].class_id].push_back({img.detections[i].confidence, match.true_positive[i]});
    }
    for (const auto& g : img.ground_truth) ++gt_counts[g.class_id];
  }

  DatasetReport report;
  double sum = 0.0;
  for (const auto& [cls, n_gt] : gt_counts) {
    ClassReport cr;
    cr.ground_truth = n_gt;
    cr.curve = precision_recall_curve(outcomes[cls], n_gt);
    cr.average_precision = average_precision(cr.curve);
    sum += cr.average_precision;
    report.per_class.emplace(cls, std::move(cr));
  }
  if (!report.per_class.empty()) report.mean_average_precision = sum / static_cast<double>(report.per_class.size());
  return report;
}

}  // namespace detvlm::detection
