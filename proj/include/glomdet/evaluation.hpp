#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glomdet/annotation.hpp"
#include "glomdet/detection.hpp"
#include "glomdet/geometry.hpp"

namespace glomdet::eval {

using glomdet::iou;
using glomdet::union_area;

inline constexpr double kDefaultIouThreshold = 0.5;

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> tp_pairs;  // (detection, gt)
  std::vector<std::size_t> fp_indices;
  std::vector<std::size_t> fn_indices;
};

// Greedy one-to-one matching. Detections are visited by descending
// confidence (ties: smaller x_min, then smaller y_min, then input order);
// each takes the still-unmatched GT with the highest IoU >= iou_threshold
// (ties: lower GT index). Detections left over are false positives, so a
// second hit on an already matched GT counts as one; GTs left over are
// false negatives. Index lists are ascending.
MatchResult match_detections(std::span<const det::Detection> dets,
                             std::span<const ann::GroundTruthBox> gts,
                             double iou_threshold = kDefaultIouThreshold);

// Sensitivity is count based, tp / (tp + fn). Specificity is area based:
// TN is the tissue area left after removing GT area and false-positive
// area, and specificity = tn_area / (tn_area + fp_area). Either ratio is
// empty when its denominator is 0.
struct MetricsReport {
  std::string slide_id;
  std::int64_t tp = 0, fp = 0, fn = 0;
  double tissue_area = 0.0;
  double gt_area = 0.0;
  double fp_area = 0.0;
  double tn_area = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;

  bool operator==(const MetricsReport&) const = default;
};

// Keeps detections with confidence >= conf_threshold, matches, and fills in
// the areas. Throws EmptyTissue when tissue_area <= 0.
MetricsReport evaluate_slide(std::span<const det::Detection> dets,
                             std::span<const ann::GroundTruthBox> gts, double tissue_area,
                             double conf_threshold,
                             double iou_threshold = kDefaultIouThreshold);

struct MacroAverage {
  double sensitivity = 0.0;
  double specificity = 0.0;
  std::size_t sensitivity_slides = 0;  // slides with at least one GT
  std::size_t specificity_slides = 0;

  bool operator==(const MacroAverage&) const = default;
};

// Unweighted per-slide means. Slides with an undefined ratio are left out of
// that ratio's mean. Throws NoEvaluableSlides when either mean has no slide.
MacroAverage macro_average(std::span<const MetricsReport> reports);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::string label;
  std::vector<RocPoint> points;  // thresholds descending
  bool operator==(const RocCurve&) const = default;
};

// tpr = sensitivity and fpr = 1 - specificity at each confidence threshold;
// undefined ratios count as 0. Throws InvalidArgument unless thresholds are
// finite, >= 0 and strictly descending.
RocCurve roc_curve(std::span<const det::Detection> dets,
                   std::span<const ann::GroundTruthBox> gts, double tissue_area,
                   double iou_threshold, std::span<const double> thresholds);

struct SlideCase {
  std::string slide_id;
  std::vector<det::Detection> detections;
  std::vector<ann::GroundTruthBox> ground_truth;
  double tissue_area = 0.0;
};

// Per-threshold macro average over slides with the same exclusions as
// macro_average: slides without GT do not enter the tpr mean.
RocCurve roc_curve_macro(std::span<const SlideCase> slides, double iou_threshold,
                         std::span<const double> thresholds);

// 1.01 (above any confidence), then 1.00, 0.99, ..., 0.00.
std::vector<double> default_roc_thresholds();

}  // namespace glomdet::eval
