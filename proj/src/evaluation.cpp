#include "glomdet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glomdet/errors.hpp"

namespace glomdet::eval {

MatchResult match_detections(std::span<const det::Detection> dets,
                             std::span<const ann::GroundTruthBox> gts, double iou_threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = dets[a];
    const auto& db = dets[b];
    if (da.confidence != db.confidence) return da.confidence > db.confidence;
    if (da.bbox.x_min != db.bbox.x_min) return da.bbox.x_min < db.bbox.x_min;
    return da.bbox.y_min < db.bbox.y_min;
  });

  MatchResult result;
  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<bool> det_matched(dets.size(), false);
  for (std::size_t d : order) {
    std::size_t best = gts.size();
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_taken[g]) continue;
      const double v = iou(dets[d].bbox, gts[g].bbox);
      if (v >= iou_threshold && v > best_iou) {
        best_iou = v;
        best = g;
      }
    }
    if (best < gts.size()) {
      gt_taken[best] = true;
      det_matched[d] = true;
      result.tp_pairs.emplace_back(d, best);
    }
  }
  for (std::size_t d = 0; d < dets.size(); ++d) {
    if (!det_matched[d]) result.fp_indices.push_back(d);
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!gt_taken[g]) result.fn_indices.push_back(g);
  }
  return result;
}

MetricsReport evaluate_slide(std::span<const det::Detection> dets,
                             std::span<const ann::GroundTruthBox> gts, double tissue_area,
                             double conf_threshold, double iou_threshold) {
  if (!(tissue_area > 0.0)) {
    throw Error(ErrorCode::kEmptyTissue, "tissue area must be positive");
  }
  std::vector<det::Detection> kept;
  for (const auto& d : dets) {
    if (d.confidence >= conf_threshold) kept.push_back(d);
  }
  const MatchResult m = match_detections(kept, gts, iou_threshold);

  MetricsReport r;
  r.tp = static_cast<std::int64_t>(m.tp_pairs.size());
  r.fp = static_cast<std::int64_t>(m.fp_indices.size());
  r.fn = static_cast<std::int64_t>(m.fn_indices.size());
  r.tissue_area = tissue_area;

  std::vector<BBox> boxes;
  boxes.reserve(gts.size());
  for (const auto& g : gts) boxes.push_back(g.bbox);
  r.gt_area = union_area(boxes);
  boxes.clear();
  for (auto i : m.fp_indices) boxes.push_back(kept[i].bbox);
  r.fp_area = union_area(boxes);
  r.tn_area = std::max(0.0, tissue_area - r.gt_area - r.fp_area);

  if (r.tp + r.fn > 0) {
    r.sensitivity = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  }
  if (r.tn_area + r.fp_area > 0.0) r.specificity = r.tn_area / (r.tn_area + r.fp_area);
  return r;
}

MacroAverage macro_average(std::span<const MetricsReport> reports) {
  MacroAverage avg;
  double sens = 0.0, spec = 0.0;
  for (const auto& r : reports) {
    if (r.sensitivity) {
      sens += *r.sensitivity;
      ++avg.sensitivity_slides;
    }
    if (r.specificity) {
      spec += *r.specificity;
      ++avg.specificity_slides;
    }
  }
  if (avg.sensitivity_slides == 0 || avg.specificity_slides == 0) {
    throw Error(ErrorCode::kNoEvaluableSlides,
                "no slide defines " +
                    std::string(avg.sensitivity_slides == 0 ? "sensitivity" : "specificity"));
  }
  avg.sensitivity = sens / static_cast<double>(avg.sensitivity_slides);
  avg.specificity = spec / static_cast<double>(avg.specificity_slides);
  return avg;
}

namespace {

void check_thresholds(std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i]) || thresholds[i] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "ROC thresholds must be finite and >= 0");
    }
    if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "ROC thresholds must be strictly descending");
    }
  }
}

}  // namespace

RocCurve roc_curve(std::span<const det::Detection> dets,
                   std::span<const ann::GroundTruthBox> gts, double tissue_area,
                   double iou_threshold, std::span<const double> thresholds) {
  check_thresholds(thresholds);
  RocCurve curve;
  for (double t : thresholds) {
    const MetricsReport r = evaluate_slide(dets, gts, tissue_area, t, iou_threshold);
    curve.points.push_back({t, r.sensitivity.value_or(0.0), 1.0 - r.specificity.value_or(1.0)});
  }
  return curve;
}

RocCurve roc_curve_macro(std::span<const SlideCase> slides, double iou_threshold,
                         std::span<const double> thresholds) {
  check_thresholds(thresholds);
  if (slides.empty()) throw Error(ErrorCode::kNoEvaluableSlides, "no slides for ROC");
  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds) {
    double sens = 0.0, spec = 0.0;
    std::size_t n_sens = 0, n_spec = 0;
    for (const auto& s : slides) {
      const MetricsReport r =
          evaluate_slide(s.detections, s.ground_truth, s.tissue_area, t, iou_threshold);
      if (r.sensitivity) {
        sens += *r.sensitivity;
        ++n_sens;
      }
      if (r.specificity) {
        spec += *r.specificity;
        ++n_spec;
      }
    }
    curve.points.push_back({t, n_sens ? sens / static_cast<double>(n_sens) : 0.0,
                            n_spec ? 1.0 - spec / static_cast<double>(n_spec) : 0.0});
  }
  return curve;
}

std::vector<double> default_roc_thresholds() {
  std::vector<double> t{1.01};
  for (int i = 100; i >= 0; --i) t.push_back(i / 100.0);
  return t;
}

}  // namespace glomdet::eval
