#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glomdet/evaluation.hpp"

namespace glomdet::eval {

struct ExperimentResult {
  int experiment_id = 0;
  std::string stain;  // evaluation set name, e.g. PAS_20
  std::vector<MetricsReport> slides;  // sorted by slide_id
  MacroAverage average;

  bool operator==(const ExperimentResult&) const = default;
};

// Sorts slides by id and computes the macro average.
ExperimentResult make_experiment_result(int experiment_id, std::string stain,
                                        std::vector<MetricsReport> slides);

// Integer percent, halves rounded up. Only for display.
int percent_half_up(double ratio);
// "85% / 89%"
std::string format_percent_pair(double sensitivity, double specificity);

std::string render_report_table(std::span<const ExperimentResult> results);

// row_type,experiment_id,stain,slide_id,tp,fp,fn,tissue_area,gt_area,
// fp_area,tn_area,sensitivity,specificity. One "slide" row per slide, then
// one "average" row per experiment. Values keep full precision; undefined
// ratios are empty cells.
std::string render_report_csv(std::span<const ExperimentResult> results);
std::vector<ExperimentResult> parse_report_csv(std::string_view text);

// One evaluated slide tagged with the experiment it belongs to.
struct SlideMetrics {
  int experiment_id = 0;
  std::string stain;
  MetricsReport report;
  bool operator==(const SlideMetrics&) const = default;
};

std::string slide_metrics_to_json(const SlideMetrics& metrics);
SlideMetrics slide_metrics_from_json(std::string_view text);
// Report CSV columns with "slide" rows only.
std::string render_slide_metrics_csv(std::span<const SlideMetrics> metrics);

// One result per (experiment_id, stain), ordered by id and then stain.
std::vector<ExperimentResult> group_experiments(std::span<const SlideMetrics> metrics);

std::string experiment_result_to_json(const ExperimentResult& result);
ExperimentResult experiment_result_from_json(std::string_view text);

// curve,threshold,tpr,fpr
std::string render_roc_csv(std::span<const RocCurve> curves);
std::vector<RocCurve> parse_roc_csv(std::string_view text);
// Unit-square ROC plot with one polyline per curve and a chance diagonal.
std::string render_roc_svg(std::span<const RocCurve> curves);

}  // namespace glomdet::eval
