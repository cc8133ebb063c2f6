#include "glomdet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>

#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::eval {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > pos) lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

double num(const std::string& s, const char* what) {
  double v = 0.0;
  if (!parse_double(s, v)) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

std::optional<double> opt_num(const std::string& s, const char* what) {
  if (s.empty()) return std::nullopt;
  return num(s, what);
}

std::int64_t count(const std::string& s, const char* what) {
  std::int64_t v = 0;
  if (!parse_int64(s, v)) {
    throw Error(ErrorCode::kSchemaViolation, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from_json(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::string slide_row(int experiment_id, const std::string& stain, const MetricsReport& s) {
  return "slide," + std::to_string(experiment_id) + "," + csv_field(stain) + "," +
         csv_field(s.slide_id) + "," + std::to_string(s.tp) + "," + std::to_string(s.fp) + "," +
         std::to_string(s.fn) + "," + format_double(s.tissue_area) + "," +
         format_double(s.gt_area) + "," + format_double(s.fp_area) + "," +
         format_double(s.tn_area) + "," + opt_cell(s.sensitivity) + "," +
         opt_cell(s.specificity) + "\n";
}

nlohmann::ordered_json metrics_json(const MetricsReport& s) {
  nlohmann::ordered_json j;
  j["slide_id"] = s.slide_id;
  j["tp"] = s.tp;
  j["fp"] = s.fp;
  j["fn"] = s.fn;
  j["tissue_area"] = s.tissue_area;
  j["gt_area"] = s.gt_area;
  j["fp_area"] = s.fp_area;
  j["tn_area"] = s.tn_area;
  j["sensitivity"] = opt_json(s.sensitivity);
  j["specificity"] = opt_json(s.specificity);
  return j;
}

MetricsReport metrics_from(const nlohmann::json& j) {
  MetricsReport s;
  s.slide_id = j.at("slide_id").get<std::string>();
  s.tp = j.at("tp").get<std::int64_t>();
  s.fp = j.at("fp").get<std::int64_t>();
  s.fn = j.at("fn").get<std::int64_t>();
  s.tissue_area = j.at("tissue_area").get<double>();
  s.gt_area = j.at("gt_area").get<double>();
  s.fp_area = j.at("fp_area").get<double>();
  s.tn_area = j.at("tn_area").get<double>();
  s.sensitivity = opt_from_json(j.at("sensitivity"));
  s.specificity = opt_from_json(j.at("specificity"));
  return s;
}

constexpr const char* kReportHeader =
    "row_type,experiment_id,stain,slide_id,tp,fp,fn,tissue_area,gt_area,fp_area,tn_area,"
    "sensitivity,specificity";

}  // namespace

ExperimentResult make_experiment_result(int experiment_id, std::string stain,
                                        std::vector<MetricsReport> slides) {
  std::stable_sort(slides.begin(), slides.end(),
                   [](const MetricsReport& a, const MetricsReport& b) {
                     return a.slide_id < b.slide_id;
                   });
  ExperimentResult r{experiment_id, std::move(stain), std::move(slides), {}};
  r.average = macro_average(r.slides);
  return r;
}

int percent_half_up(double ratio) {
  // The epsilon keeps values such as 0.845 (stored just below) on the
  // rounded-up side.
  return static_cast<int>(std::floor(ratio * 100.0 + 0.5 + 1e-9));
}

std::string format_percent_pair(double sensitivity, double specificity) {
  return std::to_string(percent_half_up(sensitivity)) + "% / " +
         std::to_string(percent_half_up(specificity)) + "%";
}

std::string render_report_table(std::span<const ExperimentResult> results) {
  if (results.empty()) throw Error(ErrorCode::kInvalidArgument, "no experiment results");
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s  %-8s  %6s  %s\n", "Experiment", "Eval set", "Slides",
                "Avg sensitivity / Avg specificity");
  out += buf;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%-10d  %-8s  %6zu  %s\n", r.experiment_id,
                  r.stain.c_str(), r.slides.size(),
                  format_percent_pair(r.average.sensitivity, r.average.specificity).c_str());
    out += buf;
  }
  return out;
}

std::string render_report_csv(std::span<const ExperimentResult> results) {
  if (results.empty()) throw Error(ErrorCode::kInvalidArgument, "no experiment results");
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : results) {
    const std::string id = std::to_string(r.experiment_id);
    std::int64_t tp = 0, fp = 0, fn = 0;
    double tissue = 0, gt = 0, fpa = 0, tn = 0;
    for (const auto& s : r.slides) {
      out += slide_row(r.experiment_id, r.stain, s);
      tp += s.tp;
      fp += s.fp;
      fn += s.fn;
      tissue += s.tissue_area;
      gt += s.gt_area;
      fpa += s.fp_area;
      tn += s.tn_area;
    }
    out += "average," + id + "," + csv_field(r.stain) + ",," + std::to_string(tp) + "," +
           std::to_string(fp) + "," + std::to_string(fn) + "," + format_double(tissue) + "," +
           format_double(gt) + "," + format_double(fpa) + "," + format_double(tn) + "," +
           format_double(r.average.sensitivity) + "," + format_double(r.average.specificity) +
           "\n";
  }
  return out;
}

std::vector<ExperimentResult> parse_report_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kReportHeader) {
    throw Error(ErrorCode::kSchemaViolation, "report CSV header mismatch");
  }
  std::vector<ExperimentResult> out;
  auto find = [&](int id, const std::string& stain) -> ExperimentResult& {
    for (auto& r : out) {
      if (r.experiment_id == id && r.stain == stain) return r;
    }
    out.push_back({id, stain, {}, {}});
    return out.back();
  };
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv_split(lines[i]);
    if (f.size() != 13) {
      throw Error(ErrorCode::kSchemaViolation,
                  "report CSV line " + std::to_string(i + 1) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    auto& r = find(static_cast<int>(count(f[1], "experiment_id")), f[2]);
    if (f[0] == "slide") {
      MetricsReport s;
      s.slide_id = f[3];
      s.tp = count(f[4], "tp");
      s.fp = count(f[5], "fp");
      s.fn = count(f[6], "fn");
      s.tissue_area = num(f[7], "tissue_area");
      s.gt_area = num(f[8], "gt_area");
      s.fp_area = num(f[9], "fp_area");
      s.tn_area = num(f[10], "tn_area");
      s.sensitivity = opt_num(f[11], "sensitivity");
      s.specificity = opt_num(f[12], "specificity");
      if (s.sensitivity) ++r.average.sensitivity_slides;
      if (s.specificity) ++r.average.specificity_slides;
      r.slides.push_back(std::move(s));
    } else if (f[0] == "average") {
      r.average.sensitivity = num(f[11], "sensitivity");
      r.average.specificity = num(f[12], "specificity");
    } else {
      throw Error(ErrorCode::kSchemaViolation, "unknown row_type '" + f[0] + "'");
    }
  }
  return out;
}

std::string slide_metrics_to_json(const SlideMetrics& m) {
  nlohmann::ordered_json doc;
  doc["experiment_id"] = m.experiment_id;
  doc["stain"] = m.stain;
  doc["metrics"] = metrics_json(m.report);
  return doc.dump(2) + "\n";
}

SlideMetrics slide_metrics_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    return {doc.at("experiment_id").get<int>(), doc.at("stain").get<std::string>(),
            metrics_from(doc.at("metrics"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("slide metrics JSON: ") + e.what());
  }
}

std::string render_slide_metrics_csv(std::span<const SlideMetrics> metrics) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& m : metrics) out += slide_row(m.experiment_id, m.stain, m.report);
  return out;
}

std::vector<ExperimentResult> group_experiments(std::span<const SlideMetrics> metrics) {
  if (metrics.empty()) throw Error(ErrorCode::kInvalidArgument, "no slide metrics");
  std::map<std::pair<int, std::string>, std::vector<MetricsReport>> groups;
  for (const auto& m : metrics) groups[{m.experiment_id, m.stain}].push_back(m.report);
  std::vector<ExperimentResult> out;
  for (auto& [key, slides] : groups) {
    out.push_back(make_experiment_result(key.first, key.second, std::move(slides)));
  }
  return out;
}

std::string experiment_result_to_json(const ExperimentResult& r) {
  nlohmann::ordered_json doc;
  doc["experiment_id"] = r.experiment_id;
  doc["stain"] = r.stain;
  doc["average"] = {{"sensitivity", r.average.sensitivity},
                    {"specificity", r.average.specificity},
                    {"sensitivity_slides", r.average.sensitivity_slides},
                    {"specificity_slides", r.average.specificity_slides}};
  doc["slides"] = nlohmann::ordered_json::array();
  for (const auto& s : r.slides) doc["slides"].push_back(metrics_json(s));
  return doc.dump(2) + "\n";
}

ExperimentResult experiment_result_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    ExperimentResult r;
    r.experiment_id = doc.at("experiment_id").get<int>();
    r.stain = doc.at("stain").get<std::string>();
    const auto& a = doc.at("average");
    r.average.sensitivity = a.at("sensitivity").get<double>();
    r.average.specificity = a.at("specificity").get<double>();
    r.average.sensitivity_slides = a.at("sensitivity_slides").get<std::size_t>();
    r.average.specificity_slides = a.at("specificity_slides").get<std::size_t>();
    for (const auto& j : doc.at("slides")) r.slides.push_back(metrics_from(j));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("metrics JSON: ") + e.what());
  }
}

std::string render_roc_csv(std::span<const RocCurve> curves) {
  if (curves.empty()) throw Error(ErrorCode::kInvalidArgument, "no ROC curves");
  std::string out = "curve,threshold,tpr,fpr\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += csv_field(c.label) + "," + format_double(p.threshold) + "," + format_double(p.tpr) +
             "," + format_double(p.fpr) + "\n";
    }
  }
  return out;
}

std::vector<RocCurve> parse_roc_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "curve,threshold,tpr,fpr") {
    throw Error(ErrorCode::kSchemaViolation, "ROC CSV header mismatch");
  }
  std::vector<RocCurve> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv_split(lines[i]);
    if (f.size() != 4) throw Error(ErrorCode::kSchemaViolation, "ROC CSV row needs 4 fields");
    if (out.empty() || out.back().label != f[0]) out.push_back({f[0], {}});
    out.back().points.push_back({num(f[1], "threshold"), num(f[2], "tpr"), num(f[3], "fpr")});
  }
  return out;
}

std::string render_roc_svg(std::span<const RocCurve> curves) {
  if (curves.empty()) throw Error(ErrorCode::kInvalidArgument, "no ROC curves");
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr double kLeft = 60, kTop = 20, kSize = 400;
  const double legend_h = 18.0 * static_cast<double>(curves.size());
  char buf[512];
  auto px = [&](double fpr) { return kLeft + fpr * kSize; };
  auto py = [&](double tpr) { return kTop + (1.0 - tpr) * kSize; };

  std::string out;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                static_cast<int>(kLeft + kSize + 20), static_cast<int>(kTop + kSize + 60 + legend_h),
                static_cast<int>(kLeft + kSize + 20), static_cast<int>(kTop + kSize + 60 + legend_h));
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                kLeft, kTop, kSize, kSize);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbbbbb\" "
                "stroke-dasharray=\"4,4\"/>\n",
                px(0), py(0), px(1), py(1));
  out += buf;
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"middle\">%.1f</text>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%.1f</text>\n",
                  px(v), kTop + kSize + 14, v, kLeft - 4, py(v) + 3, v);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">"
                "False positive rate (1 - specificity)</text>\n"
                "<text x=\"14\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 14 %.2f)\">True positive rate (sensitivity)</text>\n",
                kLeft + kSize / 2, kTop + kSize + 32, kTop + kSize / 2, kTop + kSize / 2);
  out += buf;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % (sizeof(kColors) / sizeof(kColors[0]))];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curves[c].points.size(); ++i) {
      const auto& p = curves[c].points[i];
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", px(p.fpr), py(p.tpr));
      out += buf;
    }
    out += "\"/>\n";
    const double ly = kTop + kSize + 50 + 18.0 * static_cast<double>(c);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\">",
                  kLeft, ly, kLeft + 24, ly, color, kLeft + 30, ly + 4);
    out += buf;
    for (char ch : curves[c].label) {
      switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += ch;
      }
    }
    out += "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace glomdet::eval
