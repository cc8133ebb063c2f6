#include "commands.hpp"

#include <algorithm>
#include <json.hpp>
#include <ostream>

#include "glomdet/annotation.hpp"
#include "glomdet/cli.hpp"
#include "glomdet/detection.hpp"
#include "glomdet/errors.hpp"
#include "glomdet/evaluation.hpp"
#include "glomdet/experiments.hpp"
#include "glomdet/image_io.hpp"
#include "glomdet/report.hpp"
#include "glomdet/rle.hpp"
#include "glomdet/simulate.hpp"
#include "glomdet/slide.hpp"
#include "glomdet/synthetic.hpp"
#include "glomdet/tiling.hpp"
#include "glomdet/tissue_mask.hpp"
#include "glomdet/training_config.hpp"
#include "glomdet/util.hpp"

namespace glomdet::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Everything needed to replay a run: inputs with content fingerprints, the
// effective parameters and the seed. No clock values.
class RunManifest {
 public:
  RunManifest(std::string command, const CommandContext& ctx) {
    doc_["command"] = std::move(command);
    doc_["version"] = kVersion;
    doc_["argv"] = ctx.argv;
    doc_["seed"] = 0;
    doc_["parameters"] = json::object();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
  }

  template <typename T>
  void param(const std::string& key, const T& value) {
    doc_["parameters"][key] = value;
  }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const fs::path& p) {
    json entry{{"path", p.string()}};
    if (fs::is_regular_file(p)) entry["fnv1a64"] = file_fingerprint(p);
    doc_["inputs"].push_back(std::move(entry));
  }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }
  void write(const fs::path& p) const { write_text_file(p, doc_.dump(2) + "\n"); }

 private:
  json doc_;
};

fs::path out_dir(const std::string& out) {
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  ensure_directory(out);
  return fs::path(out);
}

void write_output(RunManifest& m, const fs::path& p, std::string_view content) {
  write_text_file(p, content);
  m.output(p);
}

double tissue_area_from_json(const fs::path& p) {
  try {
    const auto doc = nlohmann::json::parse(read_text_file(p));
    return doc.at("tissue_area").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, p.string() + ": " + e.what());
  }
}

struct SlideDims {
  std::string id;
  std::int64_t width = 0, height = 0;
};

SlideDims dims_from(const std::string& slide, const std::string& ann, const std::string& slide_id,
                    std::int64_t width, std::int64_t height, RunManifest& m) {
  if (!slide.empty()) {
    m.input(slide);
    const auto s = wsi::open_slide(slide);
    return {slide_id.empty() ? s.slide_id() : slide_id, s.width_px(), s.height_px()};
  }
  if (!ann.empty()) {
    m.input(ann);
    const auto a = ann::load_canonical(ann);
    return {slide_id.empty() ? a.slide_id : slide_id, a.slide_width, a.slide_height};
  }
  if (width <= 0 || height <= 0 || slide_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "slide size needs --slide, --ann, or --width, --height and --slide-id");
  }
  return {slide_id, width, height};
}

}  // namespace

void cmd_convert(const ConvertOptions& o, const CommandContext& ctx) {
  RunManifest m("convert", ctx);
  const int sources = !o.rle.empty() + !o.polygons.empty() + !o.boxes.empty();
  if (sources != 1) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --rle, --polygons, --boxes");
  }
  if (o.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto dims = dims_from(o.slide, "", o.slide_id, o.width, o.height, m);
  m.param("min_area", o.min_area);

  ann::SlideAnnotation a;
  if (!o.rle.empty()) {
    m.input(o.rle);
    const auto records = ann::parse_rle_csv(read_text_file(o.rle));
    const ann::RleRecord* pick = nullptr;
    for (const auto& r : records) {
      if (r.id != dims.id) continue;
      if (pick) throw Error(ErrorCode::kSchemaViolation, "duplicate RLE id '" + r.id + "'");
      pick = &r;
    }
    if (!pick && records.size() == 1) pick = &records.front();
    if (!pick) {
      throw Error(ErrorCode::kSchemaViolation,
                  o.rle + ": no RLE record with id '" + dims.id + "'");
    }
    const auto mask = ann::decode_rle(pick->encoding, dims.width, dims.height);
    ann::RleConversionOptions opts;
    opts.min_component_area = o.min_area;
    a = ann::annotation_from_rle(mask, dims.id, dims.width, dims.height, opts);
  } else if (!o.polygons.empty()) {
    m.input(o.polygons);
    const auto polys = ann::parse_polygon_json(read_text_file(o.polygons));
    a = ann::annotation_from_polygons(polys, dims.id, dims.width, dims.height);
  } else {
    m.input(o.boxes);
    const auto boxes = ann::parse_bbox_csv(read_text_file(o.boxes));
    a = ann::annotation_from_boxes(boxes, dims.id, dims.width, dims.height);
  }
  const fs::path out(o.out);
  if (out.has_parent_path()) ensure_directory(out.parent_path());
  ann::save_canonical(a, out);
  m.output(out);
  m.write(fs::path(o.out + ".run.json"));
  *ctx.out << "wrote " << a.boxes.size() << " boxes to " << o.out << "\n";
}

void cmd_mask(const MaskOptions& o, const CommandContext& ctx) {
  RunManifest m("mask", ctx);
  const auto dir = out_dir(o.out);
  m.input(o.slide);
  const auto slide = wsi::open_slide(o.slide);
  wsi::TissueMaskOptions opts;
  opts.downsample = o.downsample;
  opts.min_saturation = o.min_saturation;
  m.param("downsample", o.downsample);
  m.param("min_saturation", o.min_saturation);
  m.param("min_component_pixels", opts.min_component_pixels);
  const auto mask = wsi::compute_tissue_mask(slide, opts);

  wsi::save_mask_png(mask, dir / "tissue_mask.png");
  m.output(dir / "tissue_mask.png");
  json t;
  t["slide_id"] = slide.slide_id();
  t["slide_width"] = slide.width_px();
  t["slide_height"] = slide.height_px();
  t["downsample"] = mask.downsample;
  t["mask_width"] = mask.width;
  t["mask_height"] = mask.height;
  t["saturation_threshold"] = mask.saturation_threshold;
  t["tissue_area"] = mask.tissue_area_px2;
  write_output(m, dir / "tissue.json", t.dump(2) + "\n");
  m.write(dir / "run_manifest.json");
  *ctx.out << "tissue area " << format_double(mask.tissue_area_px2) << " px^2\n";
}

void cmd_export(const ExportOptions& o, const CommandContext& ctx) {
  RunManifest m("export", ctx);
  const auto dir = out_dir(o.out);
  m.input(o.slide);
  m.input(o.ann);
  m.param("tile_size", o.tile_size);
  m.param("overlap", o.overlap);
  m.param("min_fraction", o.min_fraction);
  m.param("workers", o.workers);
  const auto slide = wsi::open_slide(o.slide);
  const auto a = ann::load_canonical(o.ann);
  const auto spec = prep::plan_tiles(slide.width_px(), slide.height_px(), o.tile_size, o.overlap);
  const auto manifest = prep::export_patches(slide, a, spec, o.min_fraction, dir, o.workers);
  m.output(dir / "patches.csv");
  m.write(dir / "run_manifest.json");
  *ctx.out << "exported " << manifest.patch_count << " patches, " << manifest.label_count
           << " labels\n";
}

void cmd_config(const ConfigOptions& o, const CommandContext& ctx) {
  auto config = prep::default_training_config();
  config.num_classes = o.classes;
  config.filters = prep::yolo_head_filters(o.classes);
  prep::validate(config);
  const auto text = prep::render_darknet_cfg(config);
  *ctx.out << text;
  if (o.out.empty()) return;
  RunManifest m("config", ctx);
  m.param("classes", o.classes);
  const auto dir = out_dir(o.out);
  write_output(m, dir / "yolov4-glomeruli.cfg", text);
  m.write(dir / "run_manifest.json");
}

void cmd_experiments(const ExperimentsOptions& o, const CommandContext& ctx) {
  const auto text = prep::render_experiment_manifest(prep::build_experiment_plans());
  *ctx.out << text;
  if (o.out.empty()) return;
  RunManifest m("experiments", ctx);
  const auto dir = out_dir(o.out);
  write_output(m, dir / "experiments.json", text);
  m.write(dir / "run_manifest.json");
}

void cmd_detect(const DetectOptions& o, const CommandContext& ctx) {
  RunManifest m("detect", ctx);
  const auto dir = out_dir(o.out);
  if (!fs::is_directory(o.tiles)) {
    throw Error(ErrorCode::kUnreadableFile, "tile directory '" + o.tiles + "' not found");
  }
  m.input(o.tiles);
  m.param("detector_command", o.detector_command);
  const auto raw_path = dir / "raw_detections.json";
  det::run_detector_command(o.detector_command, fs::absolute(o.tiles), fs::absolute(raw_path));
  const auto raws = det::parse_detector_json(raw_path);
  m.output(raw_path);
  m.write(dir / "run_manifest.json");
  *ctx.out << "detector reported " << raws.size() << " boxes\n";
}

void cmd_stitch(const StitchOptions& o, const CommandContext& ctx) {
  RunManifest m("stitch", ctx);
  const auto dir = out_dir(o.out);
  const auto dims = dims_from(o.slide, o.ann, o.slide_id, o.width, o.height, m);
  m.input(o.raw);
  m.param("nms_threshold", o.nms);
  m.param("workers", o.workers);
  const auto per_tile = det::group_by_tile(det::parse_detector_json(o.raw));
  det::DetectionSet set{dims.id, dims.width, dims.height,
                        det::stitch(per_tile, dims.width, dims.height, o.nms, o.workers)};
  write_output(m, dir / "detections.json", det::to_detections_json(set));
  m.write(dir / "run_manifest.json");
  *ctx.out << "kept " << set.detections.size() << " detections\n";
}

void cmd_evaluate(const EvaluateOptions& o, const CommandContext& ctx) {
  RunManifest m("evaluate", ctx);
  const auto dir = out_dir(o.out);
  if (o.mask_area.has_value() == !o.tissue.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --mask-area, --tissue");
  }
  m.input(o.ann);
  m.input(o.dets);
  double tissue_area = 0.0;
  if (o.mask_area) {
    tissue_area = *o.mask_area;
  } else {
    m.input(o.tissue);
    tissue_area = tissue_area_from_json(o.tissue);
  }
  m.param("tissue_area", tissue_area);
  m.param("conf_threshold", o.conf);
  m.param("iou_threshold", o.iou);
  m.param("experiment_id", o.experiment_id);
  m.param("stain", o.stain);
  const auto a = ann::load_canonical(o.ann);
  const auto d = det::load_detections(o.dets);
  if (d.slide_width != a.slide_width || d.slide_height != a.slide_height) {
    throw Error(ErrorCode::kDimensionMismatch, "detections and annotation disagree on slide size");
  }
  eval::SlideMetrics sm{o.experiment_id, o.stain,
                        eval::evaluate_slide(d.detections, a.boxes, tissue_area, o.conf, o.iou)};
  sm.report.slide_id = a.slide_id;
  write_output(m, dir / "metrics.json", eval::slide_metrics_to_json(sm));
  write_output(m, dir / "metrics.csv", eval::render_slide_metrics_csv({&sm, 1}));
  m.write(dir / "run_manifest.json");
  *ctx.out << a.slide_id << ": tp " << sm.report.tp << " fp " << sm.report.fp << " fn "
           << sm.report.fn << "\n";
}

void cmd_roc(const RocOptions& o, const CommandContext& ctx) {
  RunManifest m("roc", ctx);
  const auto dir = out_dir(o.out);
  if (o.ann.empty() || o.ann.size() != o.dets.size()) {
    throw Error(ErrorCode::kInvalidArgument, "--ann and --dets must pair up");
  }
  const std::size_t areas = o.tissue.size() + o.mask_area.size();
  if (areas != o.ann.size() || (!o.tissue.empty() && !o.mask_area.empty())) {
    throw Error(ErrorCode::kInvalidArgument,
                "give one --tissue or one --mask-area per slide, not a mix");
  }
  m.param("iou_threshold", o.iou);
  m.param("label", o.label);
  std::vector<eval::SlideCase> cases;
  for (std::size_t i = 0; i < o.ann.size(); ++i) {
    m.input(o.ann[i]);
    m.input(o.dets[i]);
    const auto a = ann::load_canonical(o.ann[i]);
    auto d = det::load_detections(o.dets[i]);
    double area = 0.0;
    if (o.tissue.empty()) {
      area = o.mask_area[i];
    } else {
      m.input(o.tissue[i]);
      area = tissue_area_from_json(o.tissue[i]);
    }
    cases.push_back({a.slide_id, std::move(d.detections), a.boxes, area});
  }
  const auto thresholds = eval::default_roc_thresholds();
  auto curve = eval::roc_curve_macro(cases, o.iou, thresholds);
  curve.label = o.label;
  write_output(m, dir / "roc.csv", eval::render_roc_csv({&curve, 1}));
  write_output(m, dir / "roc.svg", eval::render_roc_svg({&curve, 1}));
  m.write(dir / "run_manifest.json");
  *ctx.out << "roc over " << cases.size() << " slides, " << curve.points.size() << " points\n";
}

void cmd_simulate(const SimulateOptions& o, const CommandContext& ctx) {
  RunManifest m("simulate", ctx);
  const auto dir = out_dir(o.out);
  m.input(o.ann);
  m.seed(o.seed);
  m.param("drop_rate", o.drop_rate);
  m.param("fp_rate_per_megapixel", o.fp_rate);
  m.param("jitter_px", o.jitter);
  m.param("tile_size", o.tile_size);
  m.param("overlap", o.overlap);
  const auto a = ann::load_canonical(o.ann);
  std::optional<wsi::TissueMask> mask;
  if (!o.slide.empty()) {
    m.input(o.slide);
    const auto slide = wsi::open_slide(o.slide);
    if (slide.width_px() != a.slide_width || slide.height_px() != a.slide_height) {
      throw Error(ErrorCode::kDimensionMismatch, "slide and annotation disagree on size");
    }
    mask = wsi::compute_tissue_mask(slide);
  }
  det::SimulationParams p;
  p.drop_rate = o.drop_rate;
  p.fp_rate_per_megapixel = o.fp_rate;
  p.jitter_px = o.jitter;
  p.seed = o.seed;
  const auto dets = det::simulate_detector(a, p, mask ? &*mask : nullptr);
  const auto spec = prep::plan_tiles(a.slide_width, a.slide_height, o.tile_size, o.overlap);
  const auto per_tile = det::fan_out_to_tiles(dets, spec, a.slide_id);
  write_output(m, dir / "raw_detections.json", det::render_detector_json(per_tile));
  m.write(dir / "run_manifest.json");
  *ctx.out << "simulated " << dets.size() << " detections\n";
}

void cmd_report(const ReportOptions& o, const CommandContext& ctx) {
  RunManifest m("report", ctx);
  const auto dir = out_dir(o.out);
  std::vector<eval::SlideMetrics> all;
  for (const auto& p : o.metrics) {
    m.input(p);
    all.push_back(eval::slide_metrics_from_json(read_text_file(p)));
  }
  const auto results = eval::group_experiments(all);
  const auto table = eval::render_report_table(results);
  write_output(m, dir / "report.txt", table);
  write_output(m, dir / "report.csv", eval::render_report_csv(results));
  m.write(dir / "run_manifest.json");
  *ctx.out << table;
}

void cmd_synth(const SynthOptions& o, const CommandContext& ctx) {
  RunManifest m("synth", ctx);
  const auto dir = out_dir(o.out);
  m.seed(o.seed);
  m.param("slide_id", o.slide_id);
  m.param("size", o.size);
  m.param("count", o.count);
  synth::SyntheticSlideParams p;
  p.width = p.height = o.size;
  p.num_glomeruli = o.count;
  p.seed = o.seed;
  const auto s = synth::make_synthetic_slide(o.slide_id, p);
  const auto tiff = dir / (o.slide_id + ".tiff");
  wsi::write_tiff(tiff, s.image);
  m.output(tiff);
  write_output(m, dir / (o.slide_id + "_masks.csv"),
               "id,encoding\n" + o.slide_id + "," + ann::encode_rle(s.glomerulus_mask) + "\n");
  m.write(dir / "run_manifest.json");
  *ctx.out << "wrote " << tiff.string() << " with " << s.annotation.boxes.size()
           << " glomeruli\n";
}

}  // namespace glomdet::cli
