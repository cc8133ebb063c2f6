#include "glomdet/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <ostream>

#include "commands.hpp"
#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::cli {

namespace {

// key=value lines; blank lines and lines starting with '#' are skipped.
// Keys are flag names without the leading dashes, '_' and '-' alike.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  const auto text = read_text_file(path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t pos = 0, line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Appends config-file values for flags the subcommand knows and the command
// line did not set.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (!sub) return args;
  for (const auto& [key, value] : read_config_file(config_path)) {
    const std::string flag = "--" + key;
    if (key == "config" || flag_given(args, flag)) continue;
    if (!sub->get_option_no_throw(flag)) continue;
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Glomerulus detection pipeline toolkit", "glomdet"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string config_file;
  std::function<void()> action;
  CommandContext ctx{args, &out};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key=value file; flags on the command line win")
        ->check(CLI::ExistingFile);
  };

  ConvertOptions convert;
  {
    auto* c = app.add_subcommand("convert", "Convert RLE, polygon or box annotations");
    auto* rle = c->add_option("--rle", convert.rle, "RLE CSV (id,encoding)");
    auto* poly = c->add_option("--polygons", convert.polygons, "polygon JSON");
    auto* box = c->add_option("--boxes", convert.boxes, "box CSV (x_min,y_min,x_max,y_max)");
    rle->excludes(poly, box);
    poly->excludes(box);
    c->add_option("--slide", convert.slide, "slide image, for id and size");
    c->add_option("--slide-id", convert.slide_id, "slide id (default: slide file stem)");
    c->add_option("--width", convert.width, "slide width when --slide is absent");
    c->add_option("--height", convert.height, "slide height when --slide is absent");
    c->add_option("--min-area", convert.min_area, "drop RLE components below this many pixels")
        ->capture_default_str();
    c->add_option("--out", convert.out, "canonical annotation JSON to write")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_convert(convert, ctx); }; });
  }

  MaskOptions mask;
  {
    auto* c = app.add_subcommand("mask", "Compute the tissue mask and tissue area");
    c->add_option("--slide", mask.slide, "slide image")->required();
    c->add_option("--downsample", mask.downsample, "mask block edge in pixels")
        ->capture_default_str();
    c->add_option("--min-saturation", mask.min_saturation, "saturation floor (0-255)")
        ->capture_default_str();
    c->add_option("--out", mask.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_mask(mask, ctx); }; });
  }

  ExportOptions exp;
  {
    auto* c = app.add_subcommand("export", "Export tiles with darknet labels");
    c->add_option("--slide", exp.slide, "slide image")->required();
    c->add_option("--ann", exp.ann, "canonical annotation JSON")->required();
    c->add_option("--tile-size", exp.tile_size)->capture_default_str();
    c->add_option("--overlap", exp.overlap)->capture_default_str();
    c->add_option("--min-fraction", exp.min_fraction, "box area share needed to label a tile")
        ->capture_default_str();
    c->add_option("--workers", exp.workers)->capture_default_str()->check(CLI::Range(1u, 256u));
    c->add_option("--out", exp.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_export(exp, ctx); }; });
  }

  ConfigOptions cfg;
  {
    auto* c = app.add_subcommand("config", "Print the darknet training configuration");
    c->add_option("--classes", cfg.classes)->capture_default_str();
    c->add_option("--out", cfg.out, "also write yolov4-glomeruli.cfg here");
    add_common(c);
    c->callback([&] { action = [&] { cmd_config(cfg, ctx); }; });
  }

  ExperimentsOptions exps;
  {
    auto* c = app.add_subcommand("experiments", "Print the training/evaluation plans");
    c->add_option("--out", exps.out, "also write experiments.json here");
    add_common(c);
    c->callback([&] { action = [&] { cmd_experiments(exps, ctx); }; });
  }

  DetectOptions detect;
  {
    auto* c = app.add_subcommand("detect", "Run an external detector over exported tiles");
    c->add_option("--tiles", detect.tiles, "directory of exported patches")->required();
    c->add_option("--detector-command", detect.detector_command,
                  "shell template with {tile_dir} and {out_json}")
        ->required();
    c->add_option("--out", detect.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_detect(detect, ctx); }; });
  }

  StitchOptions stitch;
  {
    auto* c = app.add_subcommand("stitch", "Map tile detections to the slide and merge overlaps");
    c->add_option("--raw", stitch.raw, "darknet JSON detector output")->required();
    c->add_option("--slide", stitch.slide, "slide image, for id and size");
    c->add_option("--ann", stitch.ann, "canonical annotation, for id and size");
    c->add_option("--slide-id", stitch.slide_id);
    c->add_option("--width", stitch.width);
    c->add_option("--height", stitch.height);
    c->add_option("--nms", stitch.nms, "IoU above which overlapping boxes are merged")
        ->capture_default_str();
    c->add_option("--workers", stitch.workers)->capture_default_str()->check(CLI::Range(1u, 256u));
    c->add_option("--out", stitch.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_stitch(stitch, ctx); }; });
  }

  EvaluateOptions ev;
  {
    auto* c = app.add_subcommand("evaluate", "Score one slide's detections");
    c->add_option("--ann", ev.ann, "canonical annotation JSON")->required();
    c->add_option("--dets", ev.dets, "stitched detections JSON")->required();
    auto* area = c->add_option("--mask-area", ev.mask_area, "tissue area in px^2");
    auto* tissue = c->add_option("--tissue", ev.tissue, "tissue.json from `mask`");
    area->excludes(tissue);
    c->add_option("--conf", ev.conf, "confidence threshold")->capture_default_str();
    c->add_option("--iou", ev.iou, "IoU needed for a match")->capture_default_str();
    c->add_option("--experiment-id", ev.experiment_id)->capture_default_str();
    c->add_option("--stain", ev.stain, "evaluation set name")->capture_default_str();
    c->add_option("--out", ev.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_evaluate(ev, ctx); }; });
  }

  RocOptions roc;
  {
    auto* c = app.add_subcommand("roc", "Macro-averaged ROC over a confidence sweep");
    c->add_option("--ann", roc.ann, "annotation per slide (repeat)")->required();
    c->add_option("--dets", roc.dets, "detections per slide (repeat)")->required();
    c->add_option("--tissue", roc.tissue, "tissue.json per slide (repeat)");
    c->add_option("--mask-area", roc.mask_area, "tissue area per slide (repeat)");
    c->add_option("--iou", roc.iou)->capture_default_str();
    c->add_option("--label", roc.label)->capture_default_str();
    c->add_option("--out", roc.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_roc(roc, ctx); }; });
  }

  SimulateOptions sim;
  {
    auto* c = app.add_subcommand("simulate", "Seeded stand-in for the detector");
    c->add_option("--ann", sim.ann, "canonical annotation JSON")->required();
    c->add_option("--slide", sim.slide, "slide image; false positives go on its tissue");
    c->add_option("--drop-rate", sim.drop_rate)->capture_default_str();
    c->add_option("--fp-rate", sim.fp_rate, "false positives per megapixel")
        ->capture_default_str();
    c->add_option("--jitter", sim.jitter, "corner jitter in pixels")->capture_default_str();
    c->add_option("--tile-size", sim.tile_size)->capture_default_str();
    c->add_option("--overlap", sim.overlap)->capture_default_str();
    c->add_option("--seed", sim.seed)->capture_default_str();
    c->add_option("--out", sim.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_simulate(sim, ctx); }; });
  }

  ReportOptions rep;
  {
    auto* c = app.add_subcommand("report", "Per-experiment averages from metrics files");
    c->add_option("--metrics", rep.metrics, "metrics.json from `evaluate` (repeat)")
        ->required();
    c->add_option("--out", rep.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_report(rep, ctx); }; });
  }

  SynthOptions syn;
  {
    auto* c = app.add_subcommand("synth", "Write a synthetic slide and its RLE mask");
    c->add_option("--slide-id", syn.slide_id)->capture_default_str();
    c->add_option("--size", syn.size, "slide edge in pixels")->capture_default_str();
    c->add_option("--count", syn.count, "number of glomeruli")->capture_default_str();
    c->add_option("--seed", syn.seed)->capture_default_str();
    c->add_option("--out", syn.out, "output directory")->required();
    add_common(c);
    c->callback([&] { action = [&] { cmd_synth(syn, ctx); }; });
  }

  try {
    auto full = apply_config(app, args);
    std::reverse(full.begin(), full.end());
    app.parse(full);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? 2 : 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace glomdet::cli
