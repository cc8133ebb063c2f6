#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace glomdet::cli {

struct ConvertOptions {
  std::string rle, polygons, boxes;
  std::string slide;
  std::string slide_id;
  std::int64_t width = 0, height = 0;
  std::int64_t min_area = 256;
  std::string out;
};

struct MaskOptions {
  std::string slide;
  int downsample = 16;
  int min_saturation = 13;
  std::string out;
};

struct ExportOptions {
  std::string slide, ann;
  std::int64_t tile_size = 1024, overlap = 256;
  double min_fraction = 0.6;
  unsigned workers = 1;
  std::string out;
};

struct ConfigOptions {
  int classes = 1;
  std::string out;
};

struct ExperimentsOptions {
  std::string out;
};

struct DetectOptions {
  std::string tiles;
  std::string detector_command;
  std::string out;
};

struct StitchOptions {
  std::string raw;
  std::string slide, ann;
  std::string slide_id;
  std::int64_t width = 0, height = 0;
  double nms = 0.45;
  unsigned workers = 1;
  std::string out;
};

struct EvaluateOptions {
  std::string ann, dets;
  std::optional<double> mask_area;
  std::string tissue;
  double conf = 0.25, iou = 0.5;
  int experiment_id = 0;
  std::string stain = "NONE";
  std::string out;
};

struct RocOptions {
  std::vector<std::string> ann, dets, tissue;
  std::vector<double> mask_area;
  double iou = 0.5;
  std::string label = "detector";
  std::string out;
};

struct SimulateOptions {
  std::string ann, slide;
  double drop_rate = 0.2, fp_rate = 0.5, jitter = 4.0;
  std::int64_t tile_size = 1024, overlap = 256;
  std::uint64_t seed = 0;
  std::string out;
};

struct ReportOptions {
  std::vector<std::string> metrics;
  std::string out;
};

struct SynthOptions {
  std::string slide_id = "synthetic";
  std::int64_t size = 4096;
  int count = 40;
  std::uint64_t seed = 0;
  std::string out;
};

// Each returns normally on success and throws glomdet::Error otherwise.
// `argv` is the command line as received, recorded in the run manifest.
struct CommandContext {
  std::vector<std::string> argv;
  std::ostream* out = nullptr;
};

void cmd_convert(const ConvertOptions& o, const CommandContext& ctx);
void cmd_mask(const MaskOptions& o, const CommandContext& ctx);
void cmd_export(const ExportOptions& o, const CommandContext& ctx);
void cmd_config(const ConfigOptions& o, const CommandContext& ctx);
void cmd_experiments(const ExperimentsOptions& o, const CommandContext& ctx);
void cmd_detect(const DetectOptions& o, const CommandContext& ctx);
void cmd_stitch(const StitchOptions& o, const CommandContext& ctx);
void cmd_evaluate(const EvaluateOptions& o, const CommandContext& ctx);
void cmd_roc(const RocOptions& o, const CommandContext& ctx);
void cmd_simulate(const SimulateOptions& o, const CommandContext& ctx);
void cmd_report(const ReportOptions& o, const CommandContext& ctx);
void cmd_synth(const SynthOptions& o, const CommandContext& ctx);

}  // namespace glomdet::cli
