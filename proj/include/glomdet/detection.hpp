#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "glomdet/geometry.hpp"
#include "glomdet/tiling.hpp"

namespace glomdet::det {

// One box as reported by the external detector, relative to its tile.
// objectness carries Pr(Object) * IOU as predicted by the network;
// class_probs[i] carries Pr(Class_i | Object).
struct DetectorRawOutput {
  prep::TileRect tile;
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;  // normalized to the tile
  double objectness = 0.0;
  std::vector<double> class_probs;
  std::string source_image;
};

struct Detection {
  BBox bbox;  // level-0 slide pixels
  double confidence = 0.0;
  int class_id = 0;
  bool operator==(const Detection&) const = default;
};

// Class-specific confidence: Pr(Class_i | Object) * Pr(Object) * IOU, where
// the detector's objectness already holds Pr(Object) * IOU. Throws
// DomainError unless both inputs are in [0, 1].
double combine_confidence(double objectness, double class_prob);

// Darknet `-out json` layout: a list of frames, each with `filename` and
// `objects`; objects hold `relative_coordinates` {center_x, center_y, width,
// height} and `confidence`. A frame's tile comes from an optional `tile`
// object {x, y, width, height} or else from the patch file name. Objects
// may carry `objectness` and `class_probs`; otherwise objectness is taken
// as `confidence` with probability 1 for `class_id`. Unknown fields are
// ignored. Throws MalformedDetectionFile.
std::vector<DetectorRawOutput> parse_detector_json_text(std::string_view text);
std::vector<DetectorRawOutput> parse_detector_json(const std::filesystem::path& path);

// Frames in the same layout; each raw output becomes one object.
std::string render_detector_json(const std::vector<std::vector<DetectorRawOutput>>& per_tile);

// Groups records by tile in order of first appearance.
std::vector<std::vector<DetectorRawOutput>> group_by_tile(
    const std::vector<DetectorRawOutput>& raws);

// Affine map into slide pixels, clamped to the slide. Confidence combines
// objectness with the largest class probability; ties pick the lower class.
Detection to_slide_coords(const DetectorRawOutput& raw, std::int64_t slide_width,
                          std::int64_t slide_height);

// Descending confidence, then ascending x_min, then ascending y_min. Stable.
void sort_canonical(std::vector<Detection>& dets);

// Greedy class-agnostic suppression in canonical order: a detection survives
// iff its IoU with every survivor so far is below iou_threshold. Throws
// DomainError unless 0 < iou_threshold < 1.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold = 0.45);

// Maps every tile's records to slide coordinates (tiles in parallel), joins
// them in tile order and suppresses duplicates from overlapping tiles.
std::vector<Detection> stitch(const std::vector<std::vector<DetectorRawOutput>>& per_tile,
                              std::int64_t slide_width, std::int64_t slide_height,
                              double nms_threshold = 0.45, unsigned workers = 1);

// For every tile that fully contains a detection, emits the record the
// detector would report for it in that tile.
std::vector<std::vector<DetectorRawOutput>> fan_out_to_tiles(const std::vector<Detection>& dets,
                                                             const prep::TileSpec& spec,
                                                             const std::string& slide_id);

struct DetectionSet {
  std::string slide_id;
  std::int64_t slide_width = 0;
  std::int64_t slide_height = 0;
  std::vector<Detection> detections;
  bool operator==(const DetectionSet&) const = default;
};

std::string to_detections_json(const DetectionSet& set);
DetectionSet from_detections_json(std::string_view text);
DetectionSet load_detections(const std::filesystem::path& path);

// Expands {tile_dir} and {out_json} (shell-quoted) in the template, runs it
// through the shell and checks that it exited 0 and wrote out_json. Throws
// DetectorFailed.
std::string expand_detector_command(std::string_view command_template,
                                    const std::filesystem::path& tile_dir,
                                    const std::filesystem::path& out_json);
void run_detector_command(std::string_view command_template,
                          const std::filesystem::path& tile_dir,
                          const std::filesystem::path& out_json);

}  // namespace glomdet::det
