#include "glomdet/detection.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <json.hpp>

#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::det {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(ErrorCode::kMalformedDetectionFile, msg);
}

double unit_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    malformed(where + ": missing numeric '" + key + "'");
  }
  const double v = obj[key].get<double>();
  if (!in_unit(v)) malformed(where + ": " + key + " = " + obj[key].dump() + " outside [0,1]");
  return v;
}

}  // namespace

double combine_confidence(double objectness, double class_prob) {
  if (!in_unit(objectness) || !in_unit(class_prob)) {
    throw Error(ErrorCode::kDomainError, "confidence factors must lie in [0, 1]");
  }
  return objectness * class_prob;
}

std::vector<DetectorRawOutput> parse_detector_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (doc.is_object()) doc = nlohmann::json::array({doc});
  if (!doc.is_array()) malformed("top level must be a list of frames");

  std::vector<DetectorRawOutput> out;
  for (std::size_t f = 0; f < doc.size(); ++f) {
    const auto& frame = doc[f];
    const std::string where = "frame " + std::to_string(f);
    if (!frame.is_object()) malformed(where + " is not an object");
    std::string filename;
    if (frame.contains("filename") && frame["filename"].is_string()) {
      filename = frame["filename"].get<std::string>();
    }
    prep::TileRect tile;
    if (frame.contains("tile")) {
      const auto& t = frame["tile"];
      try {
        tile = {t.at("x").get<std::int64_t>(), t.at("y").get<std::int64_t>(),
                t.at("width").get<std::int64_t>(), t.at("height").get<std::int64_t>()};
      } catch (const nlohmann::json::exception&) {
        malformed(where + ": tile needs integer x, y, width, height");
      }
      if (tile.x < 0 || tile.y < 0 || tile.width < 1 || tile.height < 1) {
        malformed(where + ": invalid tile placement");
      }
    } else if (auto parsed = prep::parse_patch_name(filename)) {
      tile = *parsed;
    } else {
      malformed(where + ": no tile placement in 'tile' or file name '" + filename + "'");
    }
    if (!frame.contains("objects")) continue;
    const auto& objects = frame["objects"];
    if (!objects.is_array()) malformed(where + ": objects must be a list");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      const std::string owhere = where + " object " + std::to_string(i);
      if (!o.is_object() || !o.contains("relative_coordinates") ||
          !o["relative_coordinates"].is_object()) {
        malformed(owhere + ": missing relative_coordinates");
      }
      const auto& rc = o["relative_coordinates"];
      DetectorRawOutput r;
      r.tile = tile;
      r.source_image = filename;
      r.cx = unit_field(rc, "center_x", owhere);
      r.cy = unit_field(rc, "center_y", owhere);
      r.w = unit_field(rc, "width", owhere);
      r.h = unit_field(rc, "height", owhere);
      if (r.w <= 0.0 || r.h <= 0.0) malformed(owhere + ": zero-sized box");
      if (o.contains("objectness")) {
        r.objectness = unit_field(o, "objectness", owhere);
        if (!o.contains("class_probs") || !o["class_probs"].is_array() ||
            o["class_probs"].empty()) {
          malformed(owhere + ": objectness given without class_probs");
        }
        for (const auto& p : o["class_probs"]) {
          if (!p.is_number() || !in_unit(p.get<double>())) {
            malformed(owhere + ": class_probs entries must lie in [0,1]");
          }
          r.class_probs.push_back(p.get<double>());
        }
      } else {
        r.objectness = unit_field(o, "confidence", owhere);
        int cls = 0;
        if (o.contains("class_id")) {
          if (!o["class_id"].is_number_integer() || o["class_id"].get<int>() < 0) {
            malformed(owhere + ": class_id must be a non-negative integer");
          }
          cls = o["class_id"].get<int>();
        }
        r.class_probs.assign(static_cast<std::size_t>(cls) + 1, 0.0);
        r.class_probs.back() = 1.0;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<DetectorRawOutput> parse_detector_json(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kUnreadableFile, "cannot read detector output " + path.string());
  }
  try {
    return parse_detector_json_text(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " +
                              std::string(e.what()).substr(error_code_name(e.code()).size() + 2));
  }
}

std::string render_detector_json(const std::vector<std::vector<DetectorRawOutput>>& per_tile) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  int frame_id = 0;
  for (const auto& tile_raws : per_tile) {
    if (tile_raws.empty()) continue;
    nlohmann::ordered_json frame;
    frame["frame_id"] = ++frame_id;
    frame["filename"] = tile_raws.front().source_image;
    const auto& t = tile_raws.front().tile;
    frame["tile"] = {{"x", t.x}, {"y", t.y}, {"width", t.width}, {"height", t.height}};
    frame["objects"] = nlohmann::ordered_json::array();
    for (const auto& r : tile_raws) {
      nlohmann::ordered_json o;
      const auto best = std::max_element(r.class_probs.begin(), r.class_probs.end());
      o["class_id"] = static_cast<int>(best - r.class_probs.begin());
      o["name"] = "glomerulus";
      o["relative_coordinates"] = {
          {"center_x", r.cx}, {"center_y", r.cy}, {"width", r.w}, {"height", r.h}};
      o["confidence"] = r.objectness * *best;
      o["objectness"] = r.objectness;
      o["class_probs"] = r.class_probs;
      frame["objects"].push_back(std::move(o));
    }
    doc.push_back(std::move(frame));
  }
  return doc.dump(1) + "\n";
}

std::vector<std::vector<DetectorRawOutput>> group_by_tile(
    const std::vector<DetectorRawOutput>& raws) {
  std::vector<std::vector<DetectorRawOutput>> groups;
  for (const auto& r : raws) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.front().tile == r.tile; });
    if (it == groups.end()) {
      groups.push_back({r});
    } else {
      it->push_back(r);
    }
  }
  return groups;
}

Detection to_slide_coords(const DetectorRawOutput& raw, std::int64_t slide_width,
                          std::int64_t slide_height) {
  const double ox = static_cast<double>(raw.tile.x), oy = static_cast<double>(raw.tile.y);
  const double tw = static_cast<double>(raw.tile.width);
  const double th = static_cast<double>(raw.tile.height);
  const double sw = static_cast<double>(slide_width), sh = static_cast<double>(slide_height);
  Detection d;
  d.bbox.x_min = std::clamp(ox + (raw.cx - raw.w / 2.0) * tw, 0.0, sw);
  d.bbox.y_min = std::clamp(oy + (raw.cy - raw.h / 2.0) * th, 0.0, sh);
  d.bbox.x_max = std::clamp(ox + (raw.cx + raw.w / 2.0) * tw, 0.0, sw);
  d.bbox.y_max = std::clamp(oy + (raw.cy + raw.h / 2.0) * th, 0.0, sh);
  double best = 0.0;
  int best_class = 0;
  for (std::size_t i = 0; i < raw.class_probs.size(); ++i) {
    if (raw.class_probs[i] > best) {
      best = raw.class_probs[i];
      best_class = static_cast<int>(i);
    }
  }
  d.confidence = combine_confidence(raw.objectness, best);
  d.class_id = best_class;
  return d;
}

void sort_canonical(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.bbox.x_min != b.bbox.x_min) return a.bbox.x_min < b.bbox.x_min;
    return a.bbox.y_min < b.bbox.y_min;
  });
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error(ErrorCode::kDomainError, "NMS IoU threshold must lie in (0, 1)");
  }
  sort_canonical(dets);
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return iou(d.bbox, k.bbox) < iou_threshold;
    });
    if (clear) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> stitch(const std::vector<std::vector<DetectorRawOutput>>& per_tile,
                              std::int64_t slide_width, std::int64_t slide_height,
                              double nms_threshold, unsigned workers) {
  std::vector<std::vector<Detection>> mapped(per_tile.size());
  parallel_for(per_tile.size(), workers, [&](std::size_t i) {
    mapped[i].reserve(per_tile[i].size());
    for (const auto& r : per_tile[i]) {
      Detection d = to_slide_coords(r, slide_width, slide_height);
      if (d.bbox.is_valid()) mapped[i].push_back(d);
    }
  });
  std::vector<Detection> all;
  for (auto& m : mapped) all.insert(all.end(), m.begin(), m.end());
  return nms(std::move(all), nms_threshold);
}

std::vector<std::vector<DetectorRawOutput>> fan_out_to_tiles(const std::vector<Detection>& dets,
                                                             const prep::TileSpec& spec,
                                                             const std::string& slide_id) {
  std::vector<std::vector<DetectorRawOutput>> out(spec.tiles.size());
  for (std::size_t t = 0; t < spec.tiles.size(); ++t) {
    const auto& tile = spec.tiles[t];
    const BBox tb = tile.as_box();
    const double tw = static_cast<double>(tile.width), th = static_cast<double>(tile.height);
    for (const auto& d : dets) {
      const BBox& b = d.bbox;
      if (b.x_min < tb.x_min || b.y_min < tb.y_min || b.x_max > tb.x_max || b.y_max > tb.y_max) {
        continue;
      }
      DetectorRawOutput r;
      r.tile = tile;
      r.source_image = prep::patch_stem(slide_id, tile) + ".png";
      r.cx = ((b.x_min + b.x_max) / 2.0 - tb.x_min) / tw;
      r.cy = ((b.y_min + b.y_max) / 2.0 - tb.y_min) / th;
      r.w = b.width() / tw;
      r.h = b.height() / th;
      r.objectness = d.confidence;
      r.class_probs.assign(static_cast<std::size_t>(d.class_id) + 1, 0.0);
      r.class_probs.back() = 1.0;
      out[t].push_back(std::move(r));
    }
  }
  return out;
}

std::string to_detections_json(const DetectionSet& set) {
  nlohmann::ordered_json doc;
  doc["slide_id"] = set.slide_id;
  doc["slide_width"] = set.slide_width;
  doc["slide_height"] = set.slide_height;
  doc["detections"] = nlohmann::ordered_json::array();
  for (const auto& d : set.detections) {
    doc["detections"].push_back({{"x_min", d.bbox.x_min},
                                 {"y_min", d.bbox.y_min},
                                 {"x_max", d.bbox.x_max},
                                 {"y_max", d.bbox.y_max},
                                 {"confidence", d.confidence},
                                 {"class_id", d.class_id}});
  }
  return doc.dump(1) + "\n";
}

DetectionSet from_detections_json(std::string_view text) {
  DetectionSet set;
  try {
    const auto doc = nlohmann::json::parse(text);
    set.slide_id = doc.at("slide_id").get<std::string>();
    set.slide_width = doc.at("slide_width").get<std::int64_t>();
    set.slide_height = doc.at("slide_height").get<std::int64_t>();
    for (const auto& d : doc.at("detections")) {
      Detection det;
      det.bbox = {d.at("x_min").get<double>(), d.at("y_min").get<double>(),
                  d.at("x_max").get<double>(), d.at("y_max").get<double>()};
      det.confidence = d.at("confidence").get<double>();
      det.class_id = d.value("class_id", 0);
      if (!det.bbox.is_valid() || !in_unit(det.confidence)) {
        malformed("detection with invalid box or confidence");
      }
      set.detections.push_back(det);
    }
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("detection list: ") + e.what());
  }
  return set;
}

DetectionSet load_detections(const std::filesystem::path& path) {
  try {
    return from_detections_json(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedDetectionFile) throw;
    throw Error(e.code(), path.string() + ": " +
                              std::string(e.what()).substr(error_code_name(e.code()).size() + 2));
  }
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string expand_detector_command(std::string_view command_template,
                                    const std::filesystem::path& tile_dir,
                                    const std::filesystem::path& out_json) {
  std::string cmd(command_template);
  replace_all(cmd, "{tile_dir}", shell_quote(tile_dir.string()));
  replace_all(cmd, "{out_json}", shell_quote(out_json.string()));
  return cmd;
}

void run_detector_command(std::string_view command_template,
                          const std::filesystem::path& tile_dir,
                          const std::filesystem::path& out_json) {
  if (command_template.empty()) {
    throw Error(ErrorCode::kDetectorFailed, "no detector command configured");
  }
  std::error_code ec;
  std::filesystem::remove(out_json, ec);
  const std::string cmd = expand_detector_command(command_template, tile_dir, out_json);
  const int status = std::system(cmd.c_str());
  if (status == -1) throw Error(ErrorCode::kDetectorFailed, "could not launch: " + cmd);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::kDetectorFailed,
                "'" + cmd + "' exited with status " +
                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  if (!std::filesystem::is_regular_file(out_json, ec)) {
    throw Error(ErrorCode::kDetectorFailed, "detector did not write " + out_json.string());
  }
}

}  // namespace glomdet::det
