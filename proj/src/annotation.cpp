#include "glomdet/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::ann {

using ordered_json = nlohmann::ordered_json;

std::string_view source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::kRle: return "rle";
    case SourceKind::kPolygon: return "polygon";
    case SourceKind::kBbox: return "bbox";
  }
  return "bbox";
}

namespace {

SourceKind parse_source_kind(const std::string& name) {
  if (name == "rle") return SourceKind::kRle;
  if (name == "polygon") return SourceKind::kPolygon;
  if (name == "bbox") return SourceKind::kBbox;
  throw Error(ErrorCode::kSchemaViolation, "unknown source_kind '" + name + "'");
}

void check_slide_dims(std::int64_t w, std::int64_t h) {
  if (w < 1 || h < 1) {
    throw Error(ErrorCode::kInvalidArgument, "slide dimensions must be >= 1");
  }
}

bool is_whole(double v) { return std::isfinite(v) && std::floor(v) == v; }

// Outward rounding to whole pixels, then clipping to the slide.
std::optional<BBox> snap_to_slide(const BBox& b, std::int64_t w, std::int64_t h) {
  BBox out{std::max(0.0, std::floor(b.x_min)), std::max(0.0, std::floor(b.y_min)),
           std::min(static_cast<double>(w), std::ceil(b.x_max)),
           std::min(static_cast<double>(h), std::ceil(b.y_max))};
  if (out.x_min >= out.x_max || out.y_min >= out.y_max) return std::nullopt;
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t c = line.find(',', pos);
    out.push_back(trim(line.substr(pos, c == std::string_view::npos ? std::string_view::npos
                                                                     : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

void collect_points(const nlohmann::json& node, std::vector<Point>& out) {
  if (!node.is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "geometry.coordinates must be nested arrays");
  }
  if (node.size() >= 2 && node[0].is_number() && node[1].is_number()) {
    out.push_back({node[0].get<double>(), node[1].get<double>()});
    return;
  }
  for (const auto& child : node) collect_points(child, out);
}

}  // namespace

BBox bbox_of_points(std::span<const Point> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "bbox of an empty point list");
  BBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite vertex");
    }
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  if (b.x_min == b.x_max || b.y_min == b.y_max) {
    throw Error(ErrorCode::kDegenerateBox, "points span zero width or height");
  }
  return b;
}

SlideAnnotation annotation_from_rle(const RleMask& mask, const std::string& slide_id,
                                    std::int64_t slide_width, std::int64_t slide_height,
                                    const RleConversionOptions& options) {
  check_slide_dims(slide_width, slide_height);
  if (mask.width != slide_width || mask.height != slide_height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                    " but slide is " + std::to_string(slide_width) + "x" +
                    std::to_string(slide_height));
  }
  SlideAnnotation a{slide_id, slide_width, slide_height, {}, SourceKind::kRle};
  for (const auto& c : mask_components(mask, options.connectivity)) {
    if (c.pixel_count < options.min_component_area) continue;
    a.boxes.push_back({BBox{static_cast<double>(c.col_min), static_cast<double>(c.row_min),
                            static_cast<double>(c.col_max + 1),
                            static_cast<double>(c.row_max + 1)},
                       kGlomerulusClass});
  }
  return a;
}

SlideAnnotation annotation_from_polygons(std::span<const Polygon> polygons,
                                         const std::string& slide_id,
                                         std::int64_t slide_width, std::int64_t slide_height) {
  check_slide_dims(slide_width, slide_height);
  SlideAnnotation a{slide_id, slide_width, slide_height, {}, SourceKind::kPolygon};
  for (const auto& poly : polygons) {
    if (poly.vertices.size() < 3) {
      throw Error(ErrorCode::kSchemaViolation, "polygon with fewer than 3 vertices");
    }
    if (auto b = snap_to_slide(bbox_of_points(poly.vertices), slide_width, slide_height)) {
      a.boxes.push_back({*b, kGlomerulusClass});
    }
  }
  return a;
}

SlideAnnotation annotation_from_boxes(std::span<const GroundTruthBox> boxes,
                                      const std::string& slide_id, std::int64_t slide_width,
                                      std::int64_t slide_height) {
  check_slide_dims(slide_width, slide_height);
  SlideAnnotation a{slide_id, slide_width, slide_height, {}, SourceKind::kBbox};
  for (const auto& g : boxes) {
    if (g.bbox.x_min >= g.bbox.x_max || g.bbox.y_min >= g.bbox.y_max) {
      throw Error(ErrorCode::kDegenerateBox, "box with zero or negative extent");
    }
    if (auto b = snap_to_slide(g.bbox, slide_width, slide_height)) {
      a.boxes.push_back({*b, kGlomerulusClass});
    }
  }
  return a;
}

std::vector<RleRecord> parse_rle_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::kSchemaViolation, "empty RLE CSV");
  const auto header = split_commas(lines[0]);
  if (header.size() != 2 || header[0] != "id" || header[1] != "encoding") {
    throw Error(ErrorCode::kSchemaViolation, "RLE CSV header must be 'id,encoding'");
  }
  std::vector<RleRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto comma = lines[i].find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::kSchemaViolation,
                  "RLE CSV line " + std::to_string(i + 1) + ": missing encoding column");
    }
    out.push_back({std::string(trim(lines[i].substr(0, comma))),
                   std::string(trim(lines[i].substr(comma + 1)))});
  }
  return out;
}

std::vector<Polygon> parse_polygon_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("polygon JSON: ") + e.what());
  }
  const nlohmann::json* features = &doc;
  if (doc.is_object() && doc.contains("features")) features = &doc["features"];
  if (!features->is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "polygon JSON must be a list of features");
  }
  std::vector<Polygon> out;
  for (std::size_t i = 0; i < features->size(); ++i) {
    const auto& f = (*features)[i];
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object() ||
        !f["geometry"].contains("coordinates")) {
      throw Error(ErrorCode::kSchemaViolation,
                  "feature " + std::to_string(i) + " lacks geometry.coordinates");
    }
    Polygon p;
    collect_points(f["geometry"]["coordinates"], p.vertices);
    if (p.vertices.size() < 3) {
      throw Error(ErrorCode::kSchemaViolation,
                  "feature " + std::to_string(i) + " has fewer than 3 vertices");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<GroundTruthBox> parse_bbox_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::kSchemaViolation, "empty box CSV");
  const auto header = split_commas(lines[0]);
  if (header.size() < 4 || header[0] != "x_min" || header[1] != "y_min" ||
      header[2] != "x_max" || header[3] != "y_max") {
    throw Error(ErrorCode::kSchemaViolation,
                "box CSV header must start with 'x_min,y_min,x_max,y_max'");
  }
  std::vector<GroundTruthBox> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cols = split_commas(lines[i]);
    double v[4];
    bool ok = cols.size() >= 4;
    for (int k = 0; ok && k < 4; ++k) ok = parse_double(cols[static_cast<std::size_t>(k)], v[k]);
    if (!ok) {
      throw Error(ErrorCode::kSchemaViolation,
                  "box CSV line " + std::to_string(i + 1) + ": expected four numbers");
    }
    GroundTruthBox g{BBox{v[0], v[1], v[2], v[3]}, kGlomerulusClass};
    if (cols.size() >= 5 && !cols[4].empty()) {
      std::int64_t cls = 0;
      if (!parse_int64(cols[4], cls)) {
        throw Error(ErrorCode::kSchemaViolation,
                    "box CSV line " + std::to_string(i + 1) + ": bad class_id");
      }
      // Source datasets may carry several lesion labels; all are glomeruli.
      g.class_id = kGlomerulusClass;
    }
    out.push_back(g);
  }
  return out;
}

void validate(const SlideAnnotation& a) {
  if (a.slide_id.empty()) throw Error(ErrorCode::kSchemaViolation, "slide_id is empty");
  if (a.slide_width < 1 || a.slide_height < 1) {
    throw Error(ErrorCode::kSchemaViolation, "slide dimensions must be >= 1");
  }
  for (std::size_t i = 0; i < a.boxes.size(); ++i) {
    const auto& g = a.boxes[i];
    const auto& b = g.bbox;
    const std::string where = "box " + std::to_string(i);
    if (!b.is_valid()) throw Error(ErrorCode::kSchemaViolation, where + " is degenerate");
    if (!b.within(static_cast<double>(a.slide_width), static_cast<double>(a.slide_height))) {
      throw Error(ErrorCode::kSchemaViolation, where + " exceeds slide bounds");
    }
    if (!is_whole(b.x_min) || !is_whole(b.y_min) || !is_whole(b.x_max) || !is_whole(b.y_max)) {
      throw Error(ErrorCode::kSchemaViolation, where + " has fractional coordinates");
    }
    if (g.class_id < 0 || g.class_id >= kNumClasses) {
      throw Error(ErrorCode::kSchemaViolation, where + " has undeclared class_id");
    }
  }
}

std::string to_canonical_json(const SlideAnnotation& a) {
  validate(a);
  ordered_json doc;
  doc["version"] = kCanonicalVersion;
  doc["slide_id"] = a.slide_id;
  doc["slide_width"] = a.slide_width;
  doc["slide_height"] = a.slide_height;
  doc["source_kind"] = source_kind_name(a.source_kind);
  doc["boxes"] = ordered_json::array();
  for (const auto& g : a.boxes) {
    ordered_json box;
    box["x_min"] = static_cast<std::int64_t>(g.bbox.x_min);
    box["y_min"] = static_cast<std::int64_t>(g.bbox.y_min);
    box["x_max"] = static_cast<std::int64_t>(g.bbox.x_max);
    box["y_max"] = static_cast<std::int64_t>(g.bbox.y_max);
    box["class_id"] = g.class_id;
    doc["boxes"].push_back(std::move(box));
  }
  return doc.dump(2) + "\n";
}

SlideAnnotation from_canonical_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("annotation JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kSchemaViolation, "annotation must be an object");
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) {
      throw Error(ErrorCode::kSchemaViolation, std::string("missing field '") + key + "'");
    }
    return doc[key];
  };
  auto need_int = [&](const nlohmann::json& v, const std::string& what) {
    if (!v.is_number_integer()) {
      throw Error(ErrorCode::kSchemaViolation, what + " must be an integer");
    }
    return v.get<std::int64_t>();
  };
  const auto& version = need("version");
  if (need_int(version, "version") != kCanonicalVersion) {
    throw Error(ErrorCode::kUnknownVersion,
                "annotation schema version " + version.dump() + " (expected " +
                    std::to_string(kCanonicalVersion) + ")");
  }
  SlideAnnotation a;
  const auto& id = need("slide_id");
  if (!id.is_string()) throw Error(ErrorCode::kSchemaViolation, "slide_id must be a string");
  a.slide_id = id.get<std::string>();
  a.slide_width = need_int(need("slide_width"), "slide_width");
  a.slide_height = need_int(need("slide_height"), "slide_height");
  const auto& kind = need("source_kind");
  if (!kind.is_string()) throw Error(ErrorCode::kSchemaViolation, "source_kind must be a string");
  a.source_kind = parse_source_kind(kind.get<std::string>());
  const auto& boxes = need("boxes");
  if (!boxes.is_array()) throw Error(ErrorCode::kSchemaViolation, "boxes must be an array");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const std::string where = "boxes[" + std::to_string(i) + "]";
    if (!b.is_object()) throw Error(ErrorCode::kSchemaViolation, where + " must be an object");
    auto field = [&](const char* key) {
      if (!b.contains(key)) {
        throw Error(ErrorCode::kSchemaViolation, where + " missing '" + key + "'");
      }
      return need_int(b[key], where + "." + key);
    };
    GroundTruthBox g;
    g.bbox = BBox{static_cast<double>(field("x_min")), static_cast<double>(field("y_min")),
                  static_cast<double>(field("x_max")), static_cast<double>(field("y_max"))};
    g.class_id = static_cast<int>(field("class_id"));
    a.boxes.push_back(g);
  }
  validate(a);
  return a;
}

void save_canonical(const SlideAnnotation& annotation, const std::filesystem::path& path) {
  write_text_file(path, to_canonical_json(annotation));
}

SlideAnnotation load_canonical(const std::filesystem::path& path) {
  try {
    return from_canonical_json(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaViolation || e.code() == ErrorCode::kUnknownVersion) {
      throw Error(e.code(), path.string() + ": " +
                                std::string(e.what()).substr(
                                    error_code_name(e.code()).size() + 2));
    }
    throw;
  }
}

}  // namespace glomdet::ann
