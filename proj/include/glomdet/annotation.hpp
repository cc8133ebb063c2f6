#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glomdet/geometry.hpp"
#include "glomdet/rle.hpp"

namespace glomdet::ann {

// Single-class detector: every source label collapses into class 0.
inline constexpr int kGlomerulusClass = 0;
inline constexpr int kNumClasses = 1;
inline constexpr int kCanonicalVersion = 1;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Polygon {
  std::vector<Point> vertices;
};

struct GroundTruthBox {
  BBox bbox;
  int class_id = kGlomerulusClass;
  bool operator==(const GroundTruthBox&) const = default;
};

enum class SourceKind { kRle, kPolygon, kBbox };

std::string_view source_kind_name(SourceKind kind);

struct SlideAnnotation {
  std::string slide_id;
  std::int64_t slide_width = 0;
  std::int64_t slide_height = 0;
  std::vector<GroundTruthBox> boxes;
  SourceKind source_kind = SourceKind::kBbox;

  bool operator==(const SlideAnnotation&) const = default;
};

// Extremes of the points: (min x, min y, max x, max y). Throws
// InvalidArgument for an empty list and DegenerateBox when either span is 0.
BBox bbox_of_points(std::span<const Point> points);

struct RleConversionOptions {
  // Components with fewer level-0 pixels are treated as annotation noise.
  std::int64_t min_component_area = 256;
  Connectivity connectivity = Connectivity::kEight;
};

// One box per kept connected component. Pixel (c, r) spans [c, c+1), so a
// component covering columns c0..c1 yields x_min = c0, x_max = c1 + 1.
// Throws DimensionMismatch if the mask is not slide-sized.
SlideAnnotation annotation_from_rle(const RleMask& mask, const std::string& slide_id,
                                    std::int64_t slide_width, std::int64_t slide_height,
                                    const RleConversionOptions& options = {});

// One box per polygon from its vertex extremes, widened to whole pixels and
// clipped to the slide. Polygons entirely outside the slide are skipped.
SlideAnnotation annotation_from_polygons(std::span<const Polygon> polygons,
                                         const std::string& slide_id,
                                         std::int64_t slide_width, std::int64_t slide_height);

SlideAnnotation annotation_from_boxes(std::span<const GroundTruthBox> boxes,
                                      const std::string& slide_id, std::int64_t slide_width,
                                      std::int64_t slide_height);

// --- source formats -------------------------------------------------------

struct RleRecord {
  std::string id;
  std::string encoding;
};

// `id,encoding` CSV with header. Throws SchemaViolation.
std::vector<RleRecord> parse_rle_csv(std::string_view text);

// HuBMAP-style JSON: a list of features (or a FeatureCollection) whose
// geometry.coordinates hold vertex arrays. All vertices found under
// coordinates belong to that feature's polygon.
std::vector<Polygon> parse_polygon_json(std::string_view text);

// `x_min,y_min,x_max,y_max[,class_id]` CSV with header.
std::vector<GroundTruthBox> parse_bbox_csv(std::string_view text);

// --- canonical schema -----------------------------------------------------

// Throws SchemaViolation unless every invariant of SlideAnnotation holds and
// every coordinate is a whole pixel.
void validate(const SlideAnnotation& annotation);

std::string to_canonical_json(const SlideAnnotation& annotation);
SlideAnnotation from_canonical_json(std::string_view text);

void save_canonical(const SlideAnnotation& annotation, const std::filesystem::path& path);
SlideAnnotation load_canonical(const std::filesystem::path& path);

}  // namespace glomdet::ann
