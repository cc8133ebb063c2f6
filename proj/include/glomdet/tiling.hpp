#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glomdet/annotation.hpp"
#include "glomdet/geometry.hpp"
#include "glomdet/slide.hpp"

namespace glomdet::prep {

struct TileRect {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  BBox as_box() const {
    return {static_cast<double>(x), static_cast<double>(y), static_cast<double>(x + width),
            static_cast<double>(y + height)};
  }
  bool operator==(const TileRect&) const = default;
};

// Overlapping tile grid. Tiles are listed row-major; the last row/column is
// shifted back so every tile stays inside the slide.
struct TileSpec {
  std::int64_t tile_size = 1024;
  std::int64_t overlap = 256;
  std::int64_t columns = 0;
  std::int64_t rows = 0;
  std::vector<TileRect> tiles;
};

// Throws BadGeometry unless tile_size >= 64, 0 <= overlap < tile_size and
// the slide is at least 1x1.
TileSpec plan_tiles(std::int64_t slide_width, std::int64_t slide_height,
                    std::int64_t tile_size = 1024, std::int64_t overlap = 256);

// Part of `box` inside `tile`, in tile-local coordinates, when that part
// holds at least `min_fraction` of the box area. Throws InvalidArgument
// unless 0 < min_fraction <= 1.
std::optional<BBox> clip_box_to_tile(const BBox& box, const TileRect& tile,
                                     double min_fraction);

struct DarknetLabel {
  int class_id = 0;
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;  // normalized to the tile
};

// "<class> <cx> <cy> <w> <h>\n", six decimals.
std::string to_darknet_label(const BBox& tile_local, std::int64_t tile_width,
                             std::int64_t tile_height, int class_id);
// Throws SchemaViolation.
DarknetLabel parse_darknet_label(std::string_view line);
BBox label_to_box(const DarknetLabel& label, std::int64_t tile_width, std::int64_t tile_height);

// "<slide_id>_x<X>_y<Y>_w<W>_h<H>.png"; the stem encodes the tile placement
// so detector output can be mapped back without the manifest.
std::string patch_stem(const std::string& slide_id, const TileRect& tile);
std::optional<TileRect> parse_patch_name(std::string_view filename);

struct PatchEntry {
  std::string image_file;
  std::string label_file;
  TileRect tile;
  std::int64_t num_boxes = 0;
};

struct PatchManifest {
  std::vector<PatchEntry> entries;  // row-major tile order
  std::int64_t patch_count = 0;
  std::int64_t label_count = 0;
};

// Writes one PNG and one label file per tile plus `patches.csv` into
// out_dir. Output is independent of `workers`. Throws IoError.
PatchManifest export_patches(const wsi::Slide& slide, const ann::SlideAnnotation& annotation,
                             const TileSpec& spec, double min_fraction,
                             const std::filesystem::path& out_dir, unsigned workers = 1);

std::string render_patch_manifest_csv(const PatchManifest& manifest);

}  // namespace glomdet::prep
