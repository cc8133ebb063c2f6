#include "glomdet/tiling.hpp"

#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::prep {

namespace {

std::vector<std::int64_t> axis_origins(std::int64_t extent, std::int64_t tile,
                                       std::int64_t stride) {
  std::vector<std::int64_t> origins{0};
  while (origins.back() + tile < extent) {
    origins.push_back(std::min(origins.back() + stride, extent - tile));
  }
  return origins;
}

}  // namespace

TileSpec plan_tiles(std::int64_t slide_width, std::int64_t slide_height, std::int64_t tile_size,
                    std::int64_t overlap) {
  if (tile_size < 64) throw Error(ErrorCode::kBadGeometry, "tile_size must be >= 64");
  if (overlap < 0 || overlap >= tile_size) {
    throw Error(ErrorCode::kBadGeometry, "overlap must satisfy 0 <= overlap < tile_size");
  }
  if (slide_width < 1 || slide_height < 1) {
    throw Error(ErrorCode::kBadGeometry, "slide must be at least 1x1");
  }
  TileSpec spec;
  spec.tile_size = tile_size;
  spec.overlap = overlap;
  const std::int64_t stride = tile_size - overlap;
  const auto xs = axis_origins(slide_width, tile_size, stride);
  const auto ys = axis_origins(slide_height, tile_size, stride);
  spec.columns = static_cast<std::int64_t>(xs.size());
  spec.rows = static_cast<std::int64_t>(ys.size());
  for (auto y : ys) {
    for (auto x : xs) {
      spec.tiles.push_back(
          {x, y, std::min(tile_size, slide_width - x), std::min(tile_size, slide_height - y)});
    }
  }
  return spec;
}

std::optional<BBox> clip_box_to_tile(const BBox& box, const TileRect& tile,
                                     double min_fraction) {
  if (!(min_fraction > 0.0 && min_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_fraction must be in (0, 1]");
  }
  const auto inter = intersection(box, tile.as_box());
  if (!inter) return std::nullopt;
  if (inter->area() < min_fraction * box.area()) return std::nullopt;
  const double ox = static_cast<double>(tile.x), oy = static_cast<double>(tile.y);
  return BBox{inter->x_min - ox, inter->y_min - oy, inter->x_max - ox, inter->y_max - oy};
}

std::string to_darknet_label(const BBox& b, std::int64_t tile_width, std::int64_t tile_height,
                             int class_id) {
  const double tw = static_cast<double>(tile_width), th = static_cast<double>(tile_height);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", class_id,
                (b.x_min + b.x_max) / 2.0 / tw, (b.y_min + b.y_max) / 2.0 / th,
                b.width() / tw, b.height() / th);
  return buf;
}

DarknetLabel parse_darknet_label(std::string_view line) {
  std::istringstream in{std::string(line)};
  DarknetLabel l;
  std::string extra;
  if (!(in >> l.class_id >> l.cx >> l.cy >> l.w >> l.h) || (in >> extra)) {
    throw Error(ErrorCode::kSchemaViolation,
                "darknet label must be '<class> <cx> <cy> <w> <h>': " + std::string(line));
  }
  for (double v : {l.cx, l.cy, l.w, l.h}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kSchemaViolation, "darknet label value outside [0,1]");
    }
  }
  return l;
}

BBox label_to_box(const DarknetLabel& l, std::int64_t tile_width, std::int64_t tile_height) {
  const double tw = static_cast<double>(tile_width), th = static_cast<double>(tile_height);
  return {(l.cx - l.w / 2.0) * tw, (l.cy - l.h / 2.0) * th, (l.cx + l.w / 2.0) * tw,
          (l.cy + l.h / 2.0) * th};
}

std::string patch_stem(const std::string& slide_id, const TileRect& t) {
  return slide_id + "_x" + std::to_string(t.x) + "_y" + std::to_string(t.y) + "_w" +
         std::to_string(t.width) + "_h" + std::to_string(t.height);
}

std::optional<TileRect> parse_patch_name(std::string_view filename) {
  static const std::regex kPattern(R"(_x(\d+)_y(\d+)_w(\d+)_h(\d+)(\.[A-Za-z]+)?$)");
  const std::string name = std::filesystem::path(std::string(filename)).filename().string();
  std::smatch m;
  if (!std::regex_search(name, m, kPattern)) return std::nullopt;
  TileRect t{std::stoll(m[1]), std::stoll(m[2]), std::stoll(m[3]), std::stoll(m[4])};
  if (t.width < 1 || t.height < 1) return std::nullopt;
  return t;
}

PatchManifest export_patches(const wsi::Slide& slide, const ann::SlideAnnotation& annotation,
                             const TileSpec& spec, double min_fraction,
                             const std::filesystem::path& out_dir, unsigned workers) {
  if (annotation.slide_width != slide.width_px() ||
      annotation.slide_height != slide.height_px()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "annotation dimensions do not match slide " + slide.slide_id());
  }
  if (!(min_fraction > 0.0 && min_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_fraction must be in (0, 1]");
  }
  ensure_directory(out_dir);

  PatchManifest manifest;
  manifest.entries.resize(spec.tiles.size());
  parallel_for(spec.tiles.size(), workers, [&](std::size_t i) {
    const TileRect& t = spec.tiles[i];
    const std::string stem = patch_stem(slide.slide_id(), t);
    std::string labels;
    std::int64_t n = 0;
    for (const auto& g : annotation.boxes) {
      if (auto local = clip_box_to_tile(g.bbox, t, min_fraction)) {
        labels += to_darknet_label(*local, t.width, t.height, g.class_id);
        ++n;
      }
    }
    const wsi::Tile pixels = slide.read_region(t.x, t.y, t.width, t.height);
    wsi::write_png(out_dir / (stem + ".png"), pixels.to_raster());
    write_text_file(out_dir / (stem + ".txt"), labels);
    manifest.entries[i] = {stem + ".png", stem + ".txt", t, n};
  });
  for (const auto& e : manifest.entries) {
    ++manifest.patch_count;
    manifest.label_count += e.num_boxes;
  }
  write_text_file(out_dir / "patches.csv", render_patch_manifest_csv(manifest));
  return manifest;
}

std::string render_patch_manifest_csv(const PatchManifest& manifest) {
  std::string out = "image,label,origin_x,origin_y,width,height,num_boxes\n";
  for (const auto& e : manifest.entries) {
    out += e.image_file + "," + e.label_file + "," + std::to_string(e.tile.x) + "," +
           std::to_string(e.tile.y) + "," + std::to_string(e.tile.width) + "," +
           std::to_string(e.tile.height) + "," + std::to_string(e.num_boxes) + "\n";
  }
  return out;
}

}  // namespace glomdet::prep
