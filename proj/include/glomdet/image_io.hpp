#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace glomdet::wsi {

// Interleaved 8-bit raster, row-major. channels is 1 (gray) or 3 (RGB).
struct Raster {
  std::int64_t width = 0;
  std::int64_t height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(std::int64_t w, std::int64_t h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w * h * c), fill) {}

  std::uint8_t* at(std::int64_t x, std::int64_t y) {
    return pixels.data() + (y * width + x) * channels;
  }
  const std::uint8_t* at(std::int64_t x, std::int64_t y) const {
    return pixels.data() + (y * width + x) * channels;
  }
};

Raster read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& image);

enum class TiffLayout { kTiled, kStripped };

// Writes an RGB raster as a deflate-compressed TIFF. Tile edge must be a
// multiple of 16 for tiled output.
void write_tiff(const std::filesystem::path& path, const Raster& image,
                TiffLayout layout = TiffLayout::kTiled, int tile_edge = 256);

}  // namespace glomdet::wsi
