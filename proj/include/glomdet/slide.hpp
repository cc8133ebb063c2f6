#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "glomdet/image_io.hpp"

namespace glomdet::wsi {

// RGB pixels of one rectangular region, level-0 coordinates.
struct Tile {
  std::int64_t origin_x = 0;
  std::int64_t origin_y = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  Raster to_raster() const;
};

class SlideReader {
 public:
  virtual ~SlideReader() = default;
  virtual std::int64_t width() const = 0;
  virtual std::int64_t height() const = 0;
  virtual const char* format_name() const = 0;
  // Fills `out` (w*h*3 bytes) with the region. Bounds already checked.
  // Must be safe to call concurrently.
  virtual void read(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h,
                    std::uint8_t* out) const = 0;
};

// Immutable, cheaply copyable handle to an opened slide. Region reads may be
// issued from several threads at once.
class Slide {
 public:
  Slide(std::string slide_id, std::filesystem::path source,
        std::shared_ptr<const SlideReader> reader);

  const std::string& slide_id() const { return slide_id_; }
  const std::filesystem::path& source_path() const { return source_path_; }
  std::int64_t width_px() const { return width_; }
  std::int64_t height_px() const { return height_; }
  const char* format_name() const { return reader_->format_name(); }

  // Throws OutOfBounds unless 0 <= x, x+w <= width_px (same for y) and w,h >= 1.
  Tile read_region(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h) const;

 private:
  std::string slide_id_;
  std::filesystem::path source_path_;
  std::int64_t width_;
  std::int64_t height_;
  std::shared_ptr<const SlideReader> reader_;
};

// Supported: TIFF (tiled or stripped, 8-bit gray/RGB/RGBA, JPEG-YCbCr tiles as
// found in SVS level 0) and PNG. The slide id is the file stem.
Slide open_slide(const std::filesystem::path& path);

}  // namespace glomdet::wsi
