#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glomdet/slide.hpp"

namespace glomdet::wsi {

struct TissueMaskOptions {
  int downsample = 16;
  // Saturation (0..255) at or below which a block is never tissue, even if
  // Otsu picks a lower cut. Keeps blank or near-blank slides empty.
  int min_saturation = 13;
  int min_component_pixels = 64;
};

struct TissueMask {
  int downsample = 1;
  std::int64_t width = 0;   // ceil(slide width / downsample)
  std::int64_t height = 0;  // ceil(slide height / downsample)
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1
  // Level-0 area of the set mask pixels. Edge blocks contribute only the
  // part that lies inside the slide.
  double tissue_area_px2 = 0.0;
  int saturation_threshold = 255;  // tissue iff saturation > threshold

  bool at(std::int64_t x, std::int64_t y) const {
    return bits[static_cast<std::size_t>(y * width + x)] != 0;
  }
  std::int64_t set_count() const;
};

// Otsu cut over a 256-bin histogram: a value v is foreground iff v > cut.
// Ties in between-class variance resolve to the middle of the tied range.
// Returns 255 when the histogram holds a single occupied bin.
int otsu_threshold(std::span<const std::uint64_t, 256> histogram);

// Block-averaged RGB -> HSV saturation, Otsu cut, 3x3 closing, then removal
// of 8-connected components smaller than min_component_pixels.
TissueMask compute_tissue_mask(const Slide& slide, const TissueMaskOptions& options = {});

// 0/255 grayscale PNG for inspection.
void save_mask_png(const TissueMask& mask, const std::filesystem::path& path);

}  // namespace glomdet::wsi
