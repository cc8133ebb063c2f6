#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glomdet::ann {

// Dense binary mask, row-major, one byte per pixel (0 or 1).
struct Bitmap {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> bits;

  Bitmap() = default;
  Bitmap(std::int64_t w, std::int64_t h)
      : width(w), height(h), bits(static_cast<std::size_t>(w * h), 0) {}

  bool get(std::int64_t x, std::int64_t y) const {
    return bits[static_cast<std::size_t>(y * width + x)] != 0;
  }
  void set(std::int64_t x, std::int64_t y, bool v = true) {
    bits[static_cast<std::size_t>(y * width + x)] = v ? 1 : 0;
  }
  bool operator==(const Bitmap&) const = default;
};

// Pixel ordinals are 1-indexed and column-major: ordinal k names column
// (k-1) / height, row (k-1) % height.
struct RleRun {
  std::int64_t start = 1;
  std::int64_t length = 1;
  bool operator==(const RleRun&) const = default;
};

// Runs are sorted, disjoint and maximal (no two runs touch).
struct RleMask {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<RleRun> runs;

  std::int64_t set_count() const;
  bool operator==(const RleMask&) const = default;
};

// Parses whitespace-separated "start length" pairs. Runs must appear in
// ascending start order without overlap; touching runs are merged.
// Throws MalformedRle.
RleMask decode_rle(std::string_view runs_text, std::int64_t width, std::int64_t height);

std::string encode_rle(const RleMask& mask);
std::string encode_rle(const Bitmap& bitmap);

RleMask rle_from_bitmap(const Bitmap& bitmap);
Bitmap to_bitmap(const RleMask& mask);

enum class Connectivity { kFour = 4, kEight = 8 };

// Vertical run of set pixels inside one column: rows [row_begin, row_end).
struct ColumnSegment {
  std::int64_t col = 0;
  std::int64_t row_begin = 0;
  std::int64_t row_end = 0;
};

struct Component {
  std::vector<ColumnSegment> segments;  // column-major order
  std::int64_t pixel_count = 0;
  std::int64_t col_min = 0, col_max = 0;  // inclusive
  std::int64_t row_min = 0, row_max = 0;  // inclusive

  // (x, y) of every pixel, column-major.
  std::vector<std::pair<std::int64_t, std::int64_t>> pixels() const;
};

// Connected components labelled directly on the run representation, so
// masks the size of a whole slide never need a dense bitmap. Components are
// ordered by their first pixel in column-major order.
std::vector<Component> mask_components(const RleMask& mask,
                                       Connectivity connectivity = Connectivity::kEight);

}  // namespace glomdet::ann
