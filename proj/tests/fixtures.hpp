#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "glomdet/geometry.hpp"
#include "glomdet/image_io.hpp"
#include "glomdet/slide.hpp"

namespace test {

using Rgb = std::array<std::uint8_t, 3>;
inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kPink{230, 150, 190};

// Procedural slide: flat background with filled integer rectangles, later
// ones painted over earlier ones.
class RectSlideReader : public glomdet::wsi::SlideReader {
 public:
  RectSlideReader(std::int64_t w, std::int64_t h, Rgb background = kWhite)
      : w_(w), h_(h), background_(background) {}
  void add(const glomdet::BBox& box, Rgb color) { rects_.push_back({box, color}); }

  std::int64_t width() const override { return w_; }
  std::int64_t height() const override { return h_; }
  const char* format_name() const override { return "memory"; }
  void read(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h,
            std::uint8_t* out) const override {
    for (std::int64_t r = 0; r < h; ++r) {
      for (std::int64_t c = 0; c < w; ++c) {
        Rgb px = background_;
        const double cx = static_cast<double>(x + c), cy = static_cast<double>(y + r);
        for (const auto& [box, color] : rects_) {
          if (cx >= box.x_min && cx < box.x_max && cy >= box.y_min && cy < box.y_max) px = color;
        }
        std::uint8_t* p = out + (r * w + c) * 3;
        p[0] = px[0];
        p[1] = px[1];
        p[2] = px[2];
      }
    }
  }

 private:
  std::int64_t w_, h_;
  Rgb background_;
  std::vector<std::pair<glomdet::BBox, Rgb>> rects_;
};

inline glomdet::wsi::Slide rect_slide(std::int64_t w, std::int64_t h,
                                      const std::vector<glomdet::BBox>& pink,
                                      const std::string& id = "rects") {
  auto reader = std::make_shared<RectSlideReader>(w, h);
  for (const auto& b : pink) reader->add(b, kPink);
  return glomdet::wsi::Slide(id, id, reader);
}

// Deterministic non-flat RGB pattern.
inline glomdet::wsi::Raster pattern_raster(std::int64_t w, std::int64_t h) {
  glomdet::wsi::Raster r(w, h, 3);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      auto* p = r.at(x, y);
      p[0] = static_cast<std::uint8_t>(x * 7 + y);
      p[1] = static_cast<std::uint8_t>(y * 3);
      p[2] = static_cast<std::uint8_t>((x ^ y) & 0xff);
    }
  }
  return r;
}

}  // namespace test
