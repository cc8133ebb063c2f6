#include "glomdet/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "glomdet/errors.hpp"

namespace glomdet::det {

std::uint64_t SeededRng::index(std::uint64_t n) {
  if (n == 0) return 0;
  const auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

std::vector<Detection> simulate_detector(const ann::SlideAnnotation& annotation,
                                         const SimulationParams& p,
                                         const wsi::TissueMask* tissue) {
  auto bad = [](const char* msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (!(p.drop_rate >= 0.0 && p.drop_rate <= 1.0)) bad("drop_rate must lie in [0, 1]");
  if (!(p.fp_rate_per_megapixel >= 0.0) || !std::isfinite(p.fp_rate_per_megapixel)) {
    bad("fp_rate_per_megapixel must be finite and >= 0");
  }
  if (!(p.jitter_px >= 0.0) || !std::isfinite(p.jitter_px)) bad("jitter_px must be >= 0");
  const auto& c = p.confidence;
  if (!(0.0 <= c.tp_min && c.tp_min <= c.tp_max && c.tp_max <= 1.0) ||
      !(0.0 <= c.fp_min && c.fp_min <= c.fp_max && c.fp_max <= 1.0)) {
    bad("confidence ranges must be ordered sub-intervals of [0, 1]");
  }
  if (!(p.fp_size_min > 0.0 && p.fp_size_min <= p.fp_size_max)) bad("bad fp size range");

  const double sw = static_cast<double>(annotation.slide_width);
  const double sh = static_cast<double>(annotation.slide_height);
  SeededRng rng(p.seed);
  std::vector<Detection> out;

  for (const auto& g : annotation.boxes) {
    if (rng.uniform() < p.drop_rate) continue;
    const double j = p.jitter_px;
    BBox b{g.bbox.x_min + rng.uniform(-j, j), g.bbox.y_min + rng.uniform(-j, j),
           g.bbox.x_max + rng.uniform(-j, j), g.bbox.y_max + rng.uniform(-j, j)};
    b = {std::clamp(b.x_min, 0.0, sw), std::clamp(b.y_min, 0.0, sh),
         std::clamp(b.x_max, 0.0, sw), std::clamp(b.y_max, 0.0, sh)};
    if (!b.is_valid()) b = g.bbox;
    const double conf = rng.uniform(c.tp_min, c.tp_max);
    out.push_back({b, conf, g.class_id});
  }

  std::vector<std::int64_t> tissue_pixels;
  double area = sw * sh;
  if (tissue != nullptr) {
    for (std::int64_t i = 0; i < tissue->width * tissue->height; ++i) {
      if (tissue->bits[static_cast<std::size_t>(i)]) tissue_pixels.push_back(i);
    }
    area = tissue->tissue_area_px2;
  }
  const double expected = p.fp_rate_per_megapixel * area / 1e6;
  auto count = static_cast<std::int64_t>(std::floor(expected));
  if (rng.uniform() < expected - std::floor(expected)) ++count;
  if (tissue != nullptr && tissue_pixels.empty()) count = 0;

  for (std::int64_t k = 0; k < count; ++k) {
    const double w = std::min(rng.uniform(p.fp_size_min, p.fp_size_max), sw);
    const double h = std::min(rng.uniform(p.fp_size_min, p.fp_size_max), sh);
    double cx = 0.0, cy = 0.0;
    if (tissue != nullptr) {
      const std::int64_t m = tissue_pixels[rng.index(tissue_pixels.size())];
      const double d = tissue->downsample;
      cx = std::min(sw, (static_cast<double>(m % tissue->width) + rng.uniform()) * d);
      cy = std::min(sh, (static_cast<double>(m / tissue->width) + rng.uniform()) * d);
    } else {
      cx = rng.uniform(0.0, sw);
      cy = rng.uniform(0.0, sh);
    }
    const double x0 = std::clamp(cx - w / 2.0, 0.0, sw - w);
    const double y0 = std::clamp(cy - h / 2.0, 0.0, sh - h);
    const double conf = rng.uniform(c.fp_min, c.fp_max);
    out.push_back({BBox{x0, y0, x0 + w, y0 + h}, conf, ann::kGlomerulusClass});
  }
  return out;
}

}  // namespace glomdet::det
