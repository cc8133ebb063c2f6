#include "glomdet/synthetic.hpp"

#include <algorithm>

#include "glomdet/errors.hpp"
#include "glomdet/simulate.hpp"

namespace glomdet::synth {

namespace {

constexpr std::uint8_t kGlass[3] = {245, 245, 245};
constexpr std::uint8_t kTissue[3] = {226, 150, 190};
constexpr std::uint8_t kGlomerulus[3] = {140, 70, 160};

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx;
  const double dy = (y - cy) / ry;
  return dx * dx + dy * dy <= 1.0;
}

}  // namespace

SyntheticSlide make_synthetic_slide(const std::string& slide_id,
                                    const SyntheticSlideParams& p) {
  if (p.width < 256 || p.height < 256 || p.num_glomeruli < 0 || p.min_size < 16 ||
      p.max_size < p.min_size || p.spacing < 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic slide parameters out of range");
  }
  det::SeededRng rng(p.seed);
  const double tcx = p.width / 2.0, tcy = p.height / 2.0;
  const double trx = p.width * 0.45, try_ = p.height * 0.45;

  SyntheticSlide out;
  out.image = wsi::Raster(p.width, p.height, 3);
  out.glomerulus_mask = ann::Bitmap(p.width, p.height);
  out.annotation.slide_id = slide_id;
  out.annotation.slide_width = p.width;
  out.annotation.slide_height = p.height;
  out.annotation.source_kind = ann::SourceKind::kRle;

  for (std::int64_t y = 0; y < p.height; ++y) {
    for (std::int64_t x = 0; x < p.width; ++x) {
      const auto* c = in_ellipse(x + 0.5, y + 0.5, tcx, tcy, trx, try_) ? kTissue : kGlass;
      std::copy(c, c + 3, out.image.at(x, y));
    }
  }

  std::vector<BBox> placed;
  const int max_attempts = 200 * std::max(p.num_glomeruli, 1);
  int attempts = 0;
  while (static_cast<int>(placed.size()) < p.num_glomeruli) {
    if (++attempts > max_attempts) {
      throw Error(ErrorCode::kInvalidArgument,
                  "could not place " + std::to_string(p.num_glomeruli) + " glomeruli");
    }
    const auto span = static_cast<std::uint64_t>(p.max_size - p.min_size + 1);
    const auto w = p.min_size + static_cast<std::int64_t>(rng.index(span));
    const auto h = p.min_size + static_cast<std::int64_t>(rng.index(span));
    const auto x0 = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(p.width - w)));
    const auto y0 = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(p.height - h)));
    const BBox box{static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + w),
                   static_cast<double>(y0 + h)};
    const bool inside = in_ellipse(box.x_min, box.y_min, tcx, tcy, trx, try_) &&
                        in_ellipse(box.x_max, box.y_min, tcx, tcy, trx, try_) &&
                        in_ellipse(box.x_min, box.y_max, tcx, tcy, trx, try_) &&
                        in_ellipse(box.x_max, box.y_max, tcx, tcy, trx, try_);
    if (!inside) continue;
    const double g = static_cast<double>(p.spacing);
    const BBox grown{box.x_min - g, box.y_min - g, box.x_max + g, box.y_max + g};
    if (std::any_of(placed.begin(), placed.end(),
                    [&](const BBox& o) { return intersection_area(grown, o) > 0.0; })) {
      continue;
    }
    placed.push_back(box);

    const double cx = x0 + w / 2.0, cy = y0 + h / 2.0;
    std::int64_t c0 = x0 + w, c1 = x0 - 1, r0 = y0 + h, r1 = y0 - 1;
    for (std::int64_t y = y0; y < y0 + h; ++y) {
      for (std::int64_t x = x0; x < x0 + w; ++x) {
        if (!in_ellipse(x + 0.5, y + 0.5, cx, cy, w / 2.0, h / 2.0)) continue;
        std::copy(kGlomerulus, kGlomerulus + 3, out.image.at(x, y));
        out.glomerulus_mask.set(x, y);
        c0 = std::min(c0, x);
        c1 = std::max(c1, x);
        r0 = std::min(r0, y);
        r1 = std::max(r1, y);
      }
    }
    out.annotation.boxes.push_back(
        {{static_cast<double>(c0), static_cast<double>(r0), static_cast<double>(c1 + 1),
          static_cast<double>(r1 + 1)},
         ann::kGlomerulusClass});
  }
  return out;
}

}  // namespace glomdet::synth
