#include "glomdet/tissue_mask.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "glomdet/errors.hpp"

namespace glomdet::wsi {

namespace {

std::uint8_t saturation_byte(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  if (mx <= 0.0) return 0;
  return static_cast<std::uint8_t>(std::lround(255.0 * (mx - mn) / mx));
}

// 3x3 dilation followed by 3x3 erosion. Out-of-image neighbours are ignored.
std::vector<std::uint8_t> close3x3(const std::vector<std::uint8_t>& in, std::int64_t w,
                                   std::int64_t h) {
  auto pass = [w, h](const std::vector<std::uint8_t>& src, bool dilate) {
    std::vector<std::uint8_t> dst(src.size());
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        bool v = !dilate;
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dx = -1; dx <= 1; ++dx) {
            const std::int64_t nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const bool s = src[static_cast<std::size_t>(ny * w + nx)] != 0;
            v = dilate ? (v || s) : (v && s);
          }
        }
        dst[static_cast<std::size_t>(y * w + x)] = v ? 1 : 0;
      }
    }
    return dst;
  };
  return pass(pass(in, true), false);
}

void drop_small_components(std::vector<std::uint8_t>& bits, std::int64_t w, std::int64_t h,
                           int min_pixels) {
  std::vector<std::uint8_t> seen(bits.size(), 0);
  std::vector<std::int64_t> stack, members;
  for (std::int64_t start = 0; start < w * h; ++start) {
    if (!bits[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
    members.clear();
    stack.assign(1, start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const std::int64_t p = stack.back();
      stack.pop_back();
      members.push_back(p);
      const std::int64_t px = p % w, py = p / w;
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::int64_t nx = px + dx, ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const auto q = static_cast<std::size_t>(ny * w + nx);
          if (bits[q] && !seen[q]) {
            seen[q] = 1;
            stack.push_back(static_cast<std::int64_t>(q));
          }
        }
      }
    }
    if (static_cast<std::int64_t>(members.size()) < min_pixels) {
      for (auto m : members) bits[static_cast<std::size_t>(m)] = 0;
    }
  }
}

}  // namespace

std::int64_t TissueMask::set_count() const {
  return std::count(bits.begin(), bits.end(), std::uint8_t{1});
}

int otsu_threshold(std::span<const std::uint64_t, 256> histogram) {
  double total = 0.0, weighted = 0.0;
  int occupied = 0;
  for (int i = 0; i < 256; ++i) {
    total += static_cast<double>(histogram[i]);
    weighted += static_cast<double>(i) * static_cast<double>(histogram[i]);
    if (histogram[i] > 0) ++occupied;
  }
  if (occupied <= 1) return 255;

  std::array<double, 256> between{};
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  for (int t = 0; t < 256; ++t) {
    w0 += static_cast<double>(histogram[t]);
    sum0 += static_cast<double>(t) * static_cast<double>(histogram[t]);
    const double w1 = total - w0;
    if (w0 <= 0.0 || w1 <= 0.0) {
      between[t] = -1.0;
      continue;
    }
    const double mu0 = sum0 / w0;
    const double mu1 = (weighted - sum0) / w1;
    between[t] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    best = std::max(best, between[t]);
  }
  const double tol = best * 1e-12;
  int first = -1, last = -1;
  for (int t = 0; t < 256; ++t) {
    if (between[t] >= 0.0 && best - between[t] <= tol) {
      if (first < 0) first = t;
      last = t;
    }
  }
  return (first + last) / 2;
}

TissueMask compute_tissue_mask(const Slide& slide, const TissueMaskOptions& options) {
  const int d = options.downsample;
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "mask downsample must be >= 1");
  const std::int64_t sw = slide.width_px(), sh = slide.height_px();
  TissueMask mask;
  mask.downsample = d;
  mask.width = (sw + d - 1) / d;
  mask.height = (sh + d - 1) / d;
  const std::size_t n = static_cast<std::size_t>(mask.width * mask.height);

  // Per-block RGB sums, read in chunks aligned to the block grid.
  std::vector<std::uint64_t> sums(n * 3, 0);
  const std::int64_t chunk_w = d * ((4096 + d - 1) / d);
  const std::int64_t chunk_h = d * ((512 + d - 1) / d);
  for (std::int64_t cy = 0; cy < sh; cy += chunk_h) {
    const std::int64_t ch = std::min(chunk_h, sh - cy);
    for (std::int64_t cx = 0; cx < sw; cx += chunk_w) {
      const std::int64_t cw = std::min(chunk_w, sw - cx);
      const Tile tile = slide.read_region(cx, cy, cw, ch);
      for (std::int64_t y = 0; y < ch; ++y) {
        const std::int64_t my = (cy + y) / d;
        const std::uint8_t* row = tile.pixels.data() + y * cw * 3;
        for (std::int64_t x = 0; x < cw; ++x) {
          const std::size_t m = static_cast<std::size_t>(my * mask.width + (cx + x) / d) * 3;
          sums[m] += row[x * 3];
          sums[m + 1] += row[x * 3 + 1];
          sums[m + 2] += row[x * 3 + 2];
        }
      }
    }
  }

  auto block_area = [&](std::int64_t mx, std::int64_t my) {
    const std::int64_t bw = std::min<std::int64_t>(d, sw - mx * d);
    const std::int64_t bh = std::min<std::int64_t>(d, sh - my * d);
    return bw * bh;
  };

  std::vector<std::uint8_t> sat(n);
  std::array<std::uint64_t, 256> hist{};
  for (std::int64_t my = 0; my < mask.height; ++my) {
    for (std::int64_t mx = 0; mx < mask.width; ++mx) {
      const std::size_t m = static_cast<std::size_t>(my * mask.width + mx);
      const double count = static_cast<double>(block_area(mx, my));
      sat[m] = saturation_byte(static_cast<double>(sums[m * 3]) / count,
                               static_cast<double>(sums[m * 3 + 1]) / count,
                               static_cast<double>(sums[m * 3 + 2]) / count);
      ++hist[sat[m]];
    }
  }
  mask.saturation_threshold = std::max(otsu_threshold(hist), options.min_saturation);

  mask.bits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    mask.bits[i] = sat[i] > mask.saturation_threshold ? 1 : 0;
  }
  mask.bits = close3x3(mask.bits, mask.width, mask.height);
  drop_small_components(mask.bits, mask.width, mask.height, options.min_component_pixels);

  double area = 0.0;
  for (std::int64_t my = 0; my < mask.height; ++my) {
    for (std::int64_t mx = 0; mx < mask.width; ++mx) {
      if (mask.bits[static_cast<std::size_t>(my * mask.width + mx)]) {
        area += static_cast<double>(block_area(mx, my));
      }
    }
  }
  mask.tissue_area_px2 = area;
  return mask;
}

void save_mask_png(const TissueMask& mask, const std::filesystem::path& path) {
  Raster r(mask.width, mask.height, 1);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) r.pixels[i] = mask.bits[i] ? 255 : 0;
  write_png(path, r);
}

}  // namespace glomdet::wsi
