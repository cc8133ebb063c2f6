#include "glomdet/slide.hpp"

#include <tiffio.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <list>
#include <mutex>
#include <unordered_map>

#include "glomdet/errors.hpp"

namespace glomdet::wsi {

namespace {

constexpr const char* kSupportedFormats = "supported formats: TIFF (tiled or stripped), PNG";

thread_local std::string g_tiff_error;

void tiff_error_handler(const char* module, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  g_tiff_error = std::string(module ? module : "tiff") + ": " + buf;
}

void install_tiff_handlers() {
  static std::once_flag once;
  std::call_once(once, [] {
    TIFFSetWarningHandler(nullptr);
    TIFFSetErrorHandler(tiff_error_handler);
  });
}

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};

// Decodes whole TIFF blocks (tiles or strips) on demand and keeps the most
// recently used ones. libtiff handles are not reentrant, so every access
// goes through one mutex.
class TiffReader final : public SlideReader {
 public:
  explicit TiffReader(const std::filesystem::path& path) {
    install_tiff_handlers();
    g_tiff_error.clear();
    tif_.reset(TIFFOpen(path.c_str(), "r"));
    if (!tif_) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  path.string() + " is not a readable TIFF (" + g_tiff_error + "); " +
                      kSupportedFormats);
    }
    TIFF* t = tif_.get();
    std::uint32_t w = 0, h = 0;
    std::uint16_t bps = 8, spp = 1, planar = PLANARCONFIG_CONTIG, photometric = 0,
                  compression = COMPRESSION_NONE;
    TIFFGetField(t, TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(t, TIFFTAG_IMAGELENGTH, &h);
    TIFFGetFieldDefaulted(t, TIFFTAG_BITSPERSAMPLE, &bps);
    TIFFGetFieldDefaulted(t, TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(t, TIFFTAG_PLANARCONFIG, &planar);
    TIFFGetField(t, TIFFTAG_PHOTOMETRIC, &photometric);
    TIFFGetFieldDefaulted(t, TIFFTAG_COMPRESSION, &compression);
    if (w == 0 || h == 0) {
      throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": zero-sized image");
    }
    if (compression == COMPRESSION_JPEG && photometric == PHOTOMETRIC_YCBCR) {
      TIFFSetField(t, TIFFTAG_JPEGCOLORMODE, JPEGCOLORMODE_RGB);
      photometric = PHOTOMETRIC_RGB;
    }
    const bool gray = spp == 1 && (photometric == PHOTOMETRIC_MINISBLACK ||
                                   photometric == PHOTOMETRIC_MINISWHITE);
    const bool rgb = (spp == 3 || spp == 4) && photometric == PHOTOMETRIC_RGB;
    if (bps != 8 || planar != PLANARCONFIG_CONTIG || !(gray || rgb)) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  path.string() + ": unsupported TIFF layout (bits=" + std::to_string(bps) +
                      ", samples=" + std::to_string(spp) +
                      ", photometric=" + std::to_string(photometric) + "); " +
                      kSupportedFormats);
    }
    width_ = w;
    height_ = h;
    spp_ = spp;
    invert_ = photometric == PHOTOMETRIC_MINISWHITE;
    tiled_ = TIFFIsTiled(t) != 0;
    if (tiled_) {
      std::uint32_t tw = 0, th = 0;
      TIFFGetField(t, TIFFTAG_TILEWIDTH, &tw);
      TIFFGetField(t, TIFFTAG_TILELENGTH, &th);
      block_w_ = tw;
      block_h_ = th;
    } else {
      std::uint32_t rps = 0;
      TIFFGetFieldDefaulted(t, TIFFTAG_ROWSPERSTRIP, &rps);
      block_w_ = w;
      block_h_ = std::min<std::int64_t>(rps == 0 ? h : rps, h);
    }
    const std::int64_t block_bytes = block_w_ * block_h_ * spp_;
    capacity_ = static_cast<std::size_t>(std::max<std::int64_t>(4, kCacheBytes / block_bytes));
  }

  std::int64_t width() const override { return width_; }
  std::int64_t height() const override { return height_; }
  const char* format_name() const override { return tiled_ ? "tiff-tiled" : "tiff-stripped"; }

  void read(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h,
            std::uint8_t* out) const override {
    std::lock_guard lock(mu_);
    const std::int64_t bx0 = x / block_w_, bx1 = (x + w - 1) / block_w_;
    const std::int64_t by0 = y / block_h_, by1 = (y + h - 1) / block_h_;
    for (std::int64_t by = by0; by <= by1; ++by) {
      for (std::int64_t bx = bx0; bx <= bx1; ++bx) {
        const std::vector<std::uint8_t>& block = fetch(bx, by);
        const std::int64_t ox = bx * block_w_, oy = by * block_h_;
        const std::int64_t cx0 = std::max(x, ox), cx1 = std::min(x + w, ox + block_w_);
        const std::int64_t cy0 = std::max(y, oy), cy1 = std::min(y + h, oy + block_h_);
        for (std::int64_t yy = cy0; yy < cy1; ++yy) {
          const std::uint8_t* src = block.data() + ((yy - oy) * block_w_ + (cx0 - ox)) * spp_;
          std::uint8_t* dst = out + ((yy - y) * w + (cx0 - x)) * 3;
          copy_row(src, dst, cx1 - cx0);
        }
      }
    }
  }

 private:
  static constexpr std::int64_t kCacheBytes = 64LL << 20;

  void copy_row(const std::uint8_t* src, std::uint8_t* dst, std::int64_t n) const {
    if (spp_ == 3) {
      std::memcpy(dst, src, static_cast<std::size_t>(n * 3));
      return;
    }
    for (std::int64_t i = 0; i < n; ++i) {
      if (spp_ == 1) {
        const std::uint8_t v = invert_ ? static_cast<std::uint8_t>(255 - src[i]) : src[i];
        dst[i * 3] = dst[i * 3 + 1] = dst[i * 3 + 2] = v;
      } else {
        std::memcpy(dst + i * 3, src + i * spp_, 3);
      }
    }
  }

  const std::vector<std::uint8_t>& fetch(std::int64_t bx, std::int64_t by) const {
    const std::int64_t key = by * (width_ / block_w_ + 1) + bx;
    if (auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(block_w_ * block_h_ * spp_), 0);
    TIFF* t = tif_.get();
    g_tiff_error.clear();
    tmsize_t got = -1;
    if (tiled_) {
      const auto tile = TIFFComputeTile(t, static_cast<std::uint32_t>(bx * block_w_),
                                        static_cast<std::uint32_t>(by * block_h_), 0, 0);
      got = TIFFReadEncodedTile(t, tile, buf.data(), static_cast<tmsize_t>(buf.size()));
    } else {
      const auto strip = TIFFComputeStrip(t, static_cast<std::uint32_t>(by * block_h_), 0);
      got = TIFFReadEncodedStrip(t, strip, buf.data(), static_cast<tmsize_t>(buf.size()));
    }
    if (got < 0) {
      throw Error(ErrorCode::kUnreadableFile, "TIFF block decode failed: " + g_tiff_error);
    }
    lru_.emplace_front(key, std::move(buf));
    index_[key] = lru_.begin();
    if (lru_.size() > capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    return lru_.front().second;
  }

  std::unique_ptr<TIFF, TiffCloser> tif_;
  std::int64_t width_ = 0, height_ = 0;
  std::int64_t block_w_ = 0, block_h_ = 0;
  std::int64_t spp_ = 3;
  bool invert_ = false;
  bool tiled_ = false;
  std::size_t capacity_ = 16;

  using Entry = std::pair<std::int64_t, std::vector<std::uint8_t>>;
  mutable std::mutex mu_;
  mutable std::list<Entry> lru_;
  mutable std::unordered_map<std::int64_t, std::list<Entry>::iterator> index_;
};

// PNG has no random access, so the whole image is decoded once at open.
class PngReader final : public SlideReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : raster_(read_png(path)) {}

  std::int64_t width() const override { return raster_.width; }
  std::int64_t height() const override { return raster_.height; }
  const char* format_name() const override { return "png"; }

  void read(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h,
            std::uint8_t* out) const override {
    for (std::int64_t r = 0; r < h; ++r) {
      std::memcpy(out + r * w * 3, raster_.at(x, y + r), static_cast<std::size_t>(w * 3));
    }
  }

 private:
  Raster raster_;
};

enum class Magic { kTiff, kPng, kUnknown };

Magic sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kUnreadableFile, "cannot open " + path.string());
  unsigned char head[8] = {0};
  in.read(reinterpret_cast<char*>(head), sizeof(head));
  const auto n = in.gcount();
  if (n >= 4 && ((head[0] == 'I' && head[1] == 'I' && (head[2] == 42 || head[2] == 43) &&
                  head[3] == 0) ||
                 (head[0] == 'M' && head[1] == 'M' && head[2] == 0 &&
                  (head[3] == 42 || head[3] == 43)))) {
    return Magic::kTiff;
  }
  static const unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (n == 8 && std::memcmp(head, kPngSig, 8) == 0) return Magic::kPng;
  return Magic::kUnknown;
}

}  // namespace

Raster Tile::to_raster() const {
  Raster r;
  r.width = width;
  r.height = height;
  r.channels = 3;
  r.pixels = pixels;
  return r;
}

Slide::Slide(std::string slide_id, std::filesystem::path source,
             std::shared_ptr<const SlideReader> reader)
    : slide_id_(std::move(slide_id)),
      source_path_(std::move(source)),
      width_(reader->width()),
      height_(reader->height()),
      reader_(std::move(reader)) {}

Tile Slide::read_region(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h) const {
  if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > width_ || y + h > height_) {
    throw Error(ErrorCode::kOutOfBounds,
                "region (" + std::to_string(x) + ", " + std::to_string(y) + ", " +
                    std::to_string(w) + "x" + std::to_string(h) + ") outside " +
                    std::to_string(width_) + "x" + std::to_string(height_) + " slide " +
                    slide_id_);
  }
  Tile tile{x, y, w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h * 3))};
  reader_->read(x, y, w, h, tile.pixels.data());
  return tile;
}

Slide open_slide(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kUnreadableFile, path.string() + " does not exist or is not a file");
  }
  std::shared_ptr<const SlideReader> reader;
  switch (sniff(path)) {
    case Magic::kTiff:
      reader = std::make_shared<TiffReader>(path);
      break;
    case Magic::kPng:
      reader = std::make_shared<PngReader>(path);
      break;
    case Magic::kUnknown:
      throw Error(ErrorCode::kUnsupportedFormat,
                  path.string() + " has an unrecognized signature; " + kSupportedFormats);
  }
  return Slide(path.stem().string(), path, std::move(reader));
}

}  // namespace glomdet::wsi
