#include "glomdet/image_io.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "glomdet/errors.hpp"

namespace glomdet::wsi {

Raster read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Raster out(image.width, image.height, 3);
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": " + msg);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw Error(ErrorCode::kInvalidArgument, "png output needs 1 or 3 channels");
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raster.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIoError, "cannot write " + path.string() + ": " + msg);
  }
}

namespace {

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};

}  // namespace

void write_tiff(const std::filesystem::path& path, const Raster& image, TiffLayout layout,
                int tile_edge) {
  if (image.channels != 3) {
    throw Error(ErrorCode::kInvalidArgument, "tiff output expects an RGB raster");
  }
  if (layout == TiffLayout::kTiled && (tile_edge <= 0 || tile_edge % 16 != 0)) {
    throw Error(ErrorCode::kInvalidArgument, "tiff tile edge must be a positive multiple of 16");
  }
  std::unique_ptr<TIFF, TiffCloser> tif(TIFFOpen(path.c_str(), "w"));
  if (!tif) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  TIFF* t = tif.get();
  const auto w = static_cast<std::uint32_t>(image.width);
  const auto h = static_cast<std::uint32_t>(image.height);
  TIFFSetField(t, TIFFTAG_IMAGEWIDTH, w);
  TIFFSetField(t, TIFFTAG_IMAGELENGTH, h);
  TIFFSetField(t, TIFFTAG_SAMPLESPERPIXEL, 3);
  TIFFSetField(t, TIFFTAG_BITSPERSAMPLE, 8);
  TIFFSetField(t, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(t, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_RGB);
  TIFFSetField(t, TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
  TIFFSetField(t, TIFFTAG_ORIENTATION, ORIENTATION_TOPLEFT);

  const std::size_t row_bytes = static_cast<std::size_t>(w) * 3;
  if (layout == TiffLayout::kTiled) {
    const auto edge = static_cast<std::uint32_t>(tile_edge);
    TIFFSetField(t, TIFFTAG_TILEWIDTH, edge);
    TIFFSetField(t, TIFFTAG_TILELENGTH, edge);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(edge) * edge * 3);
    for (std::uint32_t ty = 0; ty < h; ty += edge) {
      for (std::uint32_t tx = 0; tx < w; tx += edge) {
        std::fill(buf.begin(), buf.end(), 0);
        const std::uint32_t cw = std::min(edge, w - tx);
        const std::uint32_t ch = std::min(edge, h - ty);
        for (std::uint32_t r = 0; r < ch; ++r) {
          std::memcpy(buf.data() + static_cast<std::size_t>(r) * edge * 3,
                      image.at(tx, ty + r), static_cast<std::size_t>(cw) * 3);
        }
        if (TIFFWriteTile(t, buf.data(), tx, ty, 0, 0) < 0) {
          throw Error(ErrorCode::kIoError, "tile write failed for " + path.string());
        }
      }
    }
  } else {
    const std::uint32_t rows_per_strip = 64;
    TIFFSetField(t, TIFFTAG_ROWSPERSTRIP, rows_per_strip);
    for (std::uint32_t y = 0, strip = 0; y < h; y += rows_per_strip, ++strip) {
      const std::uint32_t rows = std::min(rows_per_strip, h - y);
      if (TIFFWriteEncodedStrip(t, strip, const_cast<std::uint8_t*>(image.at(0, y)),
                                static_cast<tmsize_t>(rows * row_bytes)) < 0) {
        throw Error(ErrorCode::kIoError, "strip write failed for " + path.string());
      }
    }
  }
}

}  // namespace glomdet::wsi
