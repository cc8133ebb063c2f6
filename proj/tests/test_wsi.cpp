#include <array>
#include <cstring>
#include <thread>

#include "fixtures.hpp"
#include "glomdet/image_io.hpp"
#include "glomdet/slide.hpp"
#include "glomdet/tissue_mask.hpp"
#include "glomdet/util.hpp"
#include "test_support.hpp"

using namespace glomdet;
using namespace glomdet::wsi;

namespace {

bool region_matches(const Tile& t, const Raster& r) {
  for (std::int64_t y = 0; y < t.height; ++y) {
    if (std::memcmp(t.pixels.data() + y * t.width * 3, r.at(t.origin_x, t.origin_y + y),
                    static_cast<std::size_t>(t.width * 3)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("TIFF and PNG slides read back exactly") {
  test::TempDir dir("wsi");
  const auto raster = test::pattern_raster(300, 200);
  write_tiff(dir / "tiled.tiff", raster, TiffLayout::kTiled, 64);
  write_tiff(dir / "strips.tif", raster, TiffLayout::kStripped);
  write_png(dir / "plain.png", raster);

  for (const char* name : {"tiled.tiff", "strips.tif", "plain.png"}) {
    CAPTURE(name);
    const auto s = open_slide(dir / name);
    CHECK(s.width_px() == 300);
    CHECK(s.height_px() == 200);
    CHECK(s.slide_id() == std::filesystem::path(name).stem().string());
    const auto full = s.read_region(0, 0, 300, 200);
    CHECK(region_matches(full, raster));
    const auto a = s.read_region(50, 60, 100, 90);
    const auto b = s.read_region(120, 100, 150, 100);
    CHECK(region_matches(a, raster));
    CHECK(region_matches(b, raster));
    CHECK(s.read_region(50, 60, 100, 90).pixels == a.pixels);
  }
}

TEST_CASE("4096x4096 slide reports its dimensions") {
  test::TempDir dir("big");
  Raster r(4096, 4096, 3, 255);
  write_tiff(dir / "big.tiff", r);
  const auto s = open_slide(dir / "big.tiff");
  CHECK(s.width_px() == 4096);
  CHECK(s.height_px() == 4096);
}

TEST_CASE("open_slide errors") {
  test::TempDir dir("wsi_err");
  CHECK_ERROR_CODE(open_slide(dir / "missing.tiff"), ErrorCode::kUnreadableFile);
  write_text_file(dir / "fake.tiff", "this is not an image\n");
  CHECK_ERROR_CODE(open_slide(dir / "fake.tiff"), ErrorCode::kUnsupportedFormat);
  try {
    open_slide(dir / "fake.tiff");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("TIFF") != std::string::npos);
    CHECK(std::string(e.what()).find("PNG") != std::string::npos);
  }
}

TEST_CASE("read_region bounds") {
  const auto s = test::rect_slide(100, 80, {});
  CHECK_ERROR_CODE(s.read_region(50, 0, 51, 10), ErrorCode::kOutOfBounds);
  CHECK_ERROR_CODE(s.read_region(0, 75, 10, 6), ErrorCode::kOutOfBounds);
  CHECK_ERROR_CODE(s.read_region(-1, 0, 10, 10), ErrorCode::kOutOfBounds);
  CHECK_ERROR_CODE(s.read_region(0, 0, 0, 10), ErrorCode::kOutOfBounds);
  CHECK(s.read_region(99, 79, 1, 1).pixels.size() == 3);
}

TEST_CASE("concurrent region reads are identical") {
  test::TempDir dir("wsi_mt");
  const auto raster = test::pattern_raster(512, 512);
  write_tiff(dir / "s.tiff", raster, TiffLayout::kTiled, 128);
  const auto s = open_slide(dir / "s.tiff");
  const auto expect = s.read_region(100, 100, 300, 300).pixels;
  std::array<bool, 4> same{};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      bool ok = true;
      for (int i = 0; i < 20; ++i) ok = ok && s.read_region(100, 100, 300, 300).pixels == expect;
      same[t] = ok;
    });
  }
  for (auto& th : threads) th.join();
  for (bool ok : same) CHECK(ok);
}

TEST_CASE("png raster round trip") {
  test::TempDir dir("png");
  Raster gray(10, 7, 1);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) gray.pixels[i] = static_cast<std::uint8_t>(i);
  write_png(dir / "g.png", gray);
  const auto back = read_png(dir / "g.png");
  CHECK(back.channels == 3);
  CHECK(back.at(3, 2)[0] == gray.at(3, 2)[0]);
  CHECK(back.at(3, 2)[2] == gray.at(3, 2)[0]);
}

TEST_CASE("otsu threshold") {
  std::array<std::uint64_t, 256> h{};
  h[10] = 100;
  CHECK(otsu_threshold(h) == 255);
  h[200] = 100;
  const int cut = otsu_threshold(h);
  CHECK(cut >= 10);
  CHECK(cut < 200);
  // Every cut in [10, 199] separates the two classes equally well.
  CHECK(cut == (10 + 199) / 2);
  std::array<std::uint64_t, 256> empty{};
  CHECK(otsu_threshold(empty) == 255);
}

TEST_CASE("tissue mask examples") {
  const auto blank = compute_tissue_mask(test::rect_slide(1024, 1024, {}));
  CHECK(blank.tissue_area_px2 == 0.0);
  CHECK(blank.set_count() == 0);

  const auto one = compute_tissue_mask(test::rect_slide(2048, 2048, {{300, 400, 1300, 1200}}));
  CHECK(std::abs(one.tissue_area_px2 - 800000.0) <= 0.02 * 800000.0);

  const auto dims = compute_tissue_mask(test::rect_slide(4096, 4096, {{0, 0, 64, 64}}));
  CHECK(dims.width == 256);
  CHECK(dims.height == 256);
  const auto odd = compute_tissue_mask(test::rect_slide(1000, 33, {}));
  CHECK(odd.width == 63);
  CHECK(odd.height == 3);
}

TEST_CASE("tissue area never exceeds the slide") {
  auto reader = std::make_shared<test::RectSlideReader>(1000, 1000, test::kPink);
  reader->add({0, 0, 500, 1000}, test::kWhite);
  const auto m = compute_tissue_mask(Slide("half", "half", reader));
  CHECK(m.tissue_area_px2 <= 1e6);
  CHECK(std::abs(m.tissue_area_px2 - 500000.0) <= 0.02 * 500000.0);
}

TEST_CASE("tissue area is monotone as foreground grows") {
  double last = 0.0;
  for (int size = 200; size <= 1400; size += 200) {
    const auto m = compute_tissue_mask(
        test::rect_slide(1600, 1600, {{100, 100, 100.0 + size, 100.0 + size / 2.0}}));
    CHECK(m.tissue_area_px2 >= last);
    last = m.tissue_area_px2;
  }
}

TEST_CASE("downsample d and 2d agree within the discretization bound") {
  const std::vector<BBox> rects{{130, 210, 1010, 870}, {1200, 100, 1500, 1450}};
  double perimeter = 0.0;
  for (const auto& r : rects) perimeter += 2 * (r.width() + r.height());
  for (int d : {4, 8, 16}) {
    TissueMaskOptions a, b;
    a.downsample = d;
    b.downsample = 2 * d;
    const auto slide = test::rect_slide(1600, 1600, rects);
    const double diff = std::abs(compute_tissue_mask(slide, a).tissue_area_px2 -
                                 compute_tissue_mask(slide, b).tissue_area_px2);
    CHECK(diff <= 4.0 * d * perimeter);
  }
}

TEST_CASE("mask png dump") {
  test::TempDir dir("maskpng");
  const auto m = compute_tissue_mask(test::rect_slide(512, 512, {{0, 0, 256, 512}}));
  save_mask_png(m, dir / "m.png");
  const auto r = read_png(dir / "m.png");
  CHECK(r.width == m.width);
  CHECK(r.at(0, 0)[0] == 255);
  CHECK(r.at(m.width - 1, 0)[0] == 0);
}
