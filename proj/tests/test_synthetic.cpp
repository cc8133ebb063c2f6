#include <algorithm>

#include "glomdet/annotation.hpp"
#include "glomdet/synthetic.hpp"
#include "test_support.hpp"

using namespace glomdet;

TEST_CASE("synthetic slide places non-overlapping glomeruli") {
  synth::SyntheticSlideParams p;
  p.width = p.height = 2048;
  p.num_glomeruli = 20;
  const auto s = synth::make_synthetic_slide("syn", p);
  REQUIRE(s.annotation.boxes.size() == 20);
  ann::validate(s.annotation);
  for (std::size_t i = 0; i < s.annotation.boxes.size(); ++i) {
    const auto& b = s.annotation.boxes[i].bbox;
    CHECK(b.width() >= p.min_size - 1);
    CHECK(b.width() <= p.max_size);
    for (std::size_t j = i + 1; j < s.annotation.boxes.size(); ++j) {
      CHECK(intersection_area(b, s.annotation.boxes[j].bbox) == 0.0);
    }
  }
  // The RLE route recovers the same boxes.
  const auto rle = ann::rle_from_bitmap(s.glomerulus_mask);
  const auto back = ann::annotation_from_rle(rle, "syn", 2048, 2048);
  auto by_corner = [](const ann::GroundTruthBox& a, const ann::GroundTruthBox& b) {
    return std::make_pair(a.bbox.x_min, a.bbox.y_min) < std::make_pair(b.bbox.x_min, b.bbox.y_min);
  };
  auto expect = s.annotation.boxes;
  auto got = back.boxes;
  std::sort(expect.begin(), expect.end(), by_corner);
  std::sort(got.begin(), got.end(), by_corner);
  CHECK(got == expect);
  CHECK(synth::make_synthetic_slide("syn", p).annotation == s.annotation);
}

TEST_CASE("synthetic slide parameter errors") {
  synth::SyntheticSlideParams p;
  p.width = 100;
  CHECK_ERROR_CODE(synth::make_synthetic_slide("x", p), ErrorCode::kInvalidArgument);
  p = {};
  p.width = p.height = 512;
  p.num_glomeruli = 500;
  CHECK_ERROR_CODE(synth::make_synthetic_slide("x", p), ErrorCode::kInvalidArgument);
}
