#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "glomdet/geometry.hpp"
#include "test_support.hpp"

using namespace glomdet;

TEST_CASE("bbox validity") {
  CHECK(BBox{0, 0, 1, 1}.is_valid());
  CHECK_FALSE(BBox{1, 0, 1, 1}.is_valid());
  CHECK_FALSE(BBox{-1, 0, 1, 1}.is_valid());
  CHECK_FALSE(BBox{0, 0, std::numeric_limits<double>::infinity(), 1}.is_valid());
  CHECK_FALSE(BBox{0, 0, std::nan(""), 1}.is_valid());
  CHECK(BBox{0, 0, 10, 10}.within(10, 10));
  CHECK_FALSE(BBox{0, 0, 10, 11}.within(10, 10));
  CHECK_ERROR_CODE(require_valid(BBox{2, 2, 1, 3}, "box"), ErrorCode::kInvariantViolation);
}

TEST_CASE("iou examples") {
  const BBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BBox{20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, BBox{10, 0, 20, 10}) == 0.0);  // touching edge
  CHECK(iou(a, BBox{5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0).epsilon(1e-15));
}

TEST_CASE("iou properties") {
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> c(0, 50);
  auto box = [&] {
    int x0 = c(gen), x1 = c(gen), y0 = c(gen), y1 = c(gen);
    if (x0 == x1) ++x1;
    if (y0 == y1) ++y1;
    return BBox{double(std::min(x0, x1)), double(std::min(y0, y1)), double(std::max(x0, x1)),
                double(std::max(y0, y1))};
  };
  for (int i = 0; i < 500; ++i) {
    const BBox a = box(), b = box();
    const double v = iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == iou(b, a));
    const BBox at{a.x_min + 7, a.y_min + 3, a.x_max + 7, a.y_max + 3};
    const BBox bt{b.x_min + 7, b.y_min + 3, b.x_max + 7, b.y_max + 3};
    CHECK(iou(at, bt) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("intersection") {
  const auto i = intersection(BBox{0, 0, 10, 10}, BBox{5, 2, 15, 8});
  REQUIRE(i.has_value());
  CHECK(*i == BBox{5, 2, 10, 8});
  CHECK_FALSE(intersection(BBox{0, 0, 1, 1}, BBox{1, 0, 2, 1}).has_value());
  CHECK(intersection_area(BBox{0, 0, 10, 10}, BBox{5, 2, 15, 8}) == 30.0);
}

TEST_CASE("union_area examples") {
  std::vector<BBox> none;
  CHECK(union_area(none) == 0.0);
  std::vector<BBox> one{{0, 0, 10, 10}};
  CHECK(union_area(one) == 100.0);
  std::vector<BBox> two{{0, 0, 10, 10}, {20, 20, 30, 30}};
  CHECK(union_area(two) == 200.0);
  std::vector<BBox> overlap{{0, 0, 10, 10}, {5, 5, 15, 15}};
  CHECK(union_area(overlap) == 175.0);
  std::vector<BBox> nested{{0, 0, 10, 10}, {2, 2, 4, 4}, {0, 0, 10, 10}};
  CHECK(union_area(nested) == 100.0);
}

TEST_CASE("union_area matches rasterized count") {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> c(0, 40), n(0, 8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<BBox> boxes;
    const int k = n(gen);
    for (int i = 0; i < k; ++i) {
      int x0 = c(gen), x1 = c(gen), y0 = c(gen), y1 = c(gen);
      if (x0 == x1 || y0 == y1) continue;
      boxes.push_back({double(std::min(x0, x1)), double(std::min(y0, y1)),
                       double(std::max(x0, x1)), double(std::max(y0, y1))});
    }
    int count = 0;
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        for (const auto& b : boxes) {
          if (x >= b.x_min && x + 1 <= b.x_max && y >= b.y_min && y + 1 <= b.y_max) {
            ++count;
            break;
          }
        }
      }
    }
    CHECK(union_area(boxes) == double(count));
  }
}
