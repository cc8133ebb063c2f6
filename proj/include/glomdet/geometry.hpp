#pragma once

#include <optional>
#include <span>

namespace glomdet {

// Axis-aligned box in level-0 slide pixels. x grows right, y grows down,
// origin at the top-left corner. A pixel (c, r) covers [c, c+1) x [r, r+1).
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  // Finite, non-negative and with positive extent on both axes.
  bool is_valid() const;
  bool within(double bound_w, double bound_h) const;

  bool operator==(const BBox&) const = default;
};

// Throws InvariantViolation naming `what` when the box is not valid.
void require_valid(const BBox& box, const char* what);

std::optional<BBox> intersection(const BBox& a, const BBox& b);
double intersection_area(const BBox& a, const BBox& b);

// Intersection over union. 0 for disjoint or touching boxes.
double iou(const BBox& a, const BBox& b);

// Exact area of the union, computed by a sweep over x slabs with merged
// y intervals. Overlapping boxes are counted once.
double union_area(std::span<const BBox> boxes);

}  // namespace glomdet
