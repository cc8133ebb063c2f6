#include "glomdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "glomdet/errors.hpp"

namespace glomdet {

bool BBox::is_valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min >= 0.0 && y_min >= 0.0 && x_min < x_max &&
         y_min < y_max;
}

bool BBox::within(double bound_w, double bound_h) const {
  return x_min >= 0.0 && y_min >= 0.0 && x_max <= bound_w && y_max <= bound_h;
}

void require_valid(const BBox& box, const char* what) {
  if (!box.is_valid()) {
    throw Error(ErrorCode::kInvariantViolation,
                std::string(what) + ": invalid box (" + std::to_string(box.x_min) + ", " +
                    std::to_string(box.y_min) + ", " + std::to_string(box.x_max) + ", " +
                    std::to_string(box.y_max) + ")");
  }
}

std::optional<BBox> intersection(const BBox& a, const BBox& b) {
  BBox out{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min),
           std::min(a.x_max, b.x_max), std::min(a.y_max, b.y_max)};
  if (out.x_min >= out.x_max || out.y_min >= out.y_max) return std::nullopt;
  return out;
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::min(1.0, inter / uni);
}

double union_area(std::span<const BBox> boxes) {
  std::vector<double> xs;
  xs.reserve(boxes.size() * 2);
  for (const auto& b : boxes) {
    if (b.x_min >= b.x_max || b.y_min >= b.y_max) continue;
    xs.push_back(b.x_min);
    xs.push_back(b.x_max);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double total = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double left = xs[i];
    const double right = xs[i + 1];
    spans.clear();
    for (const auto& b : boxes) {
      if (b.x_min >= b.x_max || b.y_min >= b.y_max) continue;
      if (b.x_min <= left && b.x_max >= right) spans.emplace_back(b.y_min, b.y_max);
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    double covered = 0.0;
    double cur_lo = spans.front().first;
    double cur_hi = spans.front().second;
    for (std::size_t k = 1; k < spans.size(); ++k) {
      if (spans[k].first > cur_hi) {
        covered += cur_hi - cur_lo;
        cur_lo = spans[k].first;
        cur_hi = spans[k].second;
      } else {
        cur_hi = std::max(cur_hi, spans[k].second);
      }
    }
    covered += cur_hi - cur_lo;
    total += covered * (right - left);
  }
  return total;
}

}  // namespace glomdet
