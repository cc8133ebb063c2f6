#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <tuple>

#include "glomdet/evaluation.hpp"
#include "glomdet/simulate.hpp"
#include "test_support.hpp"

using namespace glomdet;
using namespace glomdet::eval;
using det::Detection;
using ann::GroundTruthBox;

namespace {

Detection d(double x0, double y0, double x1, double y1, double conf) {
  return {{x0, y0, x1, y1}, conf, 0};
}
GroundTruthBox g(double x0, double y0, double x1, double y1) { return {{x0, y0, x1, y1}, 0}; }

std::vector<std::size_t> priority_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_tuple(-dets[a].confidence, dets[a].bbox.x_min, dets[a].bbox.y_min) <
           std::make_tuple(-dets[b].confidence, dets[b].bbox.x_min, dets[b].bbox.y_min);
  });
  return order;
}

// Enumerates every one-to-one assignment of detections to GTs with
// IoU >= thr and returns the best one under a lexicographic order over
// detections in priority order, where each detection prefers being matched,
// then higher IoU, then a lower GT index. Also reports the largest number of
// pairs any assignment achieves.
struct Enumerated {
  std::vector<std::pair<std::size_t, std::size_t>> best;  // (det, gt)
  std::size_t max_pairs = 0;
};

Enumerated enumerate_assignments(const std::vector<Detection>& dets,
                                 const std::vector<GroundTruthBox>& gts, double thr) {
  const auto order = priority_order(dets);
  using Key = std::vector<std::tuple<int, double, long>>;
  Enumerated out;
  Key best_key;
  bool have = false;
  std::vector<int> used(gts.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> cur;
  Key key;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == order.size()) {
      out.max_pairs = std::max(out.max_pairs, cur.size());
      if (!have || key > best_key) {
        best_key = key;
        out.best = cur;
        have = true;
      }
      return;
    }
    const auto di = order[k];
    key.push_back({0, 0.0, 0});
    rec(k + 1);
    key.pop_back();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (used[gi]) continue;
      const double v = iou(dets[di].bbox, gts[gi].bbox);
      if (v < thr) continue;
      used[gi] = 1;
      cur.push_back({di, gi});
      key.push_back({1, v, -static_cast<long>(gi)});
      rec(k + 1);
      key.pop_back();
      cur.pop_back();
      used[gi] = 0;
    }
  };
  rec(0);
  std::sort(out.best.begin(), out.best.end());
  return out;
}

}  // namespace

TEST_CASE("match_detections examples") {
  std::vector<GroundTruthBox> gts{g(0, 0, 10, 10)};
  std::vector<Detection> one{d(0, 0, 10, 10, 0.9)};
  auto m = match_detections(one, gts);
  CHECK(m.tp_pairs.size() == 1);
  CHECK(m.fp_indices.empty());
  CHECK(m.fn_indices.empty());

  std::vector<Detection> dup{d(0, 0, 10, 10, 0.9), d(0, 0, 10, 10, 0.8)};
  m = match_detections(dup, gts);
  CHECK(m.tp_pairs.size() == 1);
  CHECK(m.tp_pairs[0].first == 0);
  CHECK(m.fp_indices == std::vector<std::size_t>{1});

  std::vector<Detection> weak{d(5, 0, 15, 10, 0.9)};  // IoU 1/3
  m = match_detections(weak, gts);
  CHECK(m.tp_pairs.empty());
  CHECK(m.fn_indices == std::vector<std::size_t>{0});
}

TEST_CASE("GT ties go to the lower index") {
  std::vector<GroundTruthBox> gts{g(0, 0, 10, 10), g(0, 0, 10, 10)};
  std::vector<Detection> dets{d(0, 0, 10, 10, 0.5)};
  const auto m = match_detections(dets, gts);
  REQUIRE(m.tp_pairs.size() == 1);
  CHECK(m.tp_pairs[0].second == 0);
}

TEST_CASE("matching equals the enumerated lexicographic optimum") {
  std::mt19937 gen(123);
  std::uniform_int_distribution<int> n(0, 6), c(0, 30), s(5, 15), conf(1, 5);
  for (int t = 0; t < 500; ++t) {
    std::vector<GroundTruthBox> gts;
    std::vector<Detection> dets;
    const int ng = n(gen), nd = n(gen);
    for (int i = 0; i < ng; ++i) {
      const double x = c(gen), y = c(gen);
      gts.push_back(g(x, y, x + s(gen), y + s(gen)));
    }
    for (int i = 0; i < nd; ++i) {
      const double x = c(gen), y = c(gen);
      dets.push_back(d(x, y, x + s(gen), y + s(gen), conf(gen) / 5.0));
    }
    const auto m = match_detections(dets, gts, 0.5);
    const auto ref = enumerate_assignments(dets, gts, 0.5);
    auto pairs = m.tp_pairs;
    std::sort(pairs.begin(), pairs.end());
    CHECK(pairs == ref.best);
    CHECK(m.tp_pairs.size() <= ref.max_pairs);
    CHECK(m.tp_pairs.size() + m.fp_indices.size() == dets.size());
    CHECK(m.tp_pairs.size() + m.fn_indices.size() == gts.size());
  }
}

TEST_CASE("evaluate_slide hand fixture") {
  std::vector<GroundTruthBox> gts{g(0, 0, 100, 100), g(200, 0, 300, 100), g(400, 0, 500, 100),
                                  g(600, 0, 700, 100)};
  std::vector<Detection> dets{d(0, 0, 100, 100, 0.9), d(200, 0, 300, 100, 0.9),
                              d(400, 0, 500, 100, 0.9), d(0, 500, 200, 600, 0.7)};
  const auto r = evaluate_slide(dets, gts, 1e6, 0.25);
  CHECK(r.tp == 3);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.gt_area == 4e4);
  CHECK(r.fp_area == 2e4);
  CHECK(r.tn_area == 1e6 - 4e4 - 2e4);
  REQUIRE(r.sensitivity.has_value());
  REQUIRE(r.specificity.has_value());
  CHECK(std::abs(*r.sensitivity - 3.0 / 4.0) <= 1e-12);
  CHECK(std::abs(*r.specificity - 9.4e5 / 9.6e5) <= 1e-12);
  // Disjoint fixture: the three areas tile the tissue exactly.
  CHECK(r.tn_area + r.gt_area + r.fp_area == r.tissue_area);
}

TEST_CASE("evaluate_slide edge cases") {
  std::vector<GroundTruthBox> gts{g(0, 0, 10, 10), g(20, 20, 30, 30)};
  std::vector<Detection> perfect{d(0, 0, 10, 10, 0.9), d(20, 20, 30, 30, 0.8)};
  auto r = evaluate_slide(perfect, gts, 1e4, 0.5);
  CHECK(*r.sensitivity == 1.0);
  CHECK(*r.specificity == 1.0);

  r = evaluate_slide({}, gts, 1e4, 0.5);
  CHECK(*r.sensitivity == 0.0);
  CHECK(*r.specificity == 1.0);

  r = evaluate_slide(perfect, {}, 1e4, 0.5);
  CHECK_FALSE(r.sensitivity.has_value());
  CHECK(r.fp == 2);

  r = evaluate_slide(perfect, gts, 1e4, 0.85);  // second detection filtered out
  CHECK(r.tp == 1);
  CHECK(r.fn == 1);

  std::vector<Detection> huge{d(0, 0, 1000, 1000, 0.9)};
  r = evaluate_slide(huge, {}, 100.0, 0.5);
  CHECK(r.tn_area == 0.0);
  CHECK(*r.specificity == 0.0);

  CHECK_ERROR_CODE(evaluate_slide(perfect, gts, 0.0, 0.5), ErrorCode::kEmptyTissue);
}

TEST_CASE("raising the confidence threshold never increases tp") {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> c(0, 200), s(10, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<GroundTruthBox> gts;
    std::vector<Detection> dets;
    for (int i = 0; i < 10; ++i) {
      const double x = c(gen), y = c(gen);
      gts.push_back(g(x, y, x + s(gen), y + s(gen)));
      dets.push_back(d(x + u(gen) * 4, y + u(gen) * 4, x + s(gen), y + s(gen), u(gen)));
    }
    std::int64_t last = 1 << 30;
    for (double thr = 0.0; thr <= 1.0; thr += 0.1) {
      const auto r = evaluate_slide(dets, gts, 1e6, thr);
      CHECK(r.tp <= last);
      last = r.tp;
    }
  }
}

TEST_CASE("macro_average") {
  MetricsReport a, b, c;
  a.sensitivity = 1.0;
  a.specificity = 0.9;
  b.sensitivity = 0.5;
  b.specificity = 0.7;
  c.specificity = 1.0;  // slide without GT
  std::vector<MetricsReport> ab{a, b};
  auto m = macro_average(ab);
  CHECK(m.sensitivity == 0.75);
  CHECK(m.specificity == doctest::Approx(0.8).epsilon(1e-15));
  std::vector<MetricsReport> ba{b, a};
  CHECK(macro_average(ba) == m);
  std::vector<MetricsReport> same{a, a, a};
  CHECK(macro_average(same).sensitivity == 1.0);
  CHECK(macro_average(same).specificity == 0.9);
  std::vector<MetricsReport> abc{a, b, c};
  m = macro_average(abc);
  CHECK(m.sensitivity == 0.75);
  CHECK(m.sensitivity_slides == 2);
  CHECK(m.specificity_slides == 3);
  CHECK(m.specificity >= 0.7);
  CHECK(m.specificity <= 1.0);
  std::vector<MetricsReport> none;
  CHECK_ERROR_CODE(macro_average(none), ErrorCode::kNoEvaluableSlides);
  std::vector<MetricsReport> only_c{c};
  CHECK_ERROR_CODE(macro_average(only_c), ErrorCode::kNoEvaluableSlides);
}

TEST_CASE("roc_curve endpoints and validation") {
  std::vector<GroundTruthBox> gts{g(0, 0, 10, 10), g(20, 20, 30, 30)};
  std::vector<Detection> perfect{d(0, 0, 10, 10, 0.9), d(20, 20, 30, 30, 0.6)};
  const auto th = default_roc_thresholds();
  REQUIRE(th.size() == 102);
  CHECK(th.front() == 1.01);
  CHECK(th[1] == 1.0);
  CHECK(th.back() == 0.0);
  const auto curve = roc_curve(perfect, gts, 1e4, 0.5, th);
  REQUIRE(curve.points.size() == th.size());
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.back().tpr == 1.0);
  CHECK(curve.points.back().fpr == 0.0);

  std::vector<double> bad{0.5, 0.5};
  CHECK_ERROR_CODE(roc_curve(perfect, gts, 1e4, 0.5, bad), ErrorCode::kInvalidArgument);
  std::vector<double> neg{0.5, -0.1};
  CHECK_ERROR_CODE(roc_curve(perfect, gts, 1e4, 0.5, neg), ErrorCode::kInvalidArgument);
}

TEST_CASE("roc tpr is monotone on simulated detections") {
  ann::SlideAnnotation a{"r", 4096, 4096, {}, ann::SourceKind::kBbox};
  for (int i = 0; i < 30; ++i) {
    const double x = 100 + (i % 6) * 650, y = 100 + (i / 6) * 700;
    a.boxes.push_back({{x, y, x + 150, y + 120}, 0});
  }
  const auto th = default_roc_thresholds();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    det::SimulationParams p;
    p.seed = seed;
    const auto dets = det::simulate_detector(a, p);
    const auto curve = roc_curve(dets, a.boxes, 0.7 * 4096 * 4096, 0.5, th);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
      CHECK(curve.points[i].fpr >= 0.0);
      CHECK(curve.points[i].fpr <= 1.0);
    }
  }
}

TEST_CASE("roc_curve_macro averages per threshold") {
  std::vector<SlideCase> cases{
      {"a", {d(0, 0, 10, 10, 0.9)}, {g(0, 0, 10, 10), g(20, 20, 30, 30)}, 1e4},
      {"b", {d(0, 0, 10, 10, 0.4)}, {g(0, 0, 10, 10)}, 1e4},
      {"c", {d(50, 50, 60, 60, 0.8)}, {}, 1e4}};
  std::vector<double> th{1.01, 0.5, 0.0};
  const auto curve = roc_curve_macro(cases, 0.5, th);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].tpr == 0.0);
  CHECK(curve.points[0].fpr == 0.0);
  CHECK(curve.points[1].tpr == 0.25);  // (0.5 + 0) / 2, slide c has no GT
  CHECK(curve.points[2].tpr == 0.75);
  // Only slide c has a false positive: 100 of 1e4 px^2.
  CHECK(curve.points[2].fpr == doctest::Approx((100.0 / 1e4) / 3).epsilon(1e-12));
}
