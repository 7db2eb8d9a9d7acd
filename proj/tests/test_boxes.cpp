#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ladr/boxes.hpp"

using namespace ladr;

namespace {

// Area-arithmetic IoU on corner boxes, written independently of the library
// formula. With integer corners every term is exact in doubles.
double iou_reference(const BoxCorners& a, const BoxCorners& b) {
  const double ix0 = std::max(a.xmin, b.xmin), ix1 = std::min(a.xmax, b.xmax);
  const double iy0 = std::max(a.ymin, b.ymin), iy1 = std::min(a.ymax, b.ymax);
  const double inter =
      std::max(0.0, ix1 - ix0) * std::max(0.0, iy1 - iy0);
  const double area_a = (a.xmax - a.xmin) * (a.ymax - a.ymin);
  const double area_b = (b.xmax - b.xmin) * (b.ymax - b.ymin);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Plain O(n^2) greedy suppression, kept deliberately naive.
std::vector<Detection> nms_reference(const std::vector<Detection>& dets,
                                     double thresh, std::size_t max_out) {
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dets[a].score > dets[b].score; });
  std::vector<Detection> kept;
  std::vector<int> kept_idx;
  for (int idx : order) {
    if (kept.size() >= max_out) break;
    bool ok = true;
    for (int k : kept_idx)
      if (iou(dets[idx].box, dets[k].box) > thresh) ok = false;
    if (ok) {
      kept.push_back(dets[idx]);
      kept_idx.push_back(idx);
    }
  }
  return kept;
}

BoxXYWH random_box(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> len(1.0, extent / 2);
  return {pos(rng), pos(rng), len(rng), len(rng)};
}

}  // namespace

TEST_CASE("iou: hand cases") {
  const BoxXYWH a{5, 5, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, BoxXYWH{100, 100, 10, 10}) == 0.0);

  // corners (0,0,10,10) vs (5,0,15,10): intersection 50, union 150
  const BoxXYWH b = to_xywh({0, 0, 10, 10});
  const BoxXYWH c = to_xywh({5, 0, 15, 10});
  CHECK(iou(b, c) == 50.0 / 150.0);
}

TEST_CASE("iou: matches area arithmetic exactly on integer boxes") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> coord(0, 60);
  std::uniform_int_distribution<int> side(1, 40);
  for (int i = 0; i < 20000; ++i) {
    BoxCorners a, b;
    a.xmin = coord(rng); a.xmax = a.xmin + side(rng);
    a.ymin = coord(rng); a.ymax = a.ymin + side(rng);
    b.xmin = coord(rng); b.xmax = b.xmin + side(rng);
    b.ymin = coord(rng); b.ymax = b.ymin + side(rng);
    REQUIRE(iou(to_xywh(a), to_xywh(b)) == iou_reference(a, b));
  }
}

TEST_CASE("iou: symmetric and bounded") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 5000; ++i) {
    const BoxXYWH a = random_box(rng, 100), b = random_box(rng, 100);
    const double v = iou(a, b);
    REQUIRE(v == iou(b, a));
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("box codec: hand cases") {
  const BoxXYWH anchor{50, 50, 20, 20};
  BoxEncoding t = encode_box(anchor, anchor);
  CHECK(t.tx == 0.0);
  CHECK(t.ty == 0.0);
  CHECK(t.tw == 0.0);
  CHECK(t.th == 0.0);

  t = encode_box({52, 48, 40, 10}, anchor);
  CHECK(t.tx == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.ty == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(t.tw == doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(t.th == doctest::Approx(-5.0 * std::log(2.0)).epsilon(1e-12));

  t = encode_box({50, 50, 20 * std::exp(0.2), 20}, anchor);
  CHECK(t.tw == doctest::Approx(1.0).epsilon(1e-12));

  const BoxXYWH back = decode_box({1.0, -1.0, 5.0 * std::log(2.0),
                                   -5.0 * std::log(2.0)}, anchor);
  CHECK(back.x == doctest::Approx(52.0).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(48.0).epsilon(1e-12));
  CHECK(back.w == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(back.h == doctest::Approx(10.0).epsilon(1e-12));

  const BoxXYWH identity = decode_box({0, 0, 0, 0}, anchor);
  CHECK(identity.x == 50.0);
  CHECK(identity.w == 20.0);
}

TEST_CASE("box codec: round trip under 1e-6 relative over 1e4 pairs") {
  // Size ratios stay inside the codec's exp(+-2) clamp band; centers roam.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ratio(-1.9, 1.9);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const BoxXYWH anchor = random_box(rng, 96);
    BoxXYWH gt = random_box(rng, 96);
    gt.w = anchor.w * std::exp(ratio(rng));
    gt.h = anchor.h * std::exp(ratio(rng));
    const BoxXYWH back = decode_box(encode_box(gt, anchor), anchor);
    worst = std::max({worst,
                      std::abs(back.x - gt.x) / std::max(1.0, std::abs(gt.x)),
                      std::abs(back.y - gt.y) / std::max(1.0, std::abs(gt.y)),
                      std::abs(back.w - gt.w) / gt.w,
                      std::abs(back.h - gt.h) / gt.h});
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("box codec: clamp keeps huge logits finite") {
  const BoxXYWH anchor{50, 50, 20, 20};
  const BoxXYWH d = decode_box({0, 0, 1e6, -1e6}, anchor);
  CHECK(std::isfinite(d.w));
  CHECK(d.w == doctest::Approx(20.0 * std::exp(2.0)));
  CHECK(d.h == doctest::Approx(20.0 * std::exp(-2.0)));
}

TEST_CASE("nms: hand cases") {
  Detection a{{10, 10, 10, 10}, 0.9, RotationAngle(0.0)};
  Detection b{{10, 10, 10, 10}, 0.8, RotationAngle(0.0)};
  auto out = nms({a, b}, 0.5, 100);
  REQUIRE(out.size() == 1);
  CHECK(out[0].score == 0.9);

  out = nms({a}, 0.5, 100);
  REQUIRE(out.size() == 1);

  // equal scores: lower input index survives
  Detection c = a;
  c.angle = RotationAngle(0.5);
  out = nms({a, c}, 0.5, 100);
  REQUIRE(out.size() == 1);
  CHECK(out[0].angle.value() == 0.0);

  // disjoint boxes all kept, sorted by score
  Detection far{{80, 80, 10, 10}, 0.95, RotationAngle(0.0)};
  out = nms({a, far}, 0.5, 100);
  REQUIRE(out.size() == 2);
  CHECK(out[0].score == 0.95);

  // max_out truncates
  out = nms({a, far}, 0.5, 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].score == 0.95);
}

TEST_CASE("nms: equals the quadratic reference on random sets") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int set = 0; set < 60; ++set) {
    std::vector<Detection> dets(200);
    for (auto& d : dets) {
      d.box = random_box(rng, 96);
      d.score = score(rng);
      d.angle = RotationAngle(0.25);
    }
    // a few duplicated scores to exercise the tie rule
    dets[7].score = dets[3].score;
    dets[11].score = dets[3].score;

    const auto got = nms(dets, 0.5, 100);
    const auto want = nms_reference(dets, 0.5, 100);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].score == want[i].score);
      REQUIRE(got[i].box.x == want[i].box.x);
      REQUIRE(got[i].box.y == want[i].box.y);
      REQUIRE(got[i].box.w == want[i].box.w);
      REQUIRE(got[i].box.h == want[i].box.h);
    }

    // kept pairs never exceed the threshold
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j)
        REQUIRE(iou(got[i].box, got[j].box) <= 0.5);
  }
}

TEST_CASE("corner/center conversions invert") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 1000; ++i) {
    const BoxXYWH b = random_box(rng, 100);
    const BoxXYWH back = to_xywh(to_corners(b));
    REQUIRE(back.x == doctest::Approx(b.x).epsilon(1e-12));
    REQUIRE(back.w == doctest::Approx(b.w).epsilon(1e-12));
  }
}
