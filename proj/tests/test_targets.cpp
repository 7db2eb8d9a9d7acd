#include <algorithm>
#include <set>

#include "doctest.h"
#include "ladr/targets.hpp"

using namespace ladr;

namespace {

Anchor make_anchor(double x, double y, double w, double h, int idx = 0) {
  return Anchor{BoxXYWH{x, y, w, h}, 0, 0, idx, 0};
}

GroundTruthObject gt_box(double xmin, double ymin, double xmax, double ymax,
                         double angle = 0.25) {
  GroundTruthObject o;
  o.box = {xmin, ymin, xmax, ymax};
  o.angle = RotationAngle(angle);
  return o;
}

}  // namespace

TEST_CASE("assign: exact anchor match is positive with zero encoding") {
  std::vector<Anchor> anchors = {make_anchor(10, 10, 10, 10, 0),
                                 make_anchor(40, 40, 10, 10, 1)};
  std::vector<GroundTruthObject> gts = {gt_box(5, 5, 15, 15)};
  const AnchorTargets t =
      assign_targets(gts, anchors, DatasetOrigin::kDs1);

  REQUIRE(t.size() == 2);
  CHECK(t.labels[0] == AnchorLabel::kPositive);
  CHECK(t.labels[1] == AnchorLabel::kNegative);
  CHECK(t.matched_gt[0] == 0);
  CHECK(t.matched_gt[1] == -1);
  CHECK(t.box_targets[0].tx == 0.0);
  CHECK(t.box_targets[0].ty == 0.0);
  CHECK(t.box_targets[0].tw == 0.0);
  CHECK(t.box_targets[0].th == 0.0);
  CHECK(t.positive_count() == 1);
}

TEST_CASE("assign: empty ground truth leaves all negative") {
  std::vector<Anchor> anchors = {make_anchor(10, 10, 10, 10),
                                 make_anchor(40, 40, 10, 10)};
  const AnchorTargets t =
      assign_targets({}, anchors, DatasetOrigin::kDs1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    REQUIRE(t.labels[i] == AnchorLabel::kNegative);
    REQUIRE(t.matched_gt[i] == -1);
  }
}

TEST_CASE("assign: intermediate overlap is ignored") {
  // A0 ends up at IoU ~0.449 with the GT; A1 at ~0.5625 takes both the
  // threshold match and the forced match, so A0 stays ignored.
  std::vector<Anchor> anchors = {make_anchor(5, 5, 10, 10, 0),
                                 make_anchor(6, 5, 10, 10, 1)};
  std::vector<GroundTruthObject> gts = {gt_box(3.8, 0, 13.8, 10)};
  const AnchorTargets t =
      assign_targets(gts, anchors, DatasetOrigin::kDs1);
  CHECK(t.labels[0] == AnchorLabel::kIgnored);
  CHECK(t.labels[1] == AnchorLabel::kPositive);
}

TEST_CASE("assign: below-threshold object still gets its best anchor") {
  const auto anchors = generate_anchors(desk_anchor_config());
  // Far smaller than any anchor: every IoU lands under 0.5.
  std::vector<GroundTruthObject> gts = {gt_box(17, 23, 22, 28)};
  const AnchorTargets t =
      assign_targets(gts, anchors, DatasetOrigin::kDs1);

  // Brute-force argmax, first index on ties.
  double best = -1.0;
  std::size_t best_i = 0;
  const BoxXYWH gtb = to_xywh(gts[0].box);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double v = iou(anchors[i].box, gtb);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  REQUIRE(best < 0.5);
  CHECK(t.positive_count() == 1);
  CHECK(t.labels[best_i] == AnchorLabel::kPositive);
  CHECK(t.matched_gt[best_i] == 0);
}

TEST_CASE("assign: every object claims at least one anchor") {
  const auto anchors = generate_anchors(desk_anchor_config());
  std::vector<GroundTruthObject> gts = {gt_box(10, 10, 34, 34, 0.5),
                                        gt_box(60, 58, 90, 88, -0.75),
                                        gt_box(40, 5, 52, 17, 1.0)};
  const AnchorTargets t =
      assign_targets(gts, anchors, DatasetOrigin::kDs1);
  std::set<std::int32_t> matched;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.labels[i] == AnchorLabel::kPositive) matched.insert(t.matched_gt[i]);
  CHECK(matched == std::set<std::int32_t>{0, 1, 2});
}

TEST_CASE("assign: angle targets carry the split form on Ds1 only") {
  std::vector<Anchor> anchors = {make_anchor(10, 10, 10, 10)};
  std::vector<GroundTruthObject> gts = {gt_box(5, 5, 15, 15, -0.3)};

  const AnchorTargets ds1 =
      assign_targets(gts, anchors, DatasetOrigin::kDs1);
  CHECK(ds1.angle_value[0] == 0.3);
  CHECK(ds1.angle_direction[0] == SpinDirection::kCw);

  const AnchorTargets ds2 =
      assign_targets(gts, anchors, DatasetOrigin::kDs2);
  CHECK(ds2.labels[0] == AnchorLabel::kPositive);
  CHECK(ds2.angle_value[0] == 0.0);

  std::vector<GroundTruthObject> no_angle = {gt_box(5, 5, 15, 15)};
  no_angle[0].angle.reset();
  CHECK_THROWS_AS(assign_targets(no_angle, anchors, DatasetOrigin::kDs1),
                  std::invalid_argument);
  CHECK_NOTHROW(assign_targets(no_angle, anchors, DatasetOrigin::kDs2));
}

TEST_CASE("minibatch: caps and fill behavior") {
  AnchorTargets t;
  t.labels.assign(1403, AnchorLabel::kNegative);
  t.matched_gt.assign(1403, -1);

  SUBCASE("few positives ride along whole") {
    for (int i = 0; i < 3; ++i) t.labels[i * 100] = AnchorLabel::kPositive;
    const auto s = sample_minibatch(t, 7, 256, 0.5);
    REQUIRE(s.size() == 256);
    int pos = 0;
    for (auto i : s)
      if (t.labels[i] == AnchorLabel::kPositive) ++pos;
    CHECK(pos == 3);
  }

  SUBCASE("no positives fills with negatives") {
    const auto s = sample_minibatch(t, 7, 256, 0.5);
    REQUIRE(s.size() == 256);
    for (auto i : s) REQUIRE(t.labels[i] == AnchorLabel::kNegative);
  }

  SUBCASE("positive overflow subsamples to the cap") {
    for (int i = 0; i < 400; ++i) t.labels[i] = AnchorLabel::kPositive;
    const auto s = sample_minibatch(t, 7, 256, 0.5);
    REQUIRE(s.size() == 256);
    int pos = 0;
    for (auto i : s)
      if (t.labels[i] == AnchorLabel::kPositive) ++pos;
    CHECK(pos == 128);
  }

  SUBCASE("ignored anchors never sampled") {
    for (int i = 0; i < 1403; ++i)
      if (i % 3 == 0) t.labels[i] = AnchorLabel::kIgnored;
    const auto s = sample_minibatch(t, 7, 256, 0.5);
    for (auto i : s) REQUIRE(t.labels[i] != AnchorLabel::kIgnored);
  }

  SUBCASE("short supply returns everything available") {
    AnchorTargets small;
    small.labels.assign(10, AnchorLabel::kNegative);
    const auto s = sample_minibatch(small, 7, 256, 0.5);
    CHECK(s.size() == 10);
  }
}

TEST_CASE("minibatch: deterministic and ordered") {
  AnchorTargets t;
  t.labels.assign(2000, AnchorLabel::kNegative);
  for (int i = 0; i < 300; ++i) t.labels[i * 6] = AnchorLabel::kPositive;

  const auto a = sample_minibatch(t, 42, 256, 0.5);
  const auto b = sample_minibatch(t, 42, 256, 0.5);
  CHECK(a == b);

  const auto c = sample_minibatch(t, 43, 256, 0.5);
  CHECK(a != c);

  // positives first, each segment ascending, no duplicates
  std::size_t split_at = 0;
  while (split_at < a.size() &&
         t.labels[a[split_at]] == AnchorLabel::kPositive)
    ++split_at;
  CHECK(split_at == 128);
  for (std::size_t i = split_at; i < a.size(); ++i)
    REQUIRE(t.labels[a[i]] == AnchorLabel::kNegative);
  CHECK(std::is_sorted(a.begin(), a.begin() + split_at));
  CHECK(std::is_sorted(a.begin() + split_at, a.end()));
  CHECK(std::set<std::int32_t>(a.begin(), a.end()).size() == a.size());
}
