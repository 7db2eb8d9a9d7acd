#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ladr/losses.hpp"

using namespace ladr;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// One-image fixture with hand-set labels; anchors exist only as row indices.
struct Case {
  std::vector<double> preds;
  AnchorTargets targets;
  std::vector<std::int32_t> sampled;

  explicit Case(int n, DatasetOrigin origin = DatasetOrigin::kDs1) {
    preds.assign(static_cast<std::size_t>(n) * kRawFields, 0.0);
    targets.origin = origin;
    targets.labels.assign(n, AnchorLabel::kNegative);
    targets.matched_gt.assign(n, -1);
    targets.box_targets.assign(n, BoxEncoding{});
    targets.angle_value.assign(n, 0.0);
    targets.angle_direction.assign(n, SpinDirection::kCcw);
  }

  LossInput<double> input() const {
    return {std::span<const double>(preds), &targets,
            std::span<const std::int32_t>(sampled)};
  }
};

LossBreakdown run(const std::vector<Case>& cases, const LossWeights& w,
                  std::vector<std::vector<double>>* grads = nullptr) {
  std::vector<LossInput<double>> items;
  for (const auto& c : cases) items.push_back(c.input());
  if (!grads) return detection_loss<double>(items, w);
  grads->assign(cases.size(), {});
  std::vector<std::span<double>> spans;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    (*grads)[i].assign(cases[i].preds.size(), 0.0);
    spans.emplace_back((*grads)[i]);
  }
  return detection_loss<double>(items, w, spans);
}

}  // namespace

TEST_CASE("scalar pieces: softmax, sigmoid, huber, focal") {
  auto [p0, p1] = softmax2(0.0, 0.0);
  CHECK(p0 == 0.5);
  CHECK(p1 == 0.5);
  auto [q0, q1] = softmax2(std::log(3.0), 0.0);
  CHECK(q0 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(q1 == doctest::Approx(0.25).epsilon(1e-12));
  auto [r0, r1] = softmax2(1000.0, 0.0);
  CHECK(std::isfinite(r0));
  CHECK(r0 == doctest::Approx(1.0));
  CHECK(r1 == doctest::Approx(0.0));
  auto [s0, s1] = softmax2(-745.0, 745.0);
  CHECK(std::isfinite(s0));
  CHECK(s0 + s1 == doctest::Approx(1.0));

  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(sigmoid(-std::log(3.0)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sigmoid(-1000.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(sigmoid(-1000.0)));

  CHECK(huber(0.5, 1.0) == 0.125);
  CHECK(huber(2.0, 1.0) == 1.5);
  CHECK(huber(-2.0, 1.0) == 1.5);
  CHECK(huber(1.0, 1.0) == 0.5);  // continuous at the knee
  CHECK(huber_grad(0.5, 1.0) == 0.5);
  CHECK(huber_grad(2.0, 1.0) == 1.0);
  CHECK(huber_grad(-2.0, 1.0) == -1.0);

  CHECK(focal(1.0, 2.0, 1e-7) == 0.0);
  CHECK(focal(0.5, 2.0, 1e-7) ==
        doctest::Approx(-0.25 * std::log(0.5)).epsilon(1e-12));
  CHECK(focal(0.5, 2.0, 1e-7) == doctest::Approx(0.17329).epsilon(1e-4));
  CHECK(focal(0.1, 2.0, 1e-7) ==
        doctest::Approx(-0.81 * std::log(0.1)).epsilon(1e-12));
  CHECK(focal(0.1, 2.0, 1e-7) == doctest::Approx(1.86509).epsilon(1e-4));
  CHECK(std::isfinite(focal(0.0, 2.0, 1e-7)));  // floor guards the log
}

TEST_CASE("focal gradient matches finite differences") {
  const double h = 1e-7;
  for (double pt : {0.05, 0.3, 0.5, 0.75, 0.93}) {
    const double fd =
        (focal(pt + h, 2.0, 1e-7) - focal(pt - h, 2.0, 1e-7)) / (2.0 * h);
    CHECK(focal_grad(pt, 2.0, 1e-7) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("detection loss: single-anchor hand case") {
  Case c(1);
  c.targets.labels[0] = AnchorLabel::kPositive;
  c.targets.angle_value[0] = 0.5;
  c.targets.angle_direction[0] = SpinDirection::kCcw;
  c.sampled = {0};
  c.preds[kAngleValue] = logit(0.3);
  // all other logits zero: p_fg = 0.5, p_ccw = 0.5, box residuals 0

  const LossWeights w;
  const LossBreakdown out = run({c}, w);
  const double fl_half = -0.25 * std::log(0.5);
  CHECK(out.loc == 0.0);
  CHECK(out.obj == doctest::Approx(fl_half).epsilon(1e-9));
  CHECK(out.av == doctest::Approx(0.2).epsilon(1e-6));  // 10 * 0.5 * 0.04
  CHECK(out.ad == doctest::Approx(fl_half).epsilon(1e-9));
  CHECK(out.total ==
        doctest::Approx(5.0 * fl_half + 0.2 + 10.0 * fl_half).epsilon(1e-9));
  CHECK(out.total == w.loc * out.loc + w.obj * out.obj + w.av * out.av +
                         w.ad * out.ad);

  LossWeights zeroed;
  zeroed.loc = zeroed.obj = zeroed.av = zeroed.ad = 0.0;
  CHECK(run({c}, zeroed).total == 0.0);
}

TEST_CASE("detection loss: huber residual cases") {
  Case c(1);
  c.targets.labels[0] = AnchorLabel::kPositive;
  c.targets.angle_value[0] = 0.5;
  c.sampled = {0};
  c.preds[kObjFg] = 40.0;   // objectness solved
  c.preds[kDirCcw] = 40.0;  // direction solved
  c.preds[kAngleValue] = logit(0.5);

  LossWeights w;
  c.preds[kTx] = -0.5;  // residual target(0) - pred = +0.5
  LossBreakdown out = run({c}, w);
  CHECK(out.loc == doctest::Approx(0.125).epsilon(1e-12));

  c.preds[kTx] = -2.0;
  out = run({c}, w);
  CHECK(out.loc == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(out.obj < 1e-12);
  CHECK(out.ad < 1e-12);
  CHECK(out.av < 1e-9);
}

TEST_CASE("detection loss: perfect prediction scores zero") {
  Case c(2);
  c.targets.labels[0] = AnchorLabel::kPositive;
  c.targets.angle_value[0] = 0.75;
  c.targets.angle_direction[0] = SpinDirection::kCw;
  c.sampled = {0, 1};
  double* row = c.preds.data();
  row[kObjFg] = 500.0;
  row[kDirCw] = 500.0;
  row[kAngleValue] = logit(0.75);
  double* neg = c.preds.data() + kRawFields;
  neg[kObjBg] = 500.0;

  const LossBreakdown out = run({c}, LossWeights{});
  CHECK(out.loc == 0.0);
  CHECK(out.obj == 0.0);
  CHECK(out.av == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out.ad == 0.0);
  CHECK(out.total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("detection loss: ds2 angle regularizer example") {
  Case c(1, DatasetOrigin::kDs2);
  c.targets.labels[0] = AnchorLabel::kPositive;
  c.sampled = {0};
  c.preds[kAngleValue] = logit(0.4);

  LossWeights w;
  w.ds2 = 1.0;
  const LossBreakdown out = run({c}, w);
  CHECK(out.av == doctest::Approx(0.08).epsilon(1e-9));  // 0.5 * 0.16
  CHECK(out.ad == 0.0);  // box-only data has no direction targets
}

TEST_CASE("detection loss: normalizers pool across the batch") {
  Case a(1);  // one positive, p_fg = 0.5
  a.targets.labels[0] = AnchorLabel::kPositive;
  a.targets.angle_value[0] = 0.5;
  a.sampled = {0};
  a.preds[kAngleValue] = logit(0.5);
  a.preds[kDirCcw] = 60.0;

  Case b(1, DatasetOrigin::kDs2);  // one negative, p_fg = 0.75
  b.sampled = {0};
  b.preds[kObjFg] = std::log(3.0);

  const LossBreakdown out = run({a, b}, LossWeights{});
  const double fl_a = -0.25 * std::log(0.5);                  // pt = 0.5
  const double fl_b = -0.5625 * std::log(0.25);               // pt = 0.25
  CHECK(out.obj == doctest::Approx((fl_a + fl_b) / 2.0).epsilon(1e-12));
  CHECK(out.loc == 0.0);  // the single positive predicts its targets
}

// The two exclusion rules must be exact: no epsilon, no drift.
TEST_CASE("detection loss: direction and ds2 angle masking are exact") {
  Case ds1(4);
  ds1.targets.labels[0] = AnchorLabel::kPositive;
  ds1.targets.angle_value[0] = 0.6;  // in the direction set
  ds1.targets.angle_direction[0] = SpinDirection::kCw;
  ds1.targets.labels[1] = AnchorLabel::kPositive;
  ds1.targets.angle_value[1] = 0.01;  // below dir_eps: no direction term
  ds1.targets.labels[2] = AnchorLabel::kIgnored;
  ds1.sampled = {0, 1, 3};

  Case ds2(3, DatasetOrigin::kDs2);
  ds2.targets.labels[0] = AnchorLabel::kPositive;
  ds2.targets.labels[1] = AnchorLabel::kPositive;
  ds2.sampled = {0, 1};  // anchor 2 stays unsampled

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (auto& v : ds1.preds) v = u(rng);
  for (auto& v : ds2.preds) v = u(rng);

  const LossWeights w;  // ds2 weight 0 by default
  std::vector<std::vector<double>> grads;
  const LossBreakdown base = run({ds1, ds2}, w, &grads);

  std::vector<Case> poked = {ds1, ds2};
  // direction logits of the below-threshold positive
  poked[0].preds[1 * kRawFields + kDirCw] += 3.7;
  poked[0].preds[1 * kRawFields + kDirCcw] -= 2.1;
  // angle-value logits of box-only positives (lambda_ds2 = 0)
  poked[1].preds[0 * kRawFields + kAngleValue] += 2.9;
  poked[1].preds[1 * kRawFields + kAngleValue] -= 4.2;
  // direction logits of box-only positives
  poked[1].preds[0 * kRawFields + kDirCw] += 1.3;
  // the ignored anchor and the unsampled anchor contribute nothing at all
  for (int f = 0; f < kRawFields; ++f) {
    poked[0].preds[2 * kRawFields + f] += 0.77;
    poked[1].preds[2 * kRawFields + f] = 0.0;
  }
  // box fields of a sampled negative
  poked[0].preds[3 * kRawFields + kTx] += 5.0;
  poked[0].preds[3 * kRawFields + kTw] -= 5.0;

  const LossBreakdown after = run(poked, w);
  CHECK(after.loc == base.loc);
  CHECK(after.obj == base.obj);
  CHECK(after.av == base.av);
  CHECK(after.ad == base.ad);
  CHECK(after.total == base.total);

  // and the analytic gradient is exactly zero there
  CHECK(grads[0][1 * kRawFields + kDirCw] == 0.0);
  CHECK(grads[0][1 * kRawFields + kDirCcw] == 0.0);
  CHECK(grads[1][0 * kRawFields + kAngleValue] == 0.0);
  CHECK(grads[1][1 * kRawFields + kAngleValue] == 0.0);
  CHECK(grads[1][0 * kRawFields + kDirCw] == 0.0);
  for (int f = 0; f < kRawFields; ++f) {
    CHECK(grads[0][2 * kRawFields + f] == 0.0);
    CHECK(grads[1][2 * kRawFields + f] == 0.0);
  }
  CHECK(grads[0][3 * kRawFields + kTx] == 0.0);
}

TEST_CASE("detection loss: analytic gradient matches finite differences") {
  // Mixed batch, every raw entry probed. Targets stay inside the Huber
  // quadratic zone so the objective is smooth at the probe points.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Case> cases;
  cases.emplace_back(12, DatasetOrigin::kDs1);
  cases.emplace_back(12, DatasetOrigin::kDs2);
  for (auto& c : cases) {
    for (int i = 0; i < 4; ++i) {
      c.targets.labels[i] = AnchorLabel::kPositive;
      c.targets.box_targets[i] = {u(rng), u(rng), u(rng), u(rng)};
      c.targets.angle_value[i] = i == 1 ? 0.012 : unit(rng) * 0.8 + 0.1;
      c.targets.angle_direction[i] =
          i % 2 ? SpinDirection::kCw : SpinDirection::kCcw;
    }
    c.targets.labels[4] = AnchorLabel::kIgnored;
    c.sampled = {0, 1, 2, 3, 5, 6, 7};
    for (auto& v : c.preds) v = u(rng);
  }

  LossWeights w;
  w.ds2 = 0.7;  // exercise the box-only angle path too

  std::vector<std::vector<double>> grads;
  run(cases, w, &grads);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    for (std::size_t j = 0; j < cases[ci].preds.size(); ++j) {
      std::vector<Case> up = cases, down = cases;
      up[ci].preds[j] += h;
      down[ci].preds[j] -= h;
      const double fd = (run(up, w).total - run(down, w).total) / (2.0 * h);
      const double err = std::abs(fd - grads[ci][j]) /
                         std::max({std::abs(fd), std::abs(grads[ci][j]), 1.0});
      worst = std::max(worst, err);
    }
  }
  CHECK(worst < 1e-6);
}
