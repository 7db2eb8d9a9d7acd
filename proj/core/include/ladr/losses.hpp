#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ladr/targets.hpp"

namespace ladr {

// Field order within one raw prediction row (9 values per anchor).
enum RawField : int {
  kTx = 0,
  kTy = 1,
  kTw = 2,
  kTh = 3,
  kObjBg = 4,
  kObjFg = 5,
  kDirCw = 6,
  kDirCcw = 7,
  kAngleValue = 8,
};
inline constexpr int kRawFields = 9;

struct LossWeights {
  double loc = 1.0;
  double obj = 5.0;
  double av = 1.0;
  double ad = 10.0;
  double ds1 = 10.0;   // angle-value weight for angle-labelled data
  double ds2 = 0.0;    // angle-value weight for box-only data
  double gamma = 2.0;  // focal exponent
  double delta = 1.0;  // Huber transition point
  double dir_eps = 0.025;  // |theta| below this has no usable direction
  double pt_floor = 1e-7;
};

struct LossBreakdown {
  double total = 0.0;
  double loc = 0.0;
  double obj = 0.0;
  double av = 0.0;
  double ad = 0.0;
};

inline std::pair<double, double> softmax2(double z0, double z1) {
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m);
  const double e1 = std::exp(z1 - m);
  const double s = e0 + e1;
  return {e0 / s, e1 / s};
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

inline double huber_grad(double r, double delta) {
  if (std::abs(r) <= delta) return r;
  return r > 0.0 ? delta : -delta;
}

inline double focal(double pt, double gamma, double pt_floor) {
  const double p = std::clamp(pt, pt_floor, 1.0);
  return -std::pow(1.0 - p, gamma) * std::log(p);
}

// d focal / d pt; zero where the floor clamp is active.
inline double focal_grad(double pt, double gamma, double pt_floor) {
  if (pt < pt_floor || pt >= 1.0) return 0.0;
  return gamma * std::pow(1.0 - pt, gamma - 1.0) * std::log(pt) -
         std::pow(1.0 - pt, gamma) / pt;
}

// One image's slice of the batch: raw rows (size() == anchors * 9), the
// assigned targets, and the sampled minibatch indices.
template <typename T>
struct LossInput {
  std::span<const T> preds;
  const AnchorTargets* targets = nullptr;
  std::span<const std::int32_t> sampled;
};

// Computes the four loss components pooled over the batch and, when `grads`
// is non-empty, accumulates d(total)/d(preds) into the matching spans
// (callers zero them first). Normalisers: loc/av divide by the number of
// sampled positives across the batch, obj by the number of sampled anchors,
// ad by the number of sampled angle-labelled positives whose |theta| exceeds
// dir_eps. Components are reported unweighted; total applies the weights.
template <typename T>
LossBreakdown detection_loss(std::span<const LossInput<T>> batch,
                             const LossWeights& w,
                             std::span<const std::span<T>> grads = {}) {
  std::size_t n_loc = 0, n_obj = 0, n_ad = 0;
  for (const auto& item : batch) {
    n_obj += item.sampled.size();
    for (const auto i : item.sampled) {
      if (item.targets->labels[i] != AnchorLabel::kPositive) continue;
      ++n_loc;
      if (item.targets->origin == DatasetOrigin::kDs1 &&
          item.targets->angle_value[i] > w.dir_eps)
        ++n_ad;
    }
  }

  LossBreakdown out;
  const bool want_grads = !grads.empty();

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& item = batch[b];
    const AnchorTargets& tg = *item.targets;
    const bool ds1 = tg.origin == DatasetOrigin::kDs1;
    T* g = want_grads ? grads[b].data() : nullptr;

    for (const auto i : item.sampled) {
      const T* row = item.preds.data() + static_cast<std::size_t>(i) * kRawFields;
      T* grow = g ? g + static_cast<std::size_t>(i) * kRawFields : nullptr;
      const bool positive = tg.labels[i] == AnchorLabel::kPositive;

      // Objectness focal term over the two-way softmax.
      {
        const auto [p_bg, p_fg] =
            softmax2(static_cast<double>(row[kObjBg]),
                     static_cast<double>(row[kObjFg]));
        (void)p_bg;
        const double pt = positive ? p_fg : 1.0 - p_fg;
        out.obj += focal(pt, w.gamma, w.pt_floor);
        if (grow && n_obj > 0) {
          const double dpt = focal_grad(pt, w.gamma, w.pt_floor) *
                             (positive ? 1.0 : -1.0);
          const double dz = dpt * p_fg * (1.0 - p_fg) * w.obj /
                            static_cast<double>(n_obj);
          grow[kObjFg] += static_cast<T>(dz);
          grow[kObjBg] += static_cast<T>(-dz);
        }
      }

      if (!positive) continue;

      // Box regression.
      for (int f = kTx; f <= kTh; ++f) {
        const double target = f == kTx   ? tg.box_targets[i].tx
                              : f == kTy ? tg.box_targets[i].ty
                              : f == kTw ? tg.box_targets[i].tw
                                         : tg.box_targets[i].th;
        const double r = target - static_cast<double>(row[f]);
        out.loc += huber(r, w.delta);
        if (grow && n_loc > 0)
          grow[f] += static_cast<T>(-huber_grad(r, w.delta) * w.loc /
                                    static_cast<double>(n_loc));
      }

      // Angle value through a sigmoid; box-only data regularises toward 0.
      {
        const double av = sigmoid(static_cast<double>(row[kAngleValue]));
        const double lambda = ds1 ? w.ds1 : w.ds2;
        const double target = ds1 ? tg.angle_value[i] : 0.0;
        const double diff = av - target;
        out.av += lambda * 0.5 * diff * diff;
        if (grow && n_loc > 0)
          grow[kAngleValue] += static_cast<T>(
              lambda * diff * av * (1.0 - av) * w.av /
              static_cast<double>(n_loc));
      }

      // Spin direction, only where the angle is large enough to define one.
      if (ds1 && tg.angle_value[i] > w.dir_eps) {
        const auto [p_cw, p_ccw] =
            softmax2(static_cast<double>(row[kDirCw]),
                     static_cast<double>(row[kDirCcw]));
        (void)p_cw;
        const bool ccw = tg.angle_direction[i] == SpinDirection::kCcw;
        const double pt = ccw ? p_ccw : 1.0 - p_ccw;
        out.ad += focal(pt, w.gamma, w.pt_floor);
        if (grow && n_ad > 0) {
          const double dpt =
              focal_grad(pt, w.gamma, w.pt_floor) * (ccw ? 1.0 : -1.0);
          const double dz = dpt * p_ccw * (1.0 - p_ccw) * w.ad /
                            static_cast<double>(n_ad);
          grow[kDirCcw] += static_cast<T>(dz);
          grow[kDirCw] += static_cast<T>(-dz);
        }
      }
    }
  }

  out.loc = n_loc > 0 ? out.loc / static_cast<double>(n_loc) : 0.0;
  out.obj = n_obj > 0 ? out.obj / static_cast<double>(n_obj) : 0.0;
  out.av = n_loc > 0 ? out.av / static_cast<double>(n_loc) : 0.0;
  out.ad = n_ad > 0 ? out.ad / static_cast<double>(n_ad) : 0.0;
  out.total = w.loc * out.loc + w.obj * out.obj + w.av * out.av + w.ad * out.ad;
  return out;
}

}  // namespace ladr
