#include "ladr/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ladr {

BoxXYWH to_xywh(const BoxCorners& c) {
  return BoxXYWH{(c.xmin + c.xmax) / 2.0, (c.ymin + c.ymax) / 2.0, c.xmax - c.xmin,
                 c.ymax - c.ymin};
}

BoxCorners to_corners(const BoxXYWH& b) {
  return BoxCorners{b.x - b.w / 2.0, b.y - b.h / 2.0, b.x + b.w / 2.0, b.y + b.h / 2.0};
}

double box_area(const BoxXYWH& b) { return b.w * b.h; }

double iou(const BoxXYWH& a, const BoxXYWH& b) {
  const BoxCorners ca = to_corners(a);
  const BoxCorners cb = to_corners(b);
  const double iw = std::max(0.0, std::min(ca.xmax, cb.xmax) - std::max(ca.xmin, cb.xmin));
  const double ih = std::max(0.0, std::min(ca.ymax, cb.ymax) - std::max(ca.ymin, cb.ymin));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BoxEncoding encode_box(const BoxXYWH& gt, const BoxXYWH& anchor) {
  return BoxEncoding{10.0 * (gt.x - anchor.x) / anchor.w, 10.0 * (gt.y - anchor.y) / anchor.h,
                     5.0 * std::log(gt.w / anchor.w), 5.0 * std::log(gt.h / anchor.h)};
}

BoxXYWH decode_box(const BoxEncoding& t, const BoxXYWH& anchor, double log_clamp) {
  const double tw = std::clamp(t.tw, -log_clamp, log_clamp);
  const double th = std::clamp(t.th, -log_clamp, log_clamp);
  return BoxXYWH{(t.tx / 10.0) * anchor.w + anchor.x, (t.ty / 10.0) * anchor.h + anchor.y,
                 std::exp(tw / 5.0) * anchor.w, std::exp(th / 5.0) * anchor.h};
}

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold,
                           std::size_t max_out) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    if (kept.size() >= max_out) break;
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (iou(dets[idx].box, k.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(dets[idx]);
  }
  return kept;
}

}  // namespace ladr
