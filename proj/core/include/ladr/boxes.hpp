#pragma once

#include <cstdint>
#include <vector>

#include "ladr/angle.hpp"
#include "ladr/errors.hpp"

namespace ladr {

// Center-form axis-aligned box in pixels.
struct BoxXYWH {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

// Corner-form box: xmin/ymin/xmax/ymax in pixels.
struct BoxCorners {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;
};

BoxXYWH to_xywh(const BoxCorners& c);
BoxCorners to_corners(const BoxXYWH& b);

double box_area(const BoxXYWH& b);

// Intersection over union, in [0, 1].
double iou(const BoxXYWH& a, const BoxXYWH& b);

// Dimensionless regression targets relating a box to an anchor box.
struct BoxEncoding {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;
};

// Center offsets scaled by 10, log size ratios scaled by 5.
BoxEncoding encode_box(const BoxXYWH& gt, const BoxXYWH& anchor);

// Inverse of encode_box. tw/th are clamped to +-log_clamp before exp so an
// untrained head cannot overflow.
BoxXYWH decode_box(const BoxEncoding& t, const BoxXYWH& anchor, double log_clamp = 10.0);

struct Detection {
  BoxXYWH box;
  double score = 0.0;
  RotationAngle angle;
};

// Greedy NMS on axis-aligned boxes. Output sorted by descending score,
// ties broken by input index (lower kept first).
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_threshold,
                           std::size_t max_out);

}  // namespace ladr
