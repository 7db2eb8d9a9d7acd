#pragma once

#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "ladr/anchors.hpp"
#include "ladr/boxes.hpp"
#include "ladr/losses.hpp"
#include "ladr/network.hpp"

namespace ladr {

// Decodes one image's raw rows (layout as produced by Network::forward,
// matching `anchors` order) into scored, NMS-filtered detections sorted by
// descending score. Objectness comes from the two-way softmax, the angle
// magnitude from a sigmoid, and the spin direction from the larger direction
// logit (tie reads counterclockwise).
template <typename T>
std::vector<Detection> decode_predictions(std::span<const T> raw,
                                          const std::vector<Anchor>& anchors,
                                          double score_thresh, double nms_iou,
                                          std::size_t max_out) {
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const T* row = raw.data() + i * kRawFields;
    const double p_fg = softmax2(static_cast<double>(row[kObjBg]),
                                 static_cast<double>(row[kObjFg])).second;
    if (p_fg < score_thresh) continue;
    Detection d;
    d.box = decode_box({static_cast<double>(row[kTx]),
                        static_cast<double>(row[kTy]),
                        static_cast<double>(row[kTw]),
                        static_cast<double>(row[kTh])},
                       anchors[i].box);
    d.score = p_fg;
    const double value = sigmoid(static_cast<double>(row[kAngleValue]));
    const SpinDirection dir = static_cast<double>(row[kDirCcw]) >=
                                      static_cast<double>(row[kDirCw])
                                  ? SpinDirection::kCcw
                                  : SpinDirection::kCw;
    d.angle = merge({value, dir});
    dets.push_back(d);
  }
  return nms(dets, nms_iou, max_out);
}

// Runs the detector on an arbitrary-size image (CV_32F in [0,1], channel
// count matching the network): letterboxes to the input size, decodes, and
// maps boxes back to source coordinates.
std::vector<Detection> run_detector(Network<float>& net, const cv::Mat& image,
                                    double score_thresh = 0.5,
                                    double nms_iou = 0.5,
                                    std::size_t max_out = 100);

// Cuts an upright, square face chip: rotates the image by -theta about the
// box center (bilinear, gray fill), crops a square of side
// max(w, h) * (1 + 2 * margin) around the center, and scales to out_size.
// Throws DegenerateBox when the detection box misses the image entirely.
cv::Mat normalize_face(const cv::Mat& image, const Detection& det,
                       int out_size = 224, double margin = 0.1);

// Overlay for inspection: box, score text, and an orientation ray from the
// box center pointing where the face's "up" ended up. Returns an 8-bit BGR
// copy.
cv::Mat render_detections(const cv::Mat& image,
                          const std::vector<Detection>& dets);

std::string detections_to_json(const std::string& image_name,
                               const std::vector<Detection>& dets);

}  // namespace ladr
