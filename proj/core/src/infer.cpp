#include "ladr/infer.hpp"

#include <cmath>

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include "ladr/dataset.hpp"
#include "ladr/errors.hpp"

namespace ladr {

std::vector<Detection> run_detector(Network<float>& net, const cv::Mat& image,
                                    double score_thresh, double nms_iou,
                                    std::size_t max_out) {
  const NetworkConfig& cfg = net.config();
  Sample s;
  s.image = image;
  const Sample boxed = letterbox_sample(s, cfg.input_size);
  const Tensor<float> input = batch_to_tensor({boxed});
  const auto rows = net.forward(input, /*train=*/false);
  const std::vector<Anchor> anchors = generate_anchors(cfg.anchors);
  std::vector<Detection> dets = decode_predictions(
      std::span<const float>(rows[0]), anchors, score_thresh, nms_iou, max_out);

  // Undo the letterbox: the same aspect-preserving fit used by
  // letterbox_sample, inverted.
  const double scale = std::min(
      static_cast<double>(cfg.input_size) / image.cols,
      static_cast<double>(cfg.input_size) / image.rows);
  const double dx = (cfg.input_size - image.cols * scale) / 2.0;
  const double dy = (cfg.input_size - image.rows * scale) / 2.0;
  for (auto& d : dets) {
    d.box.x = (d.box.x - dx) / scale;
    d.box.y = (d.box.y - dy) / scale;
    d.box.w /= scale;
    d.box.h /= scale;
  }
  return dets;
}

cv::Mat normalize_face(const cv::Mat& image, const Detection& det,
                       int out_size, double margin) {
  const BoxCorners c = to_corners(det.box);
  const double ix0 = std::max(c.xmin, 0.0);
  const double iy0 = std::max(c.ymin, 0.0);
  const double ix1 = std::min(c.xmax, static_cast<double>(image.cols));
  const double iy1 = std::min(c.ymax, static_cast<double>(image.rows));
  if (ix0 >= ix1 || iy0 >= iy1)
    throw DegenerateBox("detection box misses the image");

  const cv::Scalar gray = cv::Scalar::all(0.5);
  cv::Mat rotated;
  cv::Mat m = cv::getRotationMatrix2D(cv::Point2f(static_cast<float>(det.box.x),
                                                  static_cast<float>(det.box.y)),
                                      -det.angle.degrees(), 1.0);
  cv::warpAffine(image, rotated, m, image.size(), cv::INTER_LINEAR,
                 cv::BORDER_CONSTANT, gray);

  const double side = std::max(det.box.w, det.box.h) * (1.0 + 2.0 * margin);
  const int iside = std::max(1, static_cast<int>(std::lround(side)));
  cv::Mat chip(iside, iside, image.type(), gray);
  const int x0 = static_cast<int>(std::lround(det.box.x - side / 2.0));
  const int y0 = static_cast<int>(std::lround(det.box.y - side / 2.0));
  const int sx0 = std::max(x0, 0), sy0 = std::max(y0, 0);
  const int sx1 = std::min(x0 + iside, rotated.cols);
  const int sy1 = std::min(y0 + iside, rotated.rows);
  if (sx1 > sx0 && sy1 > sy0)
    rotated(cv::Rect(sx0, sy0, sx1 - sx0, sy1 - sy0))
        .copyTo(chip(cv::Rect(sx0 - x0, sy0 - y0, sx1 - sx0, sy1 - sy0)));

  cv::Mat out;
  cv::resize(chip, out, cv::Size(out_size, out_size), 0, 0, cv::INTER_LINEAR);
  return out;
}

cv::Mat render_detections(const cv::Mat& image,
                          const std::vector<Detection>& dets) {
  cv::Mat img8, bgr;
  image.convertTo(img8, CV_8U, 255.0);
  if (img8.channels() == 1)
    cv::cvtColor(img8, bgr, cv::COLOR_GRAY2BGR);
  else
    bgr = img8.clone();
  const cv::Scalar box_color(0, 220, 0);
  const cv::Scalar ray_color(0, 0, 255);
  for (const auto& d : dets) {
    const BoxCorners c = to_corners(d.box);
    cv::rectangle(bgr,
                  cv::Point(static_cast<int>(std::lround(c.xmin)),
                            static_cast<int>(std::lround(c.ymin))),
                  cv::Point(static_cast<int>(std::lround(c.xmax)),
                            static_cast<int>(std::lround(c.ymax))),
                  box_color, 1);
    // Where the glyph's "up" points after rotating by theta.
    const double alpha = d.angle.value() * 3.14159265358979323846;
    const double len = 0.5 * std::max(d.box.w, d.box.h);
    const cv::Point tip(
        static_cast<int>(std::lround(d.box.x - len * std::sin(alpha))),
        static_cast<int>(std::lround(d.box.y - len * std::cos(alpha))));
    cv::line(bgr,
             cv::Point(static_cast<int>(std::lround(d.box.x)),
                       static_cast<int>(std::lround(d.box.y))),
             tip, ray_color, 1);
    char label[32];
    std::snprintf(label, sizeof(label), "%.2f", d.score);
    cv::putText(bgr, label,
                cv::Point(static_cast<int>(std::lround(c.xmin)),
                          std::max(10, static_cast<int>(std::lround(c.ymin)) - 2)),
                cv::FONT_HERSHEY_SIMPLEX, 0.3, box_color, 1);
  }
  return bgr;
}

std::string detections_to_json(const std::string& image_name,
                               const std::vector<Detection>& dets) {
  nlohmann::json j;
  j["image"] = image_name;
  j["detections"] = nlohmann::json::array();
  for (const auto& d : dets) {
    nlohmann::json jd;
    jd["box_xywh"] = {d.box.x, d.box.y, d.box.w, d.box.h};
    jd["score"] = d.score;
    jd["angle"] = d.angle.value();
    jd["angle_degrees"] = d.angle.degrees();
    j["detections"].push_back(std::move(jd));
  }
  return j.dump(2);
}

}  // namespace ladr
