#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ladr/boxes.hpp"
#include "ladr/ground_truth.hpp"

namespace ladr {

// Detections and ground truth for one evaluated image.
struct ImageEval {
  std::vector<Detection> dets;
  std::vector<GroundTruthObject> gts;
};

struct MatchOutcome {
  std::vector<int> det_to_gt;  // per detection, matched GT index or -1
  int tp = 0, fp = 0, fn = 0;
};

// Greedy per-image matching: detections in descending score order claim the
// highest-IoU unclaimed ground truth at IoU >= iou_thresh; IoU ties go to the
// lowest GT index.
MatchOutcome match_detections(const std::vector<Detection>& dets,
                              const std::vector<GroundTruthObject>& gts,
                              double iou_thresh = 0.5);

// All-point interpolated AP (area under the precision envelope). `scored`
// holds (score, is_tp) for every detection in the dataset; total_gt counts
// all ground-truth objects. Returns 0 when total_gt is 0. Optionally emits
// the raw PR points.
double average_precision(
    std::vector<std::pair<double, bool>> scored, int total_gt,
    std::vector<std::pair<double, double>>* pr_curve = nullptr);

// Mean wraparound distance in degrees over matched pairs; absent when there
// are none.
std::optional<double> aad_degrees(
    const std::vector<std::pair<RotationAngle, RotationAngle>>& pairs);

struct EvalReport {
  int tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double ap = 0.0;
  std::optional<double> aad;                          // degrees
  std::vector<std::pair<double, double>> pr_curve;    // (recall, precision)
  int images = 0;
};

// Full evaluation: AP/PR over every detection scoring at least score_floor,
// counts and AAD at the operating threshold. GT angles, where present, pair
// with the matched detection's angle for AAD.
EvalReport evaluate(const std::vector<ImageEval>& images,
                    double iou_thresh = 0.5, double score_floor = 0.05,
                    double operating_score = 0.5);

std::string report_to_json(const EvalReport& r);
std::string report_to_text(const EvalReport& r);
std::string pr_curve_to_csv(const EvalReport& r);

}  // namespace ladr
