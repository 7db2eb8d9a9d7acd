#include "ladr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace ladr {

MatchOutcome match_detections(const std::vector<Detection>& dets,
                              const std::vector<GroundTruthObject>& gts,
                              double iou_thresh) {
  MatchOutcome out;
  out.det_to_gt.assign(dets.size(), -1);
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  std::vector<bool> claimed(gts.size(), false);
  for (const std::size_t di : order) {
    double best = 0.0;
    int best_g = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (claimed[g]) continue;
      const double v = iou(dets[di].box, to_xywh(gts[g].box));
      if (v >= iou_thresh && v > best) {
        best = v;
        best_g = static_cast<int>(g);
      }
    }
    if (best_g >= 0) {
      claimed[best_g] = true;
      out.det_to_gt[di] = best_g;
      ++out.tp;
    } else {
      ++out.fp;
    }
  }
  out.fn = static_cast<int>(gts.size()) - out.tp;
  return out;
}

double average_precision(std::vector<std::pair<double, bool>> scored,
                         int total_gt,
                         std::vector<std::pair<double, double>>* pr_curve) {
  if (pr_curve) pr_curve->clear();
  if (total_gt <= 0 || scored.empty()) return 0.0;
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t n = scored.size();
  std::vector<double> recall(n), precision(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (scored[k].second) ++tp;
    recall[k] = static_cast<double>(tp) / total_gt;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    if (pr_curve) pr_curve->emplace_back(recall[k], precision[k]);
  }
  // Precision envelope: best precision at this recall or beyond.
  std::vector<double> env(n);
  double run = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    run = std::max(run, precision[k]);
    env[k] = run;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * env[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

std::optional<double> aad_degrees(
    const std::vector<std::pair<RotationAngle, RotationAngle>>& pairs) {
  if (pairs.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [gt, det] : pairs) sum += angle_distance(gt, det);
  return sum / static_cast<double>(pairs.size()) * 180.0;
}

EvalReport evaluate(const std::vector<ImageEval>& images, double iou_thresh,
                    double score_floor, double operating_score) {
  EvalReport r;
  r.images = static_cast<int>(images.size());

  // Ranked pass for AP over everything above the floor.
  std::vector<std::pair<double, bool>> scored;
  int total_gt = 0;
  for (const auto& img : images) {
    std::vector<Detection> kept;
    for (const auto& d : img.dets)
      if (d.score >= score_floor) kept.push_back(d);
    const MatchOutcome m = match_detections(kept, img.gts, iou_thresh);
    for (std::size_t i = 0; i < kept.size(); ++i)
      scored.emplace_back(kept[i].score, m.det_to_gt[i] >= 0);
    total_gt += static_cast<int>(img.gts.size());
  }
  r.ap = average_precision(std::move(scored), total_gt, &r.pr_curve);

  // Operating-point pass for counts and AAD.
  std::vector<std::pair<RotationAngle, RotationAngle>> angle_pairs;
  for (const auto& img : images) {
    std::vector<Detection> kept;
    for (const auto& d : img.dets)
      if (d.score >= operating_score) kept.push_back(d);
    const MatchOutcome m = match_detections(kept, img.gts, iou_thresh);
    r.tp += m.tp;
    r.fp += m.fp;
    r.fn += m.fn;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const int g = m.det_to_gt[i];
      if (g >= 0 && img.gts[g].angle)
        angle_pairs.emplace_back(*img.gts[g].angle, kept[i].angle);
    }
  }
  r.precision = r.tp + r.fp > 0
                    ? static_cast<double>(r.tp) / (r.tp + r.fp)
                    : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.aad = aad_degrees(angle_pairs);
  return r;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["images"] = r.images;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["ap"] = r.ap;
  if (r.aad)
    j["aad_degrees"] = *r.aad;
  else
    j["aad_degrees"] = nullptr;
  return j.dump(2);
}

std::string report_to_text(const EvalReport& r) {
  std::ostringstream os;
  os << "images    " << r.images << "\n"
     << "tp/fp/fn  " << r.tp << "/" << r.fp << "/" << r.fn << "\n"
     << "precision " << r.precision << "\n"
     << "recall    " << r.recall << "\n"
     << "f1        " << r.f1 << "\n"
     << "ap        " << r.ap << "\n"
     << "aad_deg   ";
  if (r.aad)
    os << *r.aad;
  else
    os << "n/a";
  os << "\n";
  return os.str();
}

std::string pr_curve_to_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "recall,precision\n";
  for (const auto& [rec, prec] : r.pr_curve) os << rec << "," << prec << "\n";
  return os.str();
}

}  // namespace ladr
