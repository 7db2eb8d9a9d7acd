#include "ladr/targets.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ladr {

int AnchorTargets::positive_count() const {
  return static_cast<int>(
      std::count(labels.begin(), labels.end(), AnchorLabel::kPositive));
}

AnchorTargets assign_targets(const std::vector<GroundTruthObject>& gts,
                             const std::vector<Anchor>& anchors,
                             DatasetOrigin origin, double pos_iou,
                             double neg_iou) {
  if (origin == DatasetOrigin::kDs1) {
    for (const auto& gt : gts) {
      if (!gt.angle)
        throw std::invalid_argument("Ds1 ground truth missing angle");
    }
  }

  const std::size_t a = anchors.size();
  const std::size_t g = gts.size();
  AnchorTargets out;
  out.origin = origin;
  out.labels.assign(a, AnchorLabel::kNegative);
  out.matched_gt.assign(a, -1);
  out.box_targets.assign(a, BoxEncoding{});
  out.angle_value.assign(a, 0.0);
  out.angle_direction.assign(a, SpinDirection::kCcw);

  if (g == 0) return out;

  // IoU of every anchor against every ground truth.
  std::vector<double> ious(a * g);
  std::vector<BoxXYWH> gt_boxes(g);
  for (std::size_t j = 0; j < g; ++j) gt_boxes[j] = to_xywh(gts[j].box);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < g; ++j)
      ious[i * g + j] = iou(anchors[i].box, gt_boxes[j]);

  for (std::size_t i = 0; i < a; ++i) {
    double best = -1.0;
    std::int32_t best_j = -1;
    for (std::size_t j = 0; j < g; ++j) {
      if (ious[i * g + j] > best) {
        best = ious[i * g + j];
        best_j = static_cast<std::int32_t>(j);
      }
    }
    if (best >= pos_iou) {
      out.labels[i] = AnchorLabel::kPositive;
      out.matched_gt[i] = best_j;
    } else if (best >= neg_iou) {
      out.labels[i] = AnchorLabel::kIgnored;
    }
  }

  // Force-match: each ground truth claims its best anchor unless that anchor
  // is already positive for another object.
  for (std::size_t j = 0; j < g; ++j) {
    double best = -1.0;
    std::int64_t best_i = -1;
    for (std::size_t i = 0; i < a; ++i) {
      if (ious[i * g + j] > best) {
        best = ious[i * g + j];
        best_i = static_cast<std::int64_t>(i);
      }
    }
    if (best_i < 0 || best <= 0.0) continue;
    const auto i = static_cast<std::size_t>(best_i);
    if (out.labels[i] == AnchorLabel::kPositive && out.matched_gt[i] != -1 &&
        out.matched_gt[i] != static_cast<std::int32_t>(j))
      continue;
    out.labels[i] = AnchorLabel::kPositive;
    out.matched_gt[i] = static_cast<std::int32_t>(j);
  }

  for (std::size_t i = 0; i < a; ++i) {
    if (out.labels[i] != AnchorLabel::kPositive) continue;
    const auto& gt = gts[out.matched_gt[i]];
    out.box_targets[i] = encode_box(to_xywh(gt.box), anchors[i].box);
    if (origin == DatasetOrigin::kDs1) {
      const AngleParts parts = split(*gt.angle);
      out.angle_value[i] = parts.value;
      out.angle_direction[i] = parts.direction;
    }
  }
  return out;
}

std::vector<std::int32_t> sample_minibatch(const AnchorTargets& targets,
                                           std::uint64_t seed,
                                           std::size_t size,
                                           double pos_fraction) {
  std::vector<std::int32_t> pos;
  std::vector<std::int32_t> neg;
  for (std::size_t i = 0; i < targets.labels.size(); ++i) {
    if (targets.labels[i] == AnchorLabel::kPositive)
      pos.push_back(static_cast<std::int32_t>(i));
    else if (targets.labels[i] == AnchorLabel::kNegative)
      neg.push_back(static_cast<std::int32_t>(i));
  }

  std::mt19937_64 rng(seed);
  const auto pos_cap =
      static_cast<std::size_t>(static_cast<double>(size) * pos_fraction);
  if (pos.size() > pos_cap) {
    std::shuffle(pos.begin(), pos.end(), rng);
    pos.resize(pos_cap);
  }
  const std::size_t neg_cap = size - std::min(size, pos.size());
  if (neg.size() > neg_cap) {
    std::shuffle(neg.begin(), neg.end(), rng);
    neg.resize(neg_cap);
  }

  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  pos.insert(pos.end(), neg.begin(), neg.end());
  return pos;
}

}  // namespace ladr
