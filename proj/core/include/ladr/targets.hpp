#pragma once

#include <cstdint>
#include <vector>

#include "ladr/anchors.hpp"
#include "ladr/ground_truth.hpp"

namespace ladr {

enum class AnchorLabel : std::uint8_t { kNegative, kPositive, kIgnored };

// Per-anchor training targets for one image. Regression and angle entries
// are only meaningful where the label is positive (and, for the angle pair,
// where the origin is Ds1).
struct AnchorTargets {
  DatasetOrigin origin = DatasetOrigin::kDs1;
  std::vector<AnchorLabel> labels;
  std::vector<std::int32_t> matched_gt;  // -1 where unmatched
  std::vector<BoxEncoding> box_targets;
  std::vector<double> angle_value;           // |theta|, in [0, 1]
  std::vector<SpinDirection> angle_direction;

  std::size_t size() const { return labels.size(); }
  int positive_count() const;
};

// IoU-based assignment: anchors at IoU >= pos_iou against their best ground
// truth become positive, those strictly below neg_iou negative, the rest
// ignored. Each ground truth additionally claims its single best-IoU anchor
// (processed in ground-truth order; an anchor already claimed is skipped)
// so no object goes unmatched. Ds1 ground truths must carry angles.
AnchorTargets assign_targets(const std::vector<GroundTruthObject>& gts,
                             const std::vector<Anchor>& anchors,
                             DatasetOrigin origin, double pos_iou = 0.5,
                             double neg_iou = 0.4);

// Draws the objectness minibatch: up to size*pos_fraction positives plus
// negatives to fill the remainder, uniformly without replacement. Returns
// ascending anchor indices, positives first. Deterministic in the seed.
std::vector<std::int32_t> sample_minibatch(const AnchorTargets& targets,
                                           std::uint64_t seed,
                                           std::size_t size = 256,
                                           double pos_fraction = 0.5);

}  // namespace ladr
