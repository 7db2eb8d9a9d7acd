#pragma once

#include <optional>
#include <vector>

#include "ladr/angle.hpp"
#include "ladr/boxes.hpp"

namespace ladr {

// Which training stream a sample came from. Ds1 carries angle labels,
// Ds2 carries boxes only.
enum class DatasetOrigin { kDs1, kDs2 };

struct GroundTruthObject {
  BoxCorners box;
  std::optional<KeypointPair> keypoints;
  std::optional<RotationAngle> angle;
};

}  // namespace ladr
