#pragma once

#include <compare>

#include "ladr/errors.hpp"

namespace ladr {

// Signed rotation in half-turns: theta in (-1, 1] stands for theta*180
// degrees, positive = counterclockwise on screen. The open end at -1 means
// a half turn is always written +1.
class RotationAngle {
 public:
  RotationAngle() = default;
  explicit RotationAngle(double theta);

  // Maps any real onto (-1, 1] by shifting in steps of 2 (full turns).
  static RotationAngle wrap(double theta);

  double value() const { return theta_; }
  double degrees() const { return theta_ * 180.0; }

  friend bool operator==(const RotationAngle&, const RotationAngle&) = default;

 private:
  double theta_ = 0.0;
};

enum class SpinDirection { kCcw, kCw };

// (|theta|, sign) form; the two heads regress these separately.
struct AngleParts {
  double value = 0.0;  // in [0, 1]
  SpinDirection direction = SpinDirection::kCcw;
};

struct KeypointPair {
  double left_x = 0.0;
  double left_y = 0.0;
  double right_x = 0.0;
  double right_y = 0.0;
};

// Angle of the left->right keypoint line against the horizontal axis,
// evaluated branch by branch (the vertical cases never form the slope).
// Throws CoincidentKeypoints when the two points coincide.
RotationAngle angle_from_keypoints(const KeypointPair& kp);

// theta = 0 reports CCW; theta = 1 reports CCW.
AngleParts split(RotationAngle theta);

// Inverse of split; (value=1, CW) closes the range as +1.
RotationAngle merge(const AngleParts& parts);

// Wraparound distance in half-turns, in [0, 1].
double angle_distance(RotationAngle a, RotationAngle b);

// Label transforms matching the image-space augmentations.
RotationAngle rot90_angle(RotationAngle theta);
RotationAngle hflip_angle(RotationAngle theta);
RotationAngle vflip_angle(RotationAngle theta);

}  // namespace ladr
