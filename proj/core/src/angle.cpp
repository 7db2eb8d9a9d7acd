#include "ladr/angle.hpp"

#include <cmath>

namespace ladr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RotationAngle::RotationAngle(double theta) : theta_(theta) {
  if (!(theta > -1.0 && theta <= 1.0)) {
    throw std::invalid_argument("rotation angle outside (-1, 1]");
  }
}

RotationAngle RotationAngle::wrap(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("rotation angle must be finite");
  }
  while (theta > 1.0) theta -= 2.0;
  while (theta <= -1.0) theta += 2.0;
  return RotationAngle(theta);
}

RotationAngle angle_from_keypoints(const KeypointPair& kp) {
  const double dx = kp.right_x - kp.left_x;
  const double rise = kp.left_y - kp.right_y;  // positive when the right point sits higher
  if (dx == 0.0 && rise == 0.0) {
    throw CoincidentKeypoints("keypoints coincide");
  }
  double theta;
  if (dx > 0.0) {
    theta = std::atan(rise / dx) / kPi;
  } else if (dx == 0.0) {
    theta = rise > 0.0 ? 0.5 : -0.5;
  } else if (rise >= 0.0) {
    theta = 1.0 - std::atan(std::abs(rise / dx)) / kPi;
  } else {
    theta = std::atan(std::abs(rise / dx)) / kPi - 1.0;
  }
  return RotationAngle::wrap(theta);
}

AngleParts split(RotationAngle theta) {
  const double t = theta.value();
  return AngleParts{std::abs(t), t >= 0.0 ? SpinDirection::kCcw : SpinDirection::kCw};
}

RotationAngle merge(const AngleParts& parts) {
  if (!(parts.value >= 0.0 && parts.value <= 1.0)) {
    throw std::invalid_argument("angle value outside [0, 1]");
  }
  if (parts.direction == SpinDirection::kCcw) {
    return RotationAngle(parts.value);
  }
  if (parts.value == 1.0) {
    return RotationAngle(1.0);  // -1 is out of range and names the same rotation
  }
  return RotationAngle(-parts.value);
}

double angle_distance(RotationAngle a, RotationAngle b) {
  const double d = std::abs(a.value() - b.value());
  return d < 1.0 ? d : 2.0 - d;
}

RotationAngle rot90_angle(RotationAngle theta) {
  const double t = theta.value();
  return RotationAngle::wrap(t <= 0.5 ? t + 0.5 : t - 1.5);
}

RotationAngle hflip_angle(RotationAngle theta) {
  return RotationAngle::wrap(-theta.value());
}

RotationAngle vflip_angle(RotationAngle theta) {
  const double t = theta.value();
  return RotationAngle::wrap(t < 0.0 ? -t - 1.0 : 1.0 - t);
}

}  // namespace ladr
