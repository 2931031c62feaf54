#pragma once

#include <Eigen/Core>

namespace facemotion {

// Exponential map from an axis-angle vector to a rotation matrix (Rodrigues).
// A zero vector maps to the identity exactly; small angles use the Taylor
// expansion of the sin/cos coefficients.
Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& axis_angle);

}  // namespace facemotion
