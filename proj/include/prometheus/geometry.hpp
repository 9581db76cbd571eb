// Copyright 2026 The Prometheus Teleoperation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>

#include <Eigen/Geometry>

namespace prometheus {

/// Six joint angles in radians.
using JointVector = std::array<double, 6>;

/// Tool or hand pose: position in meters, orientation as a unit quaternion.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  static Pose from_isometry(const Eigen::Isometry3d& iso);
  Eigen::Isometry3d to_isometry() const;

  /// Rigid composition: (this ∘ other) maps other's frame into this one's parent.
  Pose compose(const Pose& other) const;
  Pose inverse() const;

  /// x, y, z, qw, qx, qy, qz
  std::array<double, 7> to_array() const;
  static Pose from_array(const std::array<double, 7>& v);
};

/// Angle between two orientations in radians, in [0, pi].
double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

bool all_finite(const JointVector& q);

}  // namespace prometheus
