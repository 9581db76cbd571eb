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

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "prometheus/geometry.hpp"

namespace prometheus::frames {

struct TrackerSample {
  double timestamp = 0.0;  // seconds, monotonic
  Pose pose;               // operator frame
};

/// Operator-to-robot mapping. Positions are scaled per axis before the rigid part;
/// the default unit scale keeps the map rigid.
struct FrameTransform {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();

  static FrameTransform identity() { return {}; }
  /// this ∘ inner: apply inner first. Only defined for unit scale on `this`.
  FrameTransform compose(const FrameTransform& inner) const;
  FrameTransform inverse() const;
};

Pose apply_transform(const FrameTransform& t, const Pose& p);

struct CalibrationPair {
  Pose operator_pose;
  Pose robot_pose;
};

struct Calibration {
  FrameTransform transform;
  /// Right-multiplied tool offset so that robot orientation = R * operator orientation * offset
  /// holds for the first pair.
  Eigen::Quaterniond orientation_offset = Eigen::Quaterniond::Identity();
  double residual_rms = 0.0;  // meters
};

/// Least-squares rigid registration of the position pairs. Throws DegenerateGeometry
/// for fewer than three pairs or collinear points.
Calibration calibrate(std::span<const CalibrationPair> pairs);

/// Six numbers per line: operator xyz, robot xyz. Orientations are identity.
std::vector<CalibrationPair> load_calibration_pairs(const std::filesystem::path& path);

class ClutchState {
 public:
  ClutchState() = default;

  /// Latches anchors at the current transformed hand pose and robot pose.
  static ClutchState engage(const TrackerSample& sample, const Pose& robot_pose, const FrameTransform& t);

  bool engaged() const { return anchors_.has_value(); }
  const Pose& anchor_operator() const { return anchors_->first; }
  const Pose& anchor_robot() const { return anchors_->second; }

 private:
  std::optional<std::pair<Pose, Pose>> anchors_;
};

/// Relative teleoperation: commanded = robot anchor ∘ operator anchor⁻¹ ∘ transformed sample.
/// Disengaged clutches emit nothing.
std::pair<ClutchState, std::optional<Pose>> clutch_step(const ClutchState& state, const TrackerSample& sample,
                                                        const Pose& robot_pose, const FrameTransform& t);

inline constexpr double kDefaultWorkspaceRadius = 0.30;

/// Projects the position onto the ball about `center`. Orientation is untouched.
Pose clamp_workspace(const Pose& p, const Eigen::Vector3d& center, double radius);

}  // namespace prometheus::frames
