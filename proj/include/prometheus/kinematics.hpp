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
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "prometheus/geometry.hpp"

namespace prometheus::kinematics {

/// One standard Denavit-Hartenberg row: Rz(theta + theta_offset) Tz(d) Tx(a) Rx(alpha).
struct DhRow {
  double a = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double theta_offset = 0.0;
};

class DhTable {
 public:
  explicit DhTable(const std::array<DhRow, 6>& rows);

  /// Published UR3 geometry.
  static DhTable ur3();
  /// One row per joint: a d alpha theta_offset. Blank lines and '#' comments are skipped.
  static DhTable load(const std::filesystem::path& path);

  const DhRow& operator[](std::size_t i) const { return rows_[i]; }
  const std::array<DhRow, 6>& rows() const { return rows_; }

  /// Sum of link lengths and offsets; no reachable point is farther than this from the base origin.
  double max_reach() const;

 private:
  std::array<DhRow, 6> rows_;
};

struct JointLimits {
  JointVector lower;
  JointVector upper;

  static JointLimits symmetric(double bound);
  bool contains(const JointVector& q) const;
};

/// Homogeneous transform of a single DH link at joint angle theta.
Eigen::Isometry3d link_transform(const DhRow& row, double theta);

Pose forward_kinematics(const JointVector& q, const DhTable& dh);

/// Frames 0..6 (base to tool) for the given configuration.
std::array<Eigen::Isometry3d, 7> frame_chain(const JointVector& q, const DhTable& dh);

struct IkSolution {
  JointVector q;
  /// 4 * shoulder + 2 * wrist + elbow.
  int branch = 0;
};

struct IkResult {
  std::vector<IkSolution> solutions;
  /// Branches dropped because |sin(q5)| fell below the singularity threshold.
  std::vector<int> singular_branches;

  bool near_singular() const { return !singular_branches.empty(); }
};

inline constexpr double kWristSingularityThreshold = 1e-6;

/// Closed-form solution set for UR-family geometry (three parallel middle axes,
/// spherical-offset wrist). Returned angles are wrapped into (-pi, pi]. An
/// unreachable target yields an empty set. Throws UnsupportedGeometry for DH
/// tables that are not UR-shaped.
IkResult inverse_kinematics(const Pose& target, const DhTable& dh);

/// True when the table has the zero pattern and twist angles the closed form relies on.
bool is_ur_family(const DhTable& dh);

inline constexpr std::array<double, 6> kDefaultSelectionWeights = {1.0, 1.0, 1.0, 0.5, 0.5, 0.5};

double weighted_distance(const JointVector& a, const JointVector& b,
                         const std::array<double, 6>& weights = kDefaultSelectionWeights);

/// Index of the candidate closest to `current`; ties go to the lowest index.
std::size_t select_solution_index(std::span<const JointVector> candidates, const JointVector& current,
                                  const std::array<double, 6>& weights = kDefaultSelectionWeights);

JointVector select_solution(std::span<const JointVector> candidates, const JointVector& current,
                            const std::array<double, 6>& weights = kDefaultSelectionWeights);

/// Shifts each joint of `q` by multiples of 2*pi to land as close as possible to
/// `reference` while staying inside `limits`. Returns false if some joint has no
/// equivalent inside the limits.
bool nearest_equivalent(JointVector& q, const JointVector& reference, const JointLimits& limits);

using Jacobian = Eigen::Matrix<double, 6, 6>;

/// Geometric Jacobian of the tool frame origin: rows 0-2 linear velocity (m/rad),
/// rows 3-5 angular velocity (rad/rad), both in the base frame.
Jacobian jacobian(const JointVector& q, const DhTable& dh);

}  // namespace prometheus::kinematics
