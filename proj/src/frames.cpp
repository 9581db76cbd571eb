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

#include "prometheus/frames.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "prometheus/error.hpp"

namespace prometheus::frames {

FrameTransform FrameTransform::compose(const FrameTransform& inner) const {
  FrameTransform out;
  out.rotation = (rotation * inner.rotation).normalized();
  out.translation = rotation * inner.translation + translation;
  out.scale = inner.scale;
  return out;
}

FrameTransform FrameTransform::inverse() const {
  FrameTransform out;
  out.rotation = rotation.conjugate();
  out.translation = -(out.rotation * translation);
  return out;
}

Pose apply_transform(const FrameTransform& t, const Pose& p) {
  Pose out;
  out.position = t.rotation * p.position.cwiseProduct(t.scale) + t.translation;
  out.orientation = (t.rotation * p.orientation).normalized();
  return out;
}

Calibration calibrate(std::span<const CalibrationPair> pairs) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  if (n < 3) throw Error(Errc::DegenerateGeometry, "need at least 3 point pairs, got " + std::to_string(n));

  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = pairs[i].operator_pose.position;
    dst.col(i) = pairs[i].robot_pose.position;
  }
  const Eigen::Vector3d src_mean = src.rowwise().mean();
  const Eigen::Vector3d dst_mean = dst.rowwise().mean();
  src.colwise() -= src_mean;
  dst.colwise() -= dst_mean;

  // Collinear or coincident operator points leave the rotation about that line free.
  Eigen::JacobiSVD<Eigen::Matrix3Xd> spread(src);
  const auto sv = spread.singularValues();
  if (sv(0) < 1e-12 || sv(1) < 1e-9 * sv(0)) {
    throw Error(Errc::DegenerateGeometry, "calibration points are collinear or coincident");
  }

  const Eigen::Matrix3d cov = dst * src.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixU() * fix * svd.matrixV().transpose();

  Calibration out;
  out.transform.rotation = Eigen::Quaterniond(r).normalized();
  out.transform.translation = dst_mean - r * src_mean;

  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sq += (r * pairs[i].operator_pose.position + out.transform.translation - pairs[i].robot_pose.position)
              .squaredNorm();
  }
  out.residual_rms = std::sqrt(sq / static_cast<double>(n));
  out.orientation_offset =
      ((out.transform.rotation * pairs[0].operator_pose.orientation).conjugate() * pairs[0].robot_pose.orientation)
          .normalized();
  return out;
}

std::vector<CalibrationPair> load_calibration_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open calibration file " + path.string());
  std::vector<CalibrationPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double v[6];
    if (!(ss >> v[0])) continue;
    for (int i = 1; i < 6; ++i) {
      if (!(ss >> v[i])) {
        throw Error(Errc::CorruptRecord, path.string() + ":" + std::to_string(line_no) + ": expected 6 numbers");
      }
    }
    CalibrationPair p;
    p.operator_pose.position = {v[0], v[1], v[2]};
    p.robot_pose.position = {v[3], v[4], v[5]};
    pairs.push_back(p);
  }
  return pairs;
}

ClutchState ClutchState::engage(const TrackerSample& sample, const Pose& robot_pose, const FrameTransform& t) {
  ClutchState s;
  s.anchors_ = std::make_pair(apply_transform(t, sample.pose), robot_pose);
  return s;
}

std::pair<ClutchState, std::optional<Pose>> clutch_step(const ClutchState& state, const TrackerSample& sample,
                                                        const Pose& /*robot_pose*/, const FrameTransform& t) {
  if (!state.engaged()) return {state, std::nullopt};
  const Pose hand = apply_transform(t, sample.pose);
  const Pose relative = state.anchor_operator().inverse().compose(hand);
  return {state, state.anchor_robot().compose(relative)};
}

Pose clamp_workspace(const Pose& p, const Eigen::Vector3d& center, double radius) {
  if (!(radius > 0.0)) throw Error(Errc::InvalidConfig, "workspace radius must be positive");
  const Eigen::Vector3d offset = p.position - center;
  const double dist = offset.norm();
  // Slack keeps the projection idempotent under rounding of the rescaled offset.
  if (dist <= radius * (1.0 + 1e-12)) return p;
  Pose out = p;
  out.position = center + offset * (radius / dist);
  return out;
}

}  // namespace prometheus::frames
