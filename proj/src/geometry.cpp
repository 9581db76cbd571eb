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

#include "prometheus/geometry.hpp"

#include <cmath>
#include <numbers>

#include "prometheus/error.hpp"

namespace prometheus {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::UnsupportedGeometry: return "UnsupportedGeometry";
    case Errc::InvalidDhTable: return "InvalidDhTable";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::NegativeForce: return "NegativeForce";
    case Errc::NonPositiveResistance: return "NonPositiveResistance";
    case Errc::OverRange: return "OverRange";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::OutOfPadRange: return "OutOfPadRange";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::NonPositiveScale: return "NonPositiveScale";
    case Errc::TooShort: return "TooShort";
    case Errc::Io: return "Io";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::CorruptRecord: return "CorruptRecord";
    case Errc::BindFailure: return "BindFailure";
    case Errc::ClientProtocolError: return "ClientProtocolError";
    case Errc::UnknownTask: return "UnknownTask";
    case Errc::UnknownPolicy: return "UnknownPolicy";
    case Errc::UnknownObject: return "UnknownObject";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyBatch: return "EmptyBatch";
  }
  return "Unknown";
}

Pose Pose::from_isometry(const Eigen::Isometry3d& iso) {
  Pose p;
  p.position = iso.translation();
  p.orientation = Eigen::Quaterniond(iso.linear()).normalized();
  return p;
}

Eigen::Isometry3d Pose::to_isometry() const {
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = orientation.normalized().toRotationMatrix();
  iso.translation() = position;
  return iso;
}

Pose Pose::compose(const Pose& other) const {
  Pose out;
  out.position = position + orientation * other.position;
  out.orientation = (orientation * other.orientation).normalized();
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.orientation = orientation.conjugate();
  out.position = -(out.orientation * position);
  return out;
}

std::array<double, 7> Pose::to_array() const {
  return {position.x(), position.y(), position.z(), orientation.w(),
          orientation.x(), orientation.y(), orientation.z()};
}

Pose Pose::from_array(const std::array<double, 7>& v) {
  Pose p;
  p.position = {v[0], v[1], v[2]};
  p.orientation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]);
  return p;
}

double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  // atan2 form stays accurate near zero where acos(|dot|) does not.
  const Eigen::Quaterniond d = a.conjugate() * b;
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(angle, two_pi);
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

bool all_finite(const JointVector& q) {
  for (double v : q) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace prometheus
