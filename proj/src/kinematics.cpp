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

#include "prometheus/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "prometheus/error.hpp"

namespace prometheus::kinematics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// acos/asin arguments this far past +-1 are rounding noise, not unreachability.
constexpr double kDomainSlack = 1e-12;

bool in_domain(double x) { return std::abs(x) <= 1.0 + kDomainSlack; }
double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Link transform at a raw DH angle, i.e. with the row's offset already folded in.
Eigen::Isometry3d raw_link(const DhRow& row, double theta_dh) {
  DhRow r = row;
  r.theta_offset = 0.0;
  return link_transform(r, theta_dh);
}

}  // namespace

DhTable::DhTable(const std::array<DhRow, 6>& rows) : rows_(rows) {
  for (const auto& r : rows_) {
    if (!std::isfinite(r.a) || !std::isfinite(r.d) || !std::isfinite(r.alpha) ||
        !std::isfinite(r.theta_offset)) {
      throw Error(Errc::InvalidDhTable, "non-finite DH entry");
    }
  }
}

DhTable DhTable::ur3() {
  return DhTable({{
      {0.0, 0.1519, kPi / 2, 0.0},
      {-0.24365, 0.0, 0.0, 0.0},
      {-0.21325, 0.0, 0.0, 0.0},
      {0.0, 0.11235, kPi / 2, 0.0},
      {0.0, 0.08535, -kPi / 2, 0.0},
      {0.0, 0.0819, 0.0, 0.0},
  }});
}

DhTable DhTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open DH table " + path.string());
  std::array<DhRow, 6> rows{};
  std::size_t count = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    DhRow row;
    if (!(ss >> row.a)) continue;
    if (!(ss >> row.d >> row.alpha >> row.theta_offset)) {
      throw Error(Errc::InvalidDhTable, path.string() + ":" + std::to_string(line_no) +
                                            ": expected a d alpha theta_offset");
    }
    std::string extra;
    if (ss >> extra) {
      throw Error(Errc::InvalidDhTable, path.string() + ":" + std::to_string(line_no) + ": trailing data");
    }
    if (count == 6) throw Error(Errc::InvalidDhTable, "more than 6 rows in " + path.string());
    rows[count++] = row;
  }
  if (count != 6) {
    throw Error(Errc::InvalidDhTable, "expected 6 rows, found " + std::to_string(count));
  }
  return DhTable(rows);
}

double DhTable::max_reach() const {
  double reach = 0.0;
  for (const auto& r : rows_) reach += std::abs(r.a) + std::abs(r.d);
  return reach;
}

JointLimits JointLimits::symmetric(double bound) {
  JointLimits l;
  l.lower.fill(-bound);
  l.upper.fill(bound);
  return l;
}

bool JointLimits::contains(const JointVector& q) const {
  for (std::size_t i = 0; i < 6; ++i) {
    if (!(q[i] >= lower[i] && q[i] <= upper[i])) return false;
  }
  return true;
}

Eigen::Isometry3d link_transform(const DhRow& row, double theta) {
  const double th = theta + row.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.matrix() << ct, -st * ca, st * sa, row.a * ct,
                st, ct * ca, -ct * sa, row.a * st,
                0.0, sa, ca, row.d,
                0.0, 0.0, 0.0, 1.0;
  return t;
}

std::array<Eigen::Isometry3d, 7> frame_chain(const JointVector& q, const DhTable& dh) {
  std::array<Eigen::Isometry3d, 7> frames;
  frames[0] = Eigen::Isometry3d::Identity();
  for (std::size_t i = 0; i < 6; ++i) frames[i + 1] = frames[i] * link_transform(dh[i], q[i]);
  return frames;
}

Pose forward_kinematics(const JointVector& q, const DhTable& dh) {
  return Pose::from_isometry(frame_chain(q, dh)[6]);
}

bool is_ur_family(const DhTable& dh) {
  constexpr double eps = 1e-12;
  auto near = [](double a, double b) { return std::abs(a - b) <= eps; };
  const auto& r = dh.rows();
  return near(r[0].a, 0) && near(r[3].a, 0) && near(r[4].a, 0) && near(r[5].a, 0) &&
         near(r[1].d, 0) && near(r[2].d, 0) &&
         near(r[0].alpha, kPi / 2) && near(r[1].alpha, 0) && near(r[2].alpha, 0) &&
         near(r[3].alpha, kPi / 2) && near(r[4].alpha, -kPi / 2) && near(r[5].alpha, 0) &&
         std::abs(r[1].a) > eps && std::abs(r[2].a) > eps && std::abs(r[5].d) > eps;
}

IkResult inverse_kinematics(const Pose& target, const DhTable& dh) {
  if (!is_ur_family(dh)) {
    throw Error(Errc::UnsupportedGeometry, "closed-form IK needs a UR-shaped DH table");
  }
  const auto& rows = dh.rows();
  const double a2 = rows[1].a, a3 = rows[2].a;
  const double d4 = rows[3].d, d6 = rows[5].d;

  const Eigen::Isometry3d t06 = target.to_isometry();
  const Eigen::Matrix3d& r06 = t06.linear();
  const Eigen::Vector3d p06 = t06.translation();
  const Eigen::Vector3d p05 = t06 * Eigen::Vector3d(0.0, 0.0, -d6);

  IkResult result;

  // Shoulder: the wrist center's component along joint 2's axis is fixed at d4.
  const double rho = std::hypot(p05.x(), p05.y());
  if (rho < 1e-12 || !in_domain(d4 / rho)) return result;
  const double phi = std::atan2(p05.y(), p05.x());
  const double shoulder_acos = std::acos(clamp_unit(d4 / rho));

  for (int shoulder = 0; shoulder < 2; ++shoulder) {
    const double th1 = phi + (shoulder == 0 ? shoulder_acos : -shoulder_acos) + kPi / 2;
    const double s1 = std::sin(th1), c1 = std::cos(th1);

    const double c5 = (p06.x() * s1 - p06.y() * c1 - d4) / d6;
    if (!in_domain(c5)) continue;
    const double wrist_acos = std::acos(clamp_unit(c5));

    for (int wrist = 0; wrist < 2; ++wrist) {
      const double th5 = wrist == 0 ? wrist_acos : -wrist_acos;
      const double s5 = std::sin(th5);
      const int wrist_branch = 4 * shoulder + 2 * wrist;
      if (std::abs(s5) < kWristSingularityThreshold) {
        result.singular_branches.push_back(wrist_branch);
        result.singular_branches.push_back(wrist_branch + 1);
        continue;
      }

      // Joint 2's axis expressed in the tool frame is (s5 c6, -s5 s6, c5).
      const double n6x = r06(0, 0) * s1 - r06(1, 0) * c1;
      const double n6y = r06(0, 1) * s1 - r06(1, 1) * c1;
      const double th6 = std::atan2(-n6y / s5, n6x / s5);

      const Eigen::Isometry3d t01 = raw_link(rows[0], th1);
      const Eigen::Isometry3d t45 = raw_link(rows[4], th5);
      const Eigen::Isometry3d t56 = raw_link(rows[5], th6);
      const Eigen::Isometry3d t14 = t01.inverse() * t06 * (t45 * t56).inverse();
      const double px = t14.translation().x();
      const double py = t14.translation().y();

      const double c3 = (px * px + py * py - a2 * a2 - a3 * a3) / (2.0 * a2 * a3);
      if (!in_domain(c3)) continue;
      const double elbow_acos = std::acos(clamp_unit(c3));

      for (int elbow = 0; elbow < 2; ++elbow) {
        const double th3 = elbow == 0 ? elbow_acos : -elbow_acos;
        const double th2 =
            std::atan2(py, px) - std::atan2(a3 * std::sin(th3), a2 + a3 * std::cos(th3));
        const Eigen::Isometry3d t13 = raw_link(rows[1], th2) * raw_link(rows[2], th3);
        const Eigen::Isometry3d t34 = t13.inverse() * t14;
        const double th4 = std::atan2(t34(1, 0), t34(0, 0));

        const std::array<double, 6> raw = {th1, th2, th3, th4, th5, th6};
        IkSolution sol;
        sol.branch = wrist_branch + elbow;
        for (std::size_t i = 0; i < 6; ++i) sol.q[i] = wrap_angle(raw[i] - rows[i].theta_offset);
        result.solutions.push_back(sol);
      }
    }
  }
  return result;
}

double weighted_distance(const JointVector& a, const JointVector& b, const std::array<double, 6>& weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 6; ++i) sum += weights[i] * std::abs(a[i] - b[i]);
  return sum;
}

std::size_t select_solution_index(std::span<const JointVector> candidates, const JointVector& current,
                                  const std::array<double, 6>& weights) {
  if (candidates.empty()) throw Error(Errc::EmptyCandidateSet, "no IK candidates to select from");
  std::size_t best = 0;
  double best_dist = weighted_distance(candidates[0], current, weights);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double d = weighted_distance(candidates[i], current, weights);
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

JointVector select_solution(std::span<const JointVector> candidates, const JointVector& current,
                            const std::array<double, 6>& weights) {
  return candidates[select_solution_index(candidates, current, weights)];
}

bool nearest_equivalent(JointVector& q, const JointVector& reference, const JointLimits& limits) {
  for (std::size_t i = 0; i < 6; ++i) {
    const double k = std::round((reference[i] - q[i]) / kTwoPi);
    double best = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (double dk : {0.0, -1.0, 1.0}) {
      const double v = q[i] + (k + dk) * kTwoPi;
      if (v < limits.lower[i] || v > limits.upper[i]) continue;
      const double gap = std::abs(v - reference[i]);
      if (gap < best_gap) {
        best = v;
        best_gap = gap;
      }
    }
    if (!std::isfinite(best_gap)) return false;
    q[i] = best;
  }
  return true;
}

Jacobian jacobian(const JointVector& q, const DhTable& dh) {
  const auto frames = frame_chain(q, dh);
  const Eigen::Vector3d tip = frames[6].translation();
  Jacobian j;
  for (std::size_t i = 0; i < 6; ++i) {
    const Eigen::Vector3d z = frames[i].linear().col(2);
    const Eigen::Vector3d o = frames[i].translation();
    j.block<3, 1>(0, i) = z.cross(tip - o);
    j.block<3, 1>(3, i) = z;
  }
  return j;
}

}  // namespace prometheus::kinematics
