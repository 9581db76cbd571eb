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

#include "prometheus/teleop_server.hpp"

#include <algorithm>
#include <cmath>

#include "prometheus/error.hpp"

namespace prometheus::teleop {

namespace {

// Re-check tolerance on the selected IK branch before it is commanded.
constexpr double kFkRecheckTol = 1e-8;

Eigen::Quaterniond rpy_quaternion(double roll, double pitch, double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                            Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                            Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()));
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Live: return "live";
    case Mode::Replay: return "replay";
    case Mode::Scripted: return "scripted";
  }
  return "unknown";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "live") return Mode::Live;
  if (s == "replay") return Mode::Replay;
  if (s == "scripted") return Mode::Scripted;
  return std::nullopt;
}

void ServerConfig::validate() const {
  if (control_hz <= 0 || record_decimation <= 0 || control_hz % record_decimation != 0) {
    throw Error(Errc::InvalidConfig, "control_hz must be a positive multiple of record_decimation");
  }
  if (!(max_joint_vel > 0.0) || !(workspace_radius > 0.0) || !(telemetry_hz > 0.0) || !(lift_height > 0.0) ||
      !(capture_radius > 0.0) || max_ticks == 0) {
    throw Error(Errc::InvalidConfig, "rates, radii and limits must be positive");
  }
  if (!(haptics.fsr.r_fs > 0.0) || !(haptics.fsr.f_max > 0.0) || !(haptics.linearizer.v_ref > 0.0) ||
      !(haptics.linearizer.r_g > 0.0)) {
    throw Error(Errc::InvalidConfig, "haptics constants must be positive");
  }
  if (!(gripper.stroke > 0.0) || !(gripper.max_speed > 0.0)) {
    throw Error(Errc::InvalidConfig, "gripper stroke and speed must be positive");
  }
  gripper.pad.validate();
  for (double a : action_scale) {
    if (!(a > 0.0)) throw Error(Errc::InvalidConfig, "action scale must be positive");
  }
  if (!limits.contains(home)) throw Error(Errc::InvalidConfig, "home configuration outside joint limits");
}

Eigen::Vector3d ServerConfig::center() const {
  return workspace_center.value_or(kinematics::forward_kinematics(home, dh).position);
}

void OperatorCommand::merge(const OperatorCommand& newer) {
  if (newer.pose_delta) {
    if (!pose_delta) pose_delta = std::array<double, 6>{};
    for (std::size_t i = 0; i < 6; ++i) (*pose_delta)[i] += (*newer.pose_delta)[i];
  }
  if (newer.clutch) clutch = newer.clutch;
  if (newer.gripper_target_mm) gripper_target_mm = newer.gripper_target_mm;
}

std::string_view to_string(Event e) {
  switch (e) {
    case Event::Clamp: return "clamp";
    case Event::Unreachable: return "unreachable";
    case Event::Singular: return "singular";
    case Event::Damage: return "damage";
    case Event::Slip: return "slip";
    case Event::LiftComplete: return "lift_complete";
  }
  return "unknown";
}

bool TickReport::has(Event e) const { return std::find(events.begin(), events.end(), e) != events.end(); }

SessionState SessionState::initial(const ServerConfig& cfg, gripper::ObjectModel object,
                                   const Eigen::Vector3d& object_position) {
  SessionState s;
  s.joints = cfg.home;
  s.gripper = gripper::GripperState::open(cfg.gripper);
  s.object = std::move(object);
  s.object_position = object_position;
  s.object_rest_z = object_position.z();
  // Start the hand where the transform maps it onto the tool, so an engaged clutch
  // reproduces operator motion one-to-one in the base frame.
  const Pose home_pose = kinematics::forward_kinematics(cfg.home, cfg.dh);
  const frames::FrameTransform inv = cfg.operator_transform.inverse();
  s.operator_pose = frames::apply_transform(inv, home_pose);
  s.operator_pose.position = s.operator_pose.position.cwiseQuotient(cfg.operator_transform.scale);
  return s;
}

std::pair<SessionState, TickReport> tick(SessionState s, const std::optional<OperatorCommand>& input,
                                         const ServerConfig& cfg) {
  TickReport r;
  r.tick = s.tick;
  r.sim_time = static_cast<double>(s.tick) / cfg.control_hz;
  r.recording_tick = s.tick % static_cast<std::uint64_t>(cfg.record_decimation) == 0;
  const double dt = cfg.dt();
  const Pose robot_now = kinematics::forward_kinematics(s.joints, cfg.dh);

  if (input) {
    if (input->clutch) {
      if (*input->clutch && !s.clutch.engaged()) {
        s.clutch = frames::ClutchState::engage({r.sim_time, s.operator_pose}, robot_now, cfg.operator_transform);
      } else if (!*input->clutch) {
        s.clutch = frames::ClutchState{};
        s.target.reset();
      }
    }
    if (input->pose_delta) {
      const auto& d = *input->pose_delta;
      s.operator_pose.position += Eigen::Vector3d(d[0], d[1], d[2]);
      s.operator_pose.orientation = (rpy_quaternion(d[3], d[4], d[5]) * s.operator_pose.orientation).normalized();
    }
    if (input->gripper_target_mm) {
      s.gripper.commanded_opening = std::clamp(*input->gripper_target_mm, 0.0, cfg.gripper.stroke);
    }
  }

  if (s.clutch.engaged()) {
    s.target = frames::clutch_step(s.clutch, {r.sim_time, s.operator_pose}, robot_now, cfg.operator_transform).second;
  }

  if (s.target) {
    const Pose goal = frames::clamp_workspace(*s.target, cfg.center(), cfg.workspace_radius);
    if (goal.position != s.target->position) r.events.push_back(Event::Clamp);

    const kinematics::IkResult ik = kinematics::inverse_kinematics(goal, cfg.dh);
    if (ik.near_singular()) r.events.push_back(Event::Singular);
    std::vector<JointVector> candidates;
    for (const auto& sol : ik.solutions) {
      JointVector q = sol.q;
      if (kinematics::nearest_equivalent(q, s.joints, cfg.limits)) candidates.push_back(q);
    }
    bool moved = false;
    if (!candidates.empty()) {
      const JointVector best = kinematics::select_solution(candidates, s.joints);
      const Pose check = kinematics::forward_kinematics(best, cfg.dh);
      if ((check.position - goal.position).norm() < kFkRecheckTol &&
          angular_distance(check.orientation, goal.orientation) < kFkRecheckTol) {
        const double max_step = cfg.max_joint_vel / cfg.control_hz;
        for (std::size_t i = 0; i < 6; ++i) {
          s.joints[i] += std::clamp(best[i] - s.joints[i], -max_step, max_step);
        }
        moved = true;
      }
    }
    if (!moved) r.events.push_back(Event::Unreachable);
  }

  const Pose ee = kinematics::forward_kinematics(s.joints, cfg.dh);
  const bool in_hand = (ee.position - s.object_position).norm() <= cfg.capture_radius;
  const gripper::ContactStep contact = gripper::contact_step(s.gripper, in_hand ? &s.object : nullptr, dt, cfg.gripper);
  s.gripper = contact.state;

  const double f_min = s.object.min_holding_force();
  const bool held = in_hand && s.gripper.contact_force >= f_min;
  if (held) {
    s.object_position += ee.position - robot_now.position;
    s.object_position.z() = std::max(s.object_position.z(), s.object_rest_z);
  }
  if (!in_hand) {
    s.grip_z.reset();
  } else if (!s.grip_z && s.gripper.contact_force > 0.0) {
    s.grip_z = ee.position.z();
  }
  const bool lifted = s.grip_z && ee.position.z() - *s.grip_z > cfg.lift_detect;

  if (s.gripper.contact_force > s.object.damage_threshold && !s.damaged) {
    s.damaged = true;
    r.events.push_back(Event::Damage);
  }
  if (lifted && !s.lift_seen) {
    s.lift_seen = true;
    if (s.gripper.contact_force < f_min) r.events.push_back(Event::Slip);
  }
  if (held && !s.lift_complete && s.object_position.z() - s.object_rest_z >= cfg.lift_height - 1e-9) {
    s.lift_complete = true;
    r.events.push_back(Event::LiftComplete);
  }

  r.joints = s.joints;
  r.ee_pose = ee;
  r.opening_mm = s.gripper.opening;
  r.contact_force = s.gripper.contact_force;
  r.force = haptics::sense(contact.sensor_force, cfg.haptics.linearizer, cfg.haptics.fsr);
  r.torque = haptics::feedback_torque(r.force.normalized, cfg.haptics.k_t);
  r.object_in_hand = in_hand;
  r.lifted = lifted;

  ++s.tick;
  return {std::move(s), std::move(r)};
}

dataset::Observation observation_of(const TickReport& report, const ServerConfig& cfg) {
  dataset::Observation o;
  o.joints = report.joints;
  o.ee_pose = report.ee_pose;
  o.gripper_pos_norm = std::clamp(report.opening_mm / cfg.gripper.stroke, 0.0, 1.0);
  o.force_norm = report.force.normalized;
  return o;
}

ScriptedOperator::ScriptedOperator(const EpisodePlan& plan, gripper::PolicyKind kind, const ServerConfig& cfg,
                                   const gripper::PolicyParams& params)
    : plan_(plan), policy_(kind, plan.object, cfg.haptics.fsr.f_max, params) {
  hand_ = kinematics::forward_kinematics(cfg.home, cfg.dh).position;
  grasp_ = hand_ + plan.object_offset;
  above_ = {grasp_.x(), grasp_.y(), hand_.z()};
  // Slight overshoot so the tracking arm crosses the lift goal.
  lifted_ = grasp_ + Eigen::Vector3d(0.0, 0.0, cfg.lift_height + 0.002);
}

std::optional<std::array<double, 6>> ScriptedOperator::step_toward(const Eigen::Vector3d& goal, double step) {
  const Eigen::Vector3d gap = goal - hand_;
  const double dist = gap.norm();
  if (dist == 0.0) return std::nullopt;
  const Eigen::Vector3d move = dist <= step ? gap : Eigen::Vector3d(gap * (step / dist));
  hand_ = dist <= step ? goal : Eigen::Vector3d(hand_ + move);
  return std::array<double, 6>{move.x(), move.y(), move.z(), 0.0, 0.0, 0.0};
}

std::optional<OperatorCommand> ScriptedOperator::next(const TickReport* last, const ServerConfig& cfg) {
  const double step = plan_.hand_speed * cfg.dt();
  constexpr double kArrived = 5e-4;
  OperatorCommand cmd;
  auto delta_in_operator_frame = [&](const std::array<double, 6>& d) {
    const Eigen::Vector3d v = cfg.operator_transform.rotation.conjugate() * Eigen::Vector3d(d[0], d[1], d[2]);
    const Eigen::Vector3d scaled = v.cwiseQuotient(cfg.operator_transform.scale);
    return std::array<double, 6>{scaled.x(), scaled.y(), scaled.z(), 0.0, 0.0, 0.0};
  };
  auto arrived = [&](const Eigen::Vector3d& goal) {
    return hand_ == goal && last && (last->ee_pose.position - goal).norm() < kArrived;
  };
  auto grip = [&] {
    const auto g = policy_.next(last->opening_mm, last->force.normalized, cfg.dt());
    cmd.gripper_target_mm = g.target_opening;
    return g.settled;
  };

  switch (phase_) {
    case Phase::Engage:
      cmd.clutch = true;
      phase_ = Phase::Above;
      break;
    case Phase::Above:
      if (auto d = step_toward(above_, step)) cmd.pose_delta = delta_in_operator_frame(*d);
      if (arrived(above_)) phase_ = Phase::Descend;
      break;
    case Phase::Descend:
      if (auto d = step_toward(grasp_, step)) cmd.pose_delta = delta_in_operator_frame(*d);
      if (arrived(grasp_)) phase_ = Phase::Grip;
      break;
    case Phase::Grip:
      if (grip()) {
        phase_ = Phase::Settle;
        settle_left_ = plan_.settle_ticks;
      }
      break;
    case Phase::Settle:
      grip();
      if (--settle_left_ <= 0) phase_ = Phase::Lift;
      break;
    case Phase::Lift:
      grip();
      if (auto d = step_toward(lifted_, step)) cmd.pose_delta = delta_in_operator_frame(*d);
      else phase_ = Phase::Hold;
      break;
    case Phase::Hold:
      grip();
      break;
  }
  if (cmd.empty()) return std::nullopt;
  return cmd;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::LiftComplete: return "lift_complete";
    case Termination::Damage: return "damage";
    case Termination::Timeout: return "timeout";
  }
  return "unknown";
}

EpisodeResult run_episode(const ServerConfig& cfg, Operator& op, const EpisodePlan& plan,
                          const std::string& episode_id) {
  cfg.validate();
  plan.object.validate();
  const Eigen::Vector3d home = kinematics::forward_kinematics(cfg.home, cfg.dh).position;
  SessionState state = SessionState::initial(cfg, plan.object, home + plan.object_offset);
  state.episode_id = episode_id;

  EpisodeResult result;
  result.reports.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(cfg.max_ticks, 4096)));
  dataset::Recorder recorder(cfg.gripper.stroke, cfg.action_scale);
  std::vector<gripper::TraceEntry> trace;

  for (std::uint64_t k = 0; k < cfg.max_ticks; ++k) {
    const TickReport* last = result.reports.empty() ? nullptr : &result.reports.back();
    const std::optional<OperatorCommand> cmd = op.next(last, cfg);
    auto [next_state, report] = tick(std::move(state), cmd, cfg);
    state = std::move(next_state);
    result.commands.push_back(cmd.value_or(OperatorCommand{}));
    trace.push_back({report.contact_force, report.opening_mm, report.lifted});
    if (report.recording_tick) recorder.record(observation_of(report, cfg));
    result.reports.push_back(std::move(report));

    const TickReport& done = result.reports.back();
    if (done.has(Event::Damage)) {
      result.termination = Termination::Damage;
      break;
    }
    if (done.has(Event::LiftComplete)) {
      result.termination = Termination::LiftComplete;
      break;
    }
  }

  result.outcome = gripper::classify_outcome(trace, plan.object);
  result.trajectory = std::move(recorder).finish(episode_id, plan.object.name, result.outcome);
  result.trajectory.control_hz = cfg.control_hz;
  result.trajectory.record_hz = cfg.record_hz();
  return result;
}

}  // namespace prometheus::teleop
