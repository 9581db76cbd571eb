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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "prometheus/dataset.hpp"
#include "prometheus/frames.hpp"
#include "prometheus/geometry.hpp"
#include "prometheus/gripper_sim.hpp"
#include "prometheus/haptics.hpp"
#include "prometheus/kinematics.hpp"

namespace prometheus::teleop {

enum class Mode { Live, Replay, Scripted };

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

struct ServerConfig {
  int control_hz = 100;
  int record_decimation = 10;  // 100 Hz / 10 = 10 Hz recording
  double max_joint_vel = 1.0;  // rad/s
  double workspace_radius = frames::kDefaultWorkspaceRadius;
  Mode mode = Mode::Scripted;
  std::uint64_t max_ticks = 3000;

  /// Arm configuration at the start of every episode: tool pointing down.
  JointVector home = {0.0, -1.5707963267948966, 1.5707963267948966, -1.5707963267948966, -1.5707963267948966, 0.0};
  kinematics::DhTable dh = kinematics::DhTable::ur3();
  kinematics::JointLimits limits = kinematics::JointLimits::symmetric(2.0 * 3.141592653589793);
  /// Workspace ball centre; defaults to the home tool position.
  std::optional<Eigen::Vector3d> workspace_center;
  frames::FrameTransform operator_transform;

  haptics::HapticsConfig haptics;
  gripper::GripperSpec gripper;
  dataset::Vec7 action_scale = dataset::kDefaultActionScale;

  double lift_height = 0.10;     // m, episode goal
  double capture_radius = 0.02;  // m, object counts as between the fingers
  double lift_detect = 0.001;    // m of tool rise after first contact before the object counts as lifted
  double telemetry_hz = 25.0;

  void validate() const;
  double dt() const { return 1.0 / control_hz; }
  int record_hz() const { return control_hz / record_decimation; }
  Eigen::Vector3d center() const;
};

/// One operator input for one tick. Deltas are in the operator frame.
struct OperatorCommand {
  std::optional<std::array<double, 6>> pose_delta;  // dx dy dz droll dpitch dyaw
  std::optional<bool> clutch;
  std::optional<double> gripper_target_mm;

  bool empty() const { return !pose_delta && !clutch && !gripper_target_mm; }
  /// Coalesces a newer command into this one: deltas accumulate, the rest is latest-wins.
  void merge(const OperatorCommand& newer);
};

enum class Event { Clamp, Unreachable, Singular, Damage, Slip, LiftComplete };

std::string_view to_string(Event e);

struct TickReport {
  std::uint64_t tick = 0;
  double sim_time = 0.0;
  bool recording_tick = false;
  JointVector joints{};
  Pose ee_pose;
  double opening_mm = 0.0;
  double contact_force = 0.0;  // N on the object
  haptics::ForceSample force;  // sensor chain reading
  haptics::TorqueCommand torque;
  bool object_in_hand = false;
  bool lifted = false;
  std::vector<Event> events;

  bool has(Event e) const;
};

struct SessionState {
  JointVector joints{};
  gripper::GripperState gripper;
  frames::ClutchState clutch;
  gripper::ObjectModel object;
  Eigen::Vector3d object_position = Eigen::Vector3d::Zero();  // grasp point, base frame
  double object_rest_z = 0.0;
  std::string episode_id;
  std::uint64_t tick = 0;

  /// Tracked hand in the operator frame, driven by pose deltas.
  Pose operator_pose;
  std::optional<Pose> target;
  /// Tool height when the fingers first touched the object in hand; lift is measured from here.
  std::optional<double> grip_z;
  bool damaged = false;
  bool lift_seen = false;
  bool lift_complete = false;

  /// Arm at home, gripper open, object resting at `object_position`.
  static SessionState initial(const ServerConfig& cfg, gripper::ObjectModel object, const Eigen::Vector3d& object_position);
};

/// One control period of the pipeline: clutch/transform, workspace clamp, IK,
/// branch selection, joint velocity clamp, gripper contact, sensing chain, torque.
std::pair<SessionState, TickReport> tick(SessionState state, const std::optional<OperatorCommand>& input,
                                         const ServerConfig& cfg);

dataset::Observation observation_of(const TickReport& report, const ServerConfig& cfg);

/// Source of operator input for an episode.
class Operator {
 public:
  virtual ~Operator() = default;
  /// `last` is null before the first tick.
  virtual std::optional<OperatorCommand> next(const TickReport* last, const ServerConfig& cfg) = 0;
};

/// Issues nothing.
class IdleOperator final : public Operator {
 public:
  std::optional<OperatorCommand> next(const TickReport*, const ServerConfig&) override { return std::nullopt; }
};

struct EpisodePlan {
  gripper::ObjectModel object;
  /// Object grasp point relative to the home tool position.
  Eigen::Vector3d object_offset{0.0, 0.0, -0.10};
  double hand_speed = 0.05;  // m/s
  int settle_ticks = 5;      // hold after the grip settles before lifting
};

/// Engage, move above the object, descend, grip with a scripted gripper policy,
/// then lift straight up.
class ScriptedOperator final : public Operator {
 public:
  ScriptedOperator(const EpisodePlan& plan, gripper::PolicyKind kind, const ServerConfig& cfg,
                   const gripper::PolicyParams& params = {});

  std::optional<OperatorCommand> next(const TickReport* last, const ServerConfig& cfg) override;

 private:
  enum class Phase { Engage, Above, Descend, Grip, Settle, Lift, Hold };

  std::optional<std::array<double, 6>> step_toward(const Eigen::Vector3d& goal, double step);

  EpisodePlan plan_;
  gripper::ScriptedGripperPolicy policy_;
  Phase phase_ = Phase::Engage;
  Eigen::Vector3d hand_;  // where the operator has commanded the tool so far
  Eigen::Vector3d above_, grasp_, lifted_;
  int settle_left_ = 0;
};

enum class Termination { LiftComplete, Damage, Timeout };

std::string_view to_string(Termination t);

struct EpisodeResult {
  std::vector<TickReport> reports;
  gripper::GraspOutcome outcome;
  Termination termination = Termination::Timeout;
  dataset::Trajectory trajectory;
  std::vector<OperatorCommand> commands;  // per tick, empty when no input
};

/// Runs ticks in simulated time until lift completion, damage, or `cfg.max_ticks`.
/// A timeout is reported in `termination`; the outcome is still classified.
EpisodeResult run_episode(const ServerConfig& cfg, Operator& op, const EpisodePlan& plan,
                          const std::string& episode_id = "episode");

}  // namespace prometheus::teleop
