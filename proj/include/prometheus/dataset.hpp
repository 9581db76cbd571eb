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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prometheus/geometry.hpp"
#include "prometheus/gripper_sim.hpp"

namespace prometheus::dataset {

inline constexpr const char* kSchemaVersion = "prometheus-ds/1";
inline constexpr std::size_t kActionDim = 7;

using Vec7 = std::array<double, kActionDim>;

/// 6 joint deltas (rad/step) then gripper delta (mm/step).
inline constexpr Vec7 kDefaultActionScale = {0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 5.0};

struct Observation {
  JointVector joints{};
  Pose ee_pose;
  double gripper_pos_norm = 0.0;  // opening / stroke
  double force_norm = 0.0;
  std::optional<std::string> wrist_image_ref;  // nominal 128x128
  std::optional<std::string> side_image_ref;   // nominal 256x256

  bool operator==(const Observation& other) const;
};

/// Every component in [-1, 1].
struct Action {
  Vec7 values{};
  bool operator==(const Action&) const = default;
};

struct StandardizedAction {
  Action action;
  bool clamped = false;
};

StandardizedAction standardize_action(const Vec7& raw, const Vec7& a_max);
Vec7 destandardize_action(const Action& action, const Vec7& a_max);

class BinIndex {
 public:
  explicit BinIndex(int value);
  int value() const { return value_; }
  bool operator==(const BinIndex&) const = default;
  auto operator<=>(const BinIndex&) const = default;

 private:
  std::uint8_t value_;
};

inline constexpr int kBins = 256;

/// Uniform 256-bin quantization of a [0, 1] value; 1.0 lands in the top bin.
BinIndex discretize(double v);

/// Joints then gripper opening in mm.
using RawState = Vec7;

std::vector<Vec7> compute_deltas(std::span<const RawState> states);

struct Step {
  Observation obs;
  std::optional<Action> action;  // absent on the final step
  bool clamped = false;

  bool operator==(const Step&) const = default;
};

struct Trajectory {
  std::string episode_id;
  std::string task;
  std::vector<Step> steps;
  gripper::OutcomeLabel outcome = gripper::OutcomeLabel::Slip;
  double peak_force = 0.0;  // N
  Vec7 a_max = kDefaultActionScale;
  double stroke_mm = 85.0;
  int control_hz = 100;
  int record_hz = 10;
  std::map<std::string, std::string> meta;

  bool operator==(const Trajectory&) const = default;

  RawState raw_state(std::size_t k) const;
  /// Replays destandardized actions from the first state.
  std::vector<RawState> reconstruct_states() const;
};

/// Builds steps and standardized actions from 10 Hz observations.
Trajectory build_trajectory(std::vector<Observation> observations, const Vec7& a_max, double stroke_mm);

void export_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory import_trajectory(const std::filesystem::path& path);

/// Appends observations on recording ticks.
class Recorder {
 public:
  explicit Recorder(double stroke_mm, Vec7 a_max = kDefaultActionScale) : stroke_mm_(stroke_mm), a_max_(a_max) {}

  void record(const Observation& obs);
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }

  Trajectory finish(std::string episode_id, std::string task, const gripper::GraspOutcome& outcome) &&;

 private:
  double stroke_mm_;
  Vec7 a_max_;
  std::vector<Observation> observations_;
};

/// Token view of one step: proprio channels and the action mapped from [-1, 1] onto [0, 1].
struct StepTokens {
  BinIndex gripper{0};
  BinIndex force{0};
  std::optional<std::array<BinIndex, kActionDim>> action;
};

std::vector<StepTokens> tokenize(const Trajectory& traj);

}  // namespace prometheus::dataset
