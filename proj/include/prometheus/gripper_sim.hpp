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

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prometheus::gripper {

inline constexpr double kGravity = 9.81;

/// Spring-loaded pad that pushes a central rod onto the force sensor.
struct PadMechanism {
  double spring_k = 0.25;   // N/mm per spring
  int spring_count = 2;
  double preload_f = 0.5;   // N held off the sensor at rest
  double pad_length = 40.0; // mm

  void validate() const;
};

struct ObjectModel {
  std::string name;
  double free_size = 50.0;  // mm, undeformed width
  double stiffness = 1.0;   // N/mm
  double damage_threshold = std::numeric_limits<double>::infinity();  // N
  double mass = 0.1;        // kg
  double friction_mu = 0.5;

  void validate() const;
  /// Smallest two-finger squeeze that holds the object against gravity.
  double min_holding_force() const { return mass * kGravity / (2.0 * friction_mu); }
  bool fragile() const { return damage_threshold != std::numeric_limits<double>::infinity(); }
};

/// Illustrative presets; stiffness and damage values are stand-ins, not measurements.
ObjectModel preset(std::string_view name);
std::vector<std::string> preset_names();

struct GripperSpec {
  double stroke = 85.0;       // mm
  double max_speed = 150.0;   // mm/s
  PadMechanism pad;
};

struct GripperState {
  double opening = 85.0;            // mm, in [0, stroke]
  double commanded_opening = 85.0;  // mm
  double contact_force = 0.0;       // N on the object

  static GripperState open(const GripperSpec& spec) { return {spec.stroke, spec.stroke, 0.0}; }
};

/// Force reaching the sensor for a load anywhere on the pad. Transfer is uniform
/// along the pad; only the spring preload is subtracted.
double pad_transfer(double applied_f, double contact_pos, const PadMechanism& mech);

/// Hooke contact force for a given opening; zero at and above the free size.
double contact_force(double opening, const ObjectModel& obj);

struct ContactStep {
  GripperState state;
  double sensor_force = 0.0;  // N after the pad mechanism
};

/// Advances the fingers toward the commanded opening at max speed, then evaluates
/// contact. `obj` is null when nothing is between the fingers.
ContactStep contact_step(const GripperState& g, const ObjectModel* obj, double dt, const GripperSpec& spec);

struct TraceEntry {
  double force = 0.0;    // N on the object
  double opening = 0.0;  // mm
  bool lifted = false;
};

enum class OutcomeLabel { Success, Slip, Damage };

std::string_view to_string(OutcomeLabel label);
std::optional<OutcomeLabel> outcome_from_string(std::string_view s);

struct GraspOutcome {
  OutcomeLabel label = OutcomeLabel::Slip;
  double peak_force = 0.0;
  std::size_t at_step = 0;
};

/// Damage beats slip beats success. A trace that never lifts counts as slip.
GraspOutcome classify_outcome(std::span<const TraceEntry> trace, const ObjectModel& obj);

enum class PolicyKind { PositionOnly, ForceCapped };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> policy_from_string(std::string_view s);

struct PolicyParams {
  /// position_only squeezes this far past the object's free size.
  double squeeze_depth = 15.0;  // mm
  /// Opening ramp while closing.
  double closing_speed = 40.0;  // mm/s
  /// force_capped stops at this normalized reading; defaults to 1.1 f_min / f_max.
  std::optional<double> force_cap;
};

struct GripperCommand {
  double target_opening = 0.0;  // mm
  bool settled = false;         // ready to lift
};

/// Scripted stand-ins for an operator with and without force feedback.
class ScriptedGripperPolicy {
 public:
  ScriptedGripperPolicy(PolicyKind kind, const ObjectModel& obj, double f_max, const PolicyParams& params = {});

  /// One control tick given the current opening and normalized sensor reading.
  GripperCommand next(double opening, double normalized_force, double dt);

  PolicyKind kind() const { return kind_; }
  double force_cap() const { return cap_; }
  double target_opening() const { return target_; }

 private:
  PolicyKind kind_;
  PolicyParams params_;
  double target_;
  double cap_;
  std::optional<double> command_;
  bool holding_ = false;
};

}  // namespace prometheus::gripper
