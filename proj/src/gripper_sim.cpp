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

#include "prometheus/gripper_sim.hpp"

#include <algorithm>
#include <cmath>

#include "prometheus/error.hpp"

namespace prometheus::gripper {

void PadMechanism::validate() const {
  if (!(spring_k > 0.0) || spring_count <= 0 || !(preload_f >= 0.0) || !(pad_length > 0.0)) {
    throw Error(Errc::InvalidModel, "pad mechanism parameters must be positive");
  }
}

void ObjectModel::validate() const {
  if (!(free_size > 0.0) || !(stiffness > 0.0) || !(mass > 0.0) || !(friction_mu > 0.0 && friction_mu <= 2.0) ||
      !(damage_threshold > 0.0)) {
    throw Error(Errc::InvalidModel, "object '" + name + "' has out-of-range parameters");
  }
}

ObjectModel preset(std::string_view name) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (name == "tomato") return {"tomato", 60.0, 0.8, 8.0, 0.12, 0.6};
  if (name == "shampoo") return {"shampoo", 55.0, 20.0, inf, 0.45, 0.5};
  if (name == "toothpaste") return {"toothpaste", 35.0, 0.3, inf, 0.08, 0.6};
  // The shell survives ~30 N between rigid jaws; through the pad it cracks near 6 N.
  if (name == "egg") return {"egg", 45.0, 15.0, 6.0, 0.06, 0.4};
  throw Error(Errc::UnknownObject, "no preset named '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"tomato", "shampoo", "toothpaste", "egg"}; }

double pad_transfer(double applied_f, double contact_pos, const PadMechanism& mech) {
  if (!(contact_pos >= 0.0 && contact_pos <= mech.pad_length)) {
    throw Error(Errc::OutOfPadRange, "contact position outside the pad");
  }
  if (applied_f < 0.0) throw Error(Errc::NegativeForce, "applied force must be non-negative");
  return std::max(0.0, applied_f - mech.preload_f);
}

double contact_force(double opening, const ObjectModel& obj) {
  if (opening >= obj.free_size) return 0.0;
  return obj.stiffness * (obj.free_size - opening);
}

ContactStep contact_step(const GripperState& g, const ObjectModel* obj, double dt, const GripperSpec& spec) {
  ContactStep out;
  out.state = g;
  auto& s = out.state;
  s.commanded_opening = std::clamp(g.commanded_opening, 0.0, spec.stroke);
  const double max_move = spec.max_speed * dt;
  const double delta = std::clamp(s.commanded_opening - g.opening, -max_move, max_move);
  s.opening = std::clamp(g.opening + delta, 0.0, spec.stroke);
  s.contact_force = obj ? contact_force(s.opening, *obj) : 0.0;
  // Objects sit centred between the fingers, so the load lands mid-pad.
  out.sensor_force = pad_transfer(s.contact_force, spec.pad.pad_length / 2.0, spec.pad);
  return out;
}

std::string_view to_string(OutcomeLabel label) {
  switch (label) {
    case OutcomeLabel::Success: return "success";
    case OutcomeLabel::Slip: return "slip";
    case OutcomeLabel::Damage: return "damage";
  }
  return "unknown";
}

std::optional<OutcomeLabel> outcome_from_string(std::string_view s) {
  if (s == "success") return OutcomeLabel::Success;
  if (s == "slip") return OutcomeLabel::Slip;
  if (s == "damage") return OutcomeLabel::Damage;
  return std::nullopt;
}

GraspOutcome classify_outcome(std::span<const TraceEntry> trace, const ObjectModel& obj) {
  if (trace.empty()) throw Error(Errc::EmptyTrace, "cannot classify an empty trace");
  GraspOutcome out;
  for (const auto& e : trace) out.peak_force = std::max(out.peak_force, e.force);

  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].force > obj.damage_threshold) {
      out.label = OutcomeLabel::Damage;
      out.at_step = i;
      return out;
    }
  }
  const auto lift = std::find_if(trace.begin(), trace.end(), [](const TraceEntry& e) { return e.lifted; });
  if (lift == trace.end()) {
    out.label = OutcomeLabel::Slip;
    out.at_step = trace.size() - 1;
    return out;
  }
  out.at_step = static_cast<std::size_t>(lift - trace.begin());
  out.label = lift->force < obj.min_holding_force() ? OutcomeLabel::Slip : OutcomeLabel::Success;
  return out;
}

std::string_view to_string(PolicyKind kind) {
  return kind == PolicyKind::PositionOnly ? "position_only" : "force_capped";
}

std::optional<PolicyKind> policy_from_string(std::string_view s) {
  if (s == "position_only") return PolicyKind::PositionOnly;
  if (s == "force_capped") return PolicyKind::ForceCapped;
  return std::nullopt;
}

ScriptedGripperPolicy::ScriptedGripperPolicy(PolicyKind kind, const ObjectModel& obj, double f_max,
                                             const PolicyParams& params)
    : kind_(kind),
      params_(params),
      target_(std::max(0.0, obj.free_size - params.squeeze_depth)),
      cap_(params.force_cap.value_or(1.1 * obj.min_holding_force() / f_max)) {}

GripperCommand ScriptedGripperPolicy::next(double opening, double normalized_force, double dt) {
  if (!command_) command_ = opening;
  const double step = params_.closing_speed * dt;

  if (kind_ == PolicyKind::PositionOnly) {
    command_ = std::max(target_, *command_ - step);
    return {*command_, opening <= target_ + 1e-9};
  }

  if (!holding_ && normalized_force >= cap_) {
    holding_ = true;
    command_ = opening;
  }
  if (!holding_) command_ = std::max(0.0, *command_ - step);
  return {*command_, holding_};
}

}  // namespace prometheus::gripper
