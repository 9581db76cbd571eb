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

#include <optional>

namespace prometheus::haptics {

/// Force-sensitive resistor with conductance proportional to applied force.
struct FsrModel {
  double r_fs = 1000.0;  // ohms at full compression
  double f_max = 20.0;   // newtons, full scale
};

/// Transimpedance stage: V_out = -v_ref * r_g / R_sensor.
struct LinearizerConfig {
  double v_ref = 3.3;    // volts
  double r_g = 1000.0;   // ohms, feedback resistor

  /// |V_out| when the sensor reads r_fs.
  double full_scale(const FsrModel& m) const { return v_ref * r_g / m.r_fs; }
};

struct ForceSample {
  double force_n = 0.0;
  double v_out = 0.0;
  double normalized = 0.0;  // [0, 1]
};

/// Equal and opposite torques on the two controller sticks.
struct TorqueCommand {
  double stick_a = 0.0;  // N·m
  double stick_b = 0.0;
};

/// Resistance in ohms; nullopt is an open circuit (no contact).
using Resistance = std::optional<double>;

Resistance force_to_resistance(double force_n, const FsrModel& m);

/// Output voltage of the current-to-voltage converter. Open circuit gives 0 V.
double linearize(Resistance r, const LinearizerConfig& cfg);

/// |v_out| over full scale, clamped to [0, 1]. Readings more than 1e-9 (relative)
/// past full scale throw OverRange.
double normalize_force(double v_out, const LinearizerConfig& cfg, const FsrModel& m);

/// Gain resistor that puts the full-compression output at v_target volts.
double select_gain_resistor(const FsrModel& m, double v_target, double v_ref);

TorqueCommand feedback_torque(double normalized_force, double k_t);

/// The whole sensing chain for one contact force.
ForceSample sense(double force_n, const LinearizerConfig& cfg, const FsrModel& m);

struct HapticsConfig {
  FsrModel fsr;
  LinearizerConfig linearizer;
  double k_t = 0.2;  // N·m at full-scale force
};

}  // namespace prometheus::haptics
