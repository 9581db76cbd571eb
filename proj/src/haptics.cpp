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

#include "prometheus/haptics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prometheus/error.hpp"

namespace prometheus::haptics {

Resistance force_to_resistance(double force_n, const FsrModel& m) {
  if (force_n < 0.0 || std::isnan(force_n)) {
    throw Error(Errc::NegativeForce, "force must be non-negative, got " + std::to_string(force_n));
  }
  if (force_n == 0.0) return std::nullopt;
  if (force_n >= m.f_max) return m.r_fs;  // sensor bottoms out
  return m.r_fs * m.f_max / force_n;
}

double linearize(Resistance r, const LinearizerConfig& cfg) {
  if (!r) return 0.0;
  if (!(*r > 0.0)) {
    throw Error(Errc::NonPositiveResistance, "sensor resistance must be positive");
  }
  return -cfg.v_ref * cfg.r_g / *r;
}

double normalize_force(double v_out, const LinearizerConfig& cfg, const FsrModel& m) {
  const double fs = cfg.full_scale(m);
  const double mag = std::abs(v_out);
  if (mag > fs * (1.0 + 1e-9)) {
    throw Error(Errc::OverRange, "output " + std::to_string(v_out) + " V beyond full scale");
  }
  return std::clamp(mag / fs, 0.0, 1.0);
}

double select_gain_resistor(const FsrModel& m, double v_target, double v_ref) {
  if (!(v_target > 0.0)) throw Error(Errc::OutOfRange, "target voltage must be positive");
  return v_target * m.r_fs / v_ref;
}

TorqueCommand feedback_torque(double normalized_force, double k_t) {
  if (!(normalized_force >= 0.0 && normalized_force <= 1.0)) {
    throw Error(Errc::OutOfRange, "normalized force outside [0, 1]");
  }
  const double a = k_t * normalized_force;
  return {a, -a};
}

ForceSample sense(double force_n, const LinearizerConfig& cfg, const FsrModel& m) {
  ForceSample s;
  s.force_n = force_n;
  s.v_out = linearize(force_to_resistance(force_n, m), cfg);
  s.normalized = normalize_force(s.v_out, cfg, m);
  return s;
}

}  // namespace prometheus::haptics
