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

// Independent reference computations used only by tests. Nothing here calls into
// the library paths it is used to check.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "prometheus/kinematics.hpp"

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat4 mul4(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[r][k] * b[k][col];
      c[r][col] = s;
    }
  return c;
}

// Rz(theta) * Tz(d) * Tx(a) * Rx(alpha), built as four elementary matrices.
inline Mat4 dh_link(double a, double d, double alpha, double theta) {
  Mat4 rz = identity4(), tz = identity4(), tx = identity4(), rx = identity4();
  rz[0][0] = std::cos(theta); rz[0][1] = -std::sin(theta);
  rz[1][0] = std::sin(theta); rz[1][1] = std::cos(theta);
  tz[2][3] = d;
  tx[0][3] = a;
  rx[1][1] = std::cos(alpha); rx[1][2] = -std::sin(alpha);
  rx[2][1] = std::sin(alpha); rx[2][2] = std::cos(alpha);
  return mul4(mul4(rz, tz), mul4(tx, rx));
}

inline Mat4 forward(const std::array<double, 6>& q, const prometheus::kinematics::DhTable& dh) {
  Mat4 t = identity4();
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& r = dh[i];
    t = mul4(t, dh_link(r.a, r.d, r.alpha, q[i] + r.theta_offset));
  }
  return t;
}

// Rotation vector of R_b * R_a^T (small-angle log map via the skew part).
inline std::array<double, 3> rotation_delta(const Mat4& a, const Mat4& b) {
  double m[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += b[i][k] * a[j][k];
      m[i][j] = s;
    }
  const double tr = m[0][0] + m[1][1] + m[2][2];
  const double angle = std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0));
  const double scale = angle < 1e-12 ? 0.5 : angle / (2.0 * std::sin(angle));
  return {scale * (m[2][1] - m[1][2]), scale * (m[0][2] - m[2][0]), scale * (m[1][0] - m[0][1])};
}

// Central finite-difference twist Jacobian, rows: dp/dq then rotation-vector rate.
inline std::array<std::array<double, 6>, 6> fd_jacobian(const std::array<double, 6>& q,
                                                        const prometheus::kinematics::DhTable& dh,
                                                        double h = 1e-7) {
  std::array<std::array<double, 6>, 6> j{};
  for (std::size_t i = 0; i < 6; ++i) {
    auto qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Mat4 tp = forward(qp, dh), tm = forward(qm, dh);
    for (int r = 0; r < 3; ++r) j[r][i] = (tp[r][3] - tm[r][3]) / (2.0 * h);
    const auto w = rotation_delta(tm, tp);
    for (int r = 0; r < 3; ++r) j[3 + r][i] = w[r] / (2.0 * h);
  }
  return j;
}

// Bit-at-a-time CRC-16 with polynomial 0x1021, init 0xFFFF, no reflection, no xorout.
inline std::uint16_t crc16_bitwise(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    for (int bit = 7; bit >= 0; --bit) {
      const bool in = (byte >> bit) & 1u;
      const bool top = (crc >> 15) & 1u;
      crc = static_cast<std::uint16_t>(crc << 1);
      if (in != top) crc ^= 0x1021;
    }
  }
  return crc;
}

inline std::array<double, 6> random_joints(std::mt19937_64& rng, double bound = 3.141592653589793) {
  std::uniform_real_distribution<double> u(-bound, bound);
  std::array<double, 6> q;
  for (auto& v : q) v = u(rng);
  return q;
}

}  // namespace oracle
