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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails. Reference values come from the test-only oracles, not the library.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "oracles.hpp"
#include "prometheus/cli.hpp"
#include "prometheus/dataset.hpp"
#include "prometheus/gripper_sim.hpp"
#include "prometheus/haptics.hpp"
#include "prometheus/kinematics.hpp"
#include "prometheus/teleop_server.hpp"
#include "prometheus/wire_protocol.hpp"

using namespace prometheus;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s  %-22s %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
  std::fflush(stdout);
  failures += v.pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double norm3(const std::array<double, 3>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Verdict kinematics_check() {
  const auto dh = kinematics::DhTable::ur3();
  std::mt19937_64 rng(1001);
  const auto t0 = Clock::now();
  double worst_pos = 0.0, worst_rot = 0.0;
  std::size_t branches = 0, missing = 0;
  for (int i = 0; i < 1000; ++i) {
    const JointVector q = oracle::random_joints(rng);
    const Pose target = kinematics::forward_kinematics(q, dh);
    const oracle::Mat4 want = oracle::forward(q, dh);
    const auto ik = kinematics::inverse_kinematics(target, dh);
    if (ik.solutions.empty()) ++missing;
    for (const auto& sol : ik.solutions) {
      const oracle::Mat4 got = oracle::forward(sol.q, dh);
      worst_pos = std::max(worst_pos, std::hypot(got[0][3] - want[0][3], got[1][3] - want[1][3], got[2][3] - want[2][3]));
      worst_rot = std::max(worst_rot, norm3(oracle::rotation_delta(want, got)));
      ++branches;
    }
  }
  const double elapsed = seconds_since(t0);
  const bool pass = missing == 0 && worst_pos <= 1e-9 && worst_rot <= 1e-9 && elapsed < 5.0;
  return {pass, fmt("1000 poses, %zu branches, max err %.2e m / %.2e rad, %.3f s", branches, worst_pos, worst_rot,
                    elapsed)};
}

Verdict jacobian_check() {
  const auto dh = kinematics::DhTable::ur3();
  std::mt19937_64 rng(2002);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const JointVector q = oracle::random_joints(rng);
    const auto j = kinematics::jacobian(q, dh);
    const auto fd = oracle::fd_jacobian(q, dh);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) worst = std::max(worst, std::abs(j(r, c) - fd[r][c]));
  }
  return {worst <= 1e-6, fmt("100 configurations, max |J - J_fd| = %.2e", worst)};
}

Verdict sensing_check() {
  const haptics::FsrModel m{1000.0, 20.0};
  const haptics::LinearizerConfig cfg{3.3, 1000.0};
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double worst_ulps = 0.0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const double f = (i == 0 ? 1.0 : u(rng)) * m.f_max;
    const double want = f / m.f_max;
    const double got = haptics::sense(f, cfg, m).normalized;
    if (want > 0.0) worst_ulps = std::max(worst_ulps, std::abs(got - want) / (eps * want));
    sx += want;
    sy += got;
    sxx += want * want;
    sxy += want * got;
    syy += got * got;
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  const double r2 = cov * cov / (vx * vy);
  // Full compression: FSR at its full-scale resistance, gain resistor equal to it.
  const double v_full = std::abs(haptics::linearize(haptics::force_to_resistance(m.f_max, m), cfg));
  const double v_ref_formula = cfg.v_ref * cfg.r_g / m.r_fs;
  const bool pass = worst_ulps <= 4.0 && 1.0 - r2 <= 1e-15 && v_full == 3.3 && v_ref_formula == 3.3;
  return {pass, fmt("100 forces, max %.1f ulp from f/f_max, 1-R^2 = %.1e, |V_OUT| full = %.17g V", worst_ulps, 1.0 - r2,
                    v_full)};
}

Verdict pad_check() {
  const gripper::PadMechanism mech;
  const haptics::HapticsConfig hc;
  std::size_t equal = 0, total = 0;
  for (double f = 0.0; f <= 40.0; f += 0.37) {
    const double a = gripper::pad_transfer(f, 0.0, mech);
    const double b = gripper::pad_transfer(f, mech.pad_length, mech);
    const double na = haptics::sense(a, hc.linearizer, hc.fsr).normalized;
    const double nb = haptics::sense(b, hc.linearizer, hc.fsr).normalized;
    equal += (a == b && na == nb);
    ++total;
  }
  return {equal == total, fmt("%zu/%zu forces give bit-identical readings at both pad ends", equal, total)};
}

wire::MessageBody random_body(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::int32_t> i32(INT32_MIN, INT32_MAX);
  std::uniform_int_distribution<int> u16(0, 0xFFFF), milli(0, 1000);
  switch (kind(rng)) {
    case 0: return wire::ForceReport{i32(rng), static_cast<std::uint16_t>(u16(rng))};
    case 1: return wire::TorqueCommand{i32(rng)};
    case 2: return wire::EncoderReport{i32(rng), static_cast<std::uint16_t>(u16(rng))};
    default:
      return wire::HostTelemetry{static_cast<std::uint16_t>(milli(rng)), i32(rng),
                                 static_cast<std::uint16_t>(u16(rng))};
  }
}

Verdict protocol_check() {
  const std::string check = "123456789";
  const std::vector<std::uint8_t> bytes(check.begin(), check.end());
  const std::uint16_t lib = wire::crc16(bytes);
  const std::uint16_t ref = oracle::crc16_bitwise(bytes);

  std::mt19937_64 rng(4004);
  std::size_t round_trips = 0;
  wire::FrameParser parser;
  for (int i = 0; i < 10000; ++i) {
    const auto body = random_body(rng);
    const auto res = parser.feed(wire::encode(body));
    round_trips += res.errors.empty() && res.bodies.size() == 1 && res.bodies[0] == body;
  }

  // 10^6 bytes of noise with valid frames sprinkled in.
  std::vector<std::uint8_t> stream;
  stream.reserve(1'000'000);
  std::uniform_int_distribution<int> byte(0, 255), coin(0, 19);
  while (stream.size() < 1'000'000) {
    if (coin(rng) == 0) {
      const auto f = wire::encode(random_body(rng));
      stream.insert(stream.end(), f.begin(), f.end());
    } else {
      stream.push_back(static_cast<std::uint8_t>(byte(rng)));
    }
  }
  stream.resize(1'000'000);
  wire::FrameParser whole;
  const auto ref_out = whole.feed(stream);
  bool invariant = true;
  std::uniform_int_distribution<std::size_t> cut(1, 4096);
  for (int trial = 0; trial < 5 && invariant; ++trial) {
    wire::FrameParser p;
    wire::FeedResult acc;
    for (std::size_t at = 0; at < stream.size();) {
      const std::size_t len = std::min(trial == 0 ? std::size_t{1} : cut(rng), stream.size() - at);
      p.feed(std::span(stream).subspan(at, len), acc);
      at += len;
    }
    invariant = acc.bodies == ref_out.bodies && acc.errors == ref_out.errors;
  }
  const bool pass = lib == 0x29B1 && ref == 0x29B1 && round_trips == 10000 && invariant;
  return {pass, fmt("check 0x%04X (oracle 0x%04X), %zu/10000 round trips, fuzz 1e6 B: %zu frames, re-chunk %s", lib, ref,
                    round_trips, ref_out.bodies.size(), invariant ? "invariant" : "DIFFERS")};
}

Verdict dataset_check() {
  using namespace dataset;
  std::mt19937_64 rng(5005);
  std::uniform_real_distribution<double> frac(-1.0, 1.0);
  double worst_std = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vec7 raw;
    for (std::size_t d = 0; d < kActionDim; ++d) raw[d] = frac(rng) * kDefaultActionScale[d];
    const auto s = standardize_action(raw, kDefaultActionScale);
    const Vec7 back = destandardize_action(s.action, kDefaultActionScale);
    for (std::size_t d = 0; d < kActionDim; ++d) worst_std = std::max(worst_std, std::abs(back[d] - raw[d]));
  }

  const teleop::ServerConfig cfg;
  teleop::EpisodePlan plan{gripper::preset("tomato")};
  teleop::ScriptedOperator op(plan, gripper::PolicyKind::ForceCapped, cfg);
  const auto run = teleop::run_episode(cfg, op, plan, "acceptance");
  const auto path = std::filesystem::temp_directory_path() / ("prometheus_acceptance_" + std::to_string(::getpid()) + ".jsonl");
  export_trajectory(run.trajectory, path);
  const bool file_round_trip = import_trajectory(path) == run.trajectory;
  std::filesystem::remove(path);

  const bool bins = discretize(0.0).value() == 0 && discretize(1.0).value() == 255 && discretize(0.5).value() == 128;

  double worst_rec = 0.0;
  const auto rebuilt = run.trajectory.reconstruct_states();
  for (std::size_t k = 0; k < rebuilt.size(); ++k) {
    const auto want = run.trajectory.raw_state(k);
    for (std::size_t d = 0; d < kActionDim; ++d) worst_rec = std::max(worst_rec, std::abs(rebuilt[k][d] - want[d]));
  }

  // Recording ticks per simulated second over a 30 s idle run.
  teleop::ServerConfig idle_cfg;
  idle_cfg.max_ticks = 3000;
  teleop::IdleOperator idle;
  const auto idle_run = teleop::run_episode(idle_cfg, idle, plan);
  std::vector<int> per_second(30, 0);
  bool times_exact = true;
  for (std::size_t k = 0; k < idle_run.reports.size(); ++k) {
    const auto& r = idle_run.reports[k];
    times_exact = times_exact && r.sim_time == static_cast<double>(k) / idle_cfg.control_hz;
    if (r.recording_tick) per_second[static_cast<std::size_t>(k / idle_cfg.control_hz)]++;
  }
  const bool rate = times_exact && std::all_of(per_second.begin(), per_second.end(), [](int n) { return n == 10; });

  const bool pass = worst_std <= 1e-15 && file_round_trip && bins && worst_rec <= 1e-9 && rate;
  return {pass, fmt("std err %.1e, file %s, bins %s, reconstruction %.1e, 10 rec/s %s", worst_std,
                    file_round_trip ? "lossless" : "LOSSY", bins ? "ok" : "BAD", worst_rec, rate ? "ok" : "BAD")};
}

Verdict grasp_check() {
  const teleop::ServerConfig cfg;
  const auto tomato = gripper::preset("tomato");
  const double f_min = tomato.min_holding_force();
  auto run = [&](gripper::PolicyKind kind, double& seconds) {
    teleop::EpisodePlan plan{tomato};
    teleop::ScriptedOperator op(plan, kind, cfg);
    const auto t0 = Clock::now();
    auto r = teleop::run_episode(cfg, op, plan, "grasp");
    seconds = seconds_since(t0);
    return r;
  };
  double t_pos = 0, t_cap = 0, t_again = 0;
  const auto pos = run(gripper::PolicyKind::PositionOnly, t_pos);
  const auto cap = run(gripper::PolicyKind::ForceCapped, t_cap);
  const auto pos2 = run(gripper::PolicyKind::PositionOnly, t_again);
  const auto cap2 = run(gripper::PolicyKind::ForceCapped, t_again);

  const bool damage = pos.outcome.label == gripper::OutcomeLabel::Damage && pos.outcome.peak_force >= 3.0 * f_min;
  const bool success = cap.outcome.label == gripper::OutcomeLabel::Success &&
                       cap.outcome.peak_force <= 0.65 * pos.outcome.peak_force;
  const bool same = pos.trajectory == pos2.trajectory && cap.trajectory == cap2.trajectory &&
                    pos.reports.size() == pos2.reports.size() && cap.reports.size() == cap2.reports.size();
  const bool fast = t_pos < 1.0 && t_cap < 1.0;
  return {damage && success && same && fast,
          fmt("position_only %s %.3f N (%.2fx f_min), force_capped %s %.3f N (%.2fx), deterministic %s, %.3f/%.3f s",
              std::string(gripper::to_string(pos.outcome.label)).c_str(), pos.outcome.peak_force,
              pos.outcome.peak_force / f_min, std::string(gripper::to_string(cap.outcome.label)).c_str(),
              cap.outcome.peak_force, cap.outcome.peak_force / pos.outcome.peak_force, same ? "yes" : "NO", t_pos,
              t_cap)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism_check() {
  const config::Config cfg;
  const auto root = std::filesystem::temp_directory_path() / ("prometheus_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  cli::simulate(cfg, {"tomato", "force_capped", 5, 7, root / "a"});
  cli::simulate(cfg, {"tomato", "force_capped", 5, 7, root / "b"});
  std::size_t files = 0, same = 0;
  for (const auto& entry : std::filesystem::directory_iterator(root / "a")) {
    ++files;
    const auto other = root / "b" / entry.path().filename();
    same += std::filesystem::exists(other) && slurp(entry.path()) == slurp(other);
  }
  std::filesystem::remove_all(root);
  return {files == 6 && same == files, fmt("%zu/%zu files byte-identical (seed 7, 5 episodes + summary)", same, files)};
}

}  // namespace

int main() {
  report("kinematics", kinematics_check);
  report("jacobian", jacobian_check);
  report("sensing-chain", sensing_check);
  report("pad-mechanism", pad_check);
  report("protocol", protocol_check);
  report("dataset", dataset_check);
  report("grasp-phenomenology", grasp_check);
  report("determinism", determinism_check);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
