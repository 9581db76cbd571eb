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

#include "prometheus/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "prometheus/error.hpp"

namespace prometheus::config {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(Errc::InvalidConfig, "config line " + std::to_string(line) + ": " + what);
}

double number(std::string_view v, std::size_t line) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) fail(line, "not a number: " + std::string(v));
  return out;
}

int integer(std::string_view v, std::size_t line) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) fail(line, "not an integer: " + std::string(v));
  return out;
}

using Setter = std::function<void(std::string_view, std::size_t)>;
using Table = std::map<std::string, Setter, std::less<>>;

Setter real(double& field) {
  return [&field](std::string_view v, std::size_t line) { field = number(v, line); };
}

Setter whole(int& field) {
  return [&field](std::string_view v, std::size_t line) { field = integer(v, line); };
}

}  // namespace

Config::Config() {
  for (const auto& name : gripper::preset_names()) objects.emplace(name, gripper::preset(name));
}

const gripper::ObjectModel& Config::object(std::string_view name) const {
  const auto it = objects.find(std::string(name));
  if (it == objects.end()) throw Error(Errc::UnknownObject, "unknown object: " + std::string(name));
  return it->second;
}

Config parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  Config cfg;
  auto& s = cfg.server;
  std::optional<std::filesystem::path> dh_file;
  std::string max_ticks_text;

  const Table server{
      {"control_hz", whole(s.control_hz)},
      {"record_decimation", whole(s.record_decimation)},
      {"max_joint_vel", real(s.max_joint_vel)},
      {"workspace_radius", real(s.workspace_radius)},
      {"lift_height", real(s.lift_height)},
      {"capture_radius", real(s.capture_radius)},
      {"lift_detect", real(s.lift_detect)},
      {"telemetry_hz", real(s.telemetry_hz)},
      {"max_ticks",
       [&s](std::string_view v, std::size_t line) {
         const int n = integer(v, line);
         if (n <= 0) fail(line, "max_ticks must be positive");
         s.max_ticks = static_cast<std::uint64_t>(n);
       }},
      {"mode",
       [&s](std::string_view v, std::size_t line) {
         const auto m = teleop::mode_from_string(v);
         if (!m) fail(line, "unknown mode: " + std::string(v));
         s.mode = *m;
       }},
      {"joint_limit",
       [&s](std::string_view v, std::size_t line) {
         s.limits = kinematics::JointLimits::symmetric(number(v, line));
       }},
      {"dh_file", [&dh_file](std::string_view v, std::size_t) { dh_file = std::filesystem::path(std::string(v)); }},
  };
  auto& h = s.haptics;
  const Table haptics{
      {"v_ref", real(h.linearizer.v_ref)}, {"r_g", real(h.linearizer.r_g)}, {"r_fs", real(h.fsr.r_fs)},
      {"f_max", real(h.fsr.f_max)},        {"k_t", real(h.k_t)},
  };
  auto& g = s.gripper;
  const Table gripper_keys{
      {"stroke", real(g.stroke)},          {"max_speed", real(g.max_speed)},
      {"spring_k", real(g.pad.spring_k)},  {"spring_count", whole(g.pad.spring_count)},
      {"preload", real(g.pad.preload_f)},  {"pad_length", real(g.pad.pad_length)},
  };
  auto& p = cfg.policy;
  const Table policy{
      {"squeeze_depth", real(p.squeeze_depth)},
      {"closing_speed", real(p.closing_speed)},
      {"force_cap", [&p](std::string_view v, std::size_t line) { p.force_cap = number(v, line); }},
  };

  const Table* section = nullptr;
  Table object_keys;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name == "server") {
        section = &server;
      } else if (name == "haptics") {
        section = &haptics;
      } else if (name == "gripper") {
        section = &gripper_keys;
      } else if (name == "policy") {
        section = &policy;
      } else if (name.starts_with("object ")) {
        const std::string obj_name(trim(name.substr(7)));
        if (obj_name.empty()) fail(line_no, "object section needs a name");
        auto [it, inserted] = cfg.objects.try_emplace(obj_name);
        if (inserted) it->second.name = obj_name;
        auto& o = it->second;
        object_keys = Table{
            {"free_size", real(o.free_size)},     {"stiffness", real(o.stiffness)},
            {"damage", real(o.damage_threshold)}, {"mass", real(o.mass)},
            {"mu", real(o.friction_mu)},
        };
        section = &object_keys;
      } else {
        fail(line_no, "unknown section: " + std::string(name));
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    if (section == nullptr) fail(line_no, "key outside a section");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = section->find(key);
    if (it == section->end()) fail(line_no, "unknown key: " + std::string(key));
    it->second(value, line_no);
  }

  if (dh_file) {
    const auto path = dh_file->is_absolute() ? *dh_file : base_dir / *dh_file;
    s.dh = kinematics::DhTable::load(path);
  }
  try {
    s.validate();
    s.gripper.pad.validate();
    for (const auto& [name, obj] : cfg.objects) obj.validate();
  } catch (const Error& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::nullopt;
}

Config load_effective(const std::optional<std::filesystem::path>& explicit_path) {
  const auto path = resolve_config_path(explicit_path);
  return path ? load_config(*path) : Config{};
}

}  // namespace prometheus::config
