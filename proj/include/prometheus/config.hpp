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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "prometheus/gripper_sim.hpp"
#include "prometheus/teleop_server.hpp"

namespace prometheus::config {

inline constexpr const char* kConfigEnv = "PROMETHEUS_CONFIG";

/// Everything a run needs besides its seed. Defaults mirror the built-in presets.
struct Config {
  teleop::ServerConfig server;
  gripper::PolicyParams policy;
  std::map<std::string, gripper::ObjectModel> objects;

  Config();

  /// Throws UnknownObject.
  const gripper::ObjectModel& object(std::string_view name) const;
};

/// Parses key=value text with [section] headers:
///   [server] [haptics] [gripper] [policy] [object NAME]
/// `base_dir` resolves a relative `dh_file`. Throws InvalidConfig with the line number.
Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Throws Io when the file cannot be read.
Config load_config(const std::filesystem::path& path);

/// Explicit path first, then $PROMETHEUS_CONFIG, otherwise none (built-in defaults).
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path);

/// Resolves and loads, or returns defaults.
Config load_effective(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace prometheus::config
