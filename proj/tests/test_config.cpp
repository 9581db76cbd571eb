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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "prometheus/config.hpp"
#include "prometheus/error.hpp"

using namespace prometheus;

namespace {

const std::filesystem::path kData = PROMETHEUS_DATA_DIR;

Errc code_of(std::string_view text) {
  try {
    config::parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("shipped config matches the built-in defaults") {
  const config::Config file = config::load_config(kData / "prometheus.conf");
  const config::Config builtin;
  const auto& a = file.server;
  const auto& b = builtin.server;
  CHECK(a.control_hz == b.control_hz);
  CHECK(a.record_decimation == b.record_decimation);
  CHECK(a.workspace_radius == b.workspace_radius);
  CHECK(a.haptics.linearizer.v_ref == b.haptics.linearizer.v_ref);
  CHECK(a.haptics.fsr.f_max == b.haptics.fsr.f_max);
  CHECK(a.gripper.pad.preload_f == b.gripper.pad.preload_f);
  CHECK(file.policy.squeeze_depth == builtin.policy.squeeze_depth);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.dh.rows()[i].a == b.dh.rows()[i].a);
    CHECK(a.dh.rows()[i].d == b.dh.rows()[i].d);
    CHECK(a.dh.rows()[i].alpha == b.dh.rows()[i].alpha);
  }
  REQUIRE(file.objects.size() == builtin.objects.size());
  for (const auto& [name, obj] : builtin.objects) {
    const auto& other = file.object(name);
    CHECK(other.free_size == obj.free_size);
    CHECK(other.stiffness == obj.stiffness);
    CHECK(other.damage_threshold == obj.damage_threshold);
    CHECK(other.mass == obj.mass);
    CHECK(other.friction_mu == obj.friction_mu);
  }
}

TEST_CASE("sections override individual values") {
  const auto cfg = config::parse_config(
      "[haptics]\n v_ref = 5.0 \nk_t=0.4\n"
      "[object tomato]\ndamage = 12\n"
      "[object mug]\nfree_size = 80\nstiffness = 50\nmass = 0.3\nmu = 0.5\n"
      "[policy]\nforce_cap = 0.2\n");
  CHECK(cfg.server.haptics.linearizer.v_ref == 5.0);
  CHECK(cfg.server.haptics.k_t == 0.4);
  CHECK(cfg.server.haptics.fsr.f_max == 20.0);
  CHECK(cfg.object("tomato").damage_threshold == 12.0);
  CHECK(cfg.object("tomato").free_size == 60.0);
  CHECK(cfg.object("mug").free_size == 80.0);
  CHECK(cfg.object("mug").name == "mug");
  CHECK(cfg.policy.force_cap == 0.2);
}

TEST_CASE("malformed config is rejected") {
  CHECK(code_of("[server]\ncontrol_hz = fast\n") == Errc::InvalidConfig);
  CHECK(code_of("[server]\nbogus = 1\n") == Errc::InvalidConfig);
  CHECK(code_of("v_ref = 1\n") == Errc::InvalidConfig);
  CHECK(code_of("[nowhere]\n") == Errc::InvalidConfig);
  CHECK(code_of("[haptics\n") == Errc::InvalidConfig);
  CHECK(code_of("[server]\nrecord_decimation = 3\n") == Errc::InvalidConfig);
  CHECK(code_of("[object tomato]\nmass = -1\n") == Errc::InvalidConfig);
  CHECK(code_of("[server]\ndh_file = /does/not/exist.dh\n") == Errc::Io);
  CHECK_THROWS_AS(config::Config{}.object("anvil"), Error);
}

TEST_CASE("environment variable supplies the path when no flag is given") {
  const auto conf = (kData / "prometheus.conf").string();
  ::setenv(config::kConfigEnv, conf.c_str(), 1);
  CHECK(config::resolve_config_path(std::nullopt) == std::filesystem::path(conf));
  CHECK(config::resolve_config_path(std::filesystem::path("x.conf")) == std::filesystem::path("x.conf"));
  ::unsetenv(config::kConfigEnv);
  CHECK_FALSE(config::resolve_config_path(std::nullopt).has_value());
  CHECK(config::load_effective(std::nullopt).server.control_hz == 100);
}
