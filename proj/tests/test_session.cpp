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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include <json.hpp>

#include "prometheus/error.hpp"
#include "prometheus/session.hpp"

using namespace prometheus;
using namespace prometheus::session;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

/// Minimal blocking line client.
class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  }
  ~Client() { close(); }

  void send(const std::string& line) {
    const std::string data = line + "\n";
    ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
  }
  void send(const ClientMessage& msg) { send(encode_client_message(msg)); }

  /// Next line, or empty on EOF or timeout.
  std::optional<json> read(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
    const auto deadline = Clock::now() + timeout;
    while (true) {
      if (const auto nl = buf_.find('\n'); nl != std::string::npos) {
        const std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return json::parse(line);
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      if (left <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, static_cast<int>(left)) <= 0) return std::nullopt;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  /// Reads until a record of `type` arrives.
  std::optional<json> read_until(const std::string& type, std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
      auto j = read(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
      if (!j) return std::nullopt;
      if ((*j)["type"] == type) return j;
    }
    return std::nullopt;
  }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
  std::string buf_;
};

/// Runs the server on a thread and always stops and joins it, even when a check aborts the test.
struct Running {
  explicit Running(SessionServer& s) : server(s), thread([this] { ticks = server.run(); }) {}
  ~Running() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  void join() { thread.join(); }

  SessionServer& server;
  std::uint64_t ticks = 0;
  std::thread thread;
};

}  // namespace

TEST_CASE("client messages round-trip through the wire encoding") {
  const std::vector<ClientMessage> msgs{Hello{"console"},  PoseDelta{{0.01, -0.02, 0.0, 0.1, 0.0, -0.3}},
                                        Clutch{true},      GripperTarget{12.5},
                                        Record{false},     SelectObject{"egg"}};
  for (const auto& m : msgs) {
    const auto back = parse_client_message(encode_client_message(m));
    CHECK(back.index() == m.index());
  }
  const auto p = std::get<PoseDelta>(parse_client_message(R"({"type":"pose_delta","dx":0.01,"dyaw":-0.3})"));
  CHECK(p.d == std::array<double, 6>{0.01, 0, 0, 0, 0, -0.3});
}

TEST_CASE("malformed client messages are rejected") {
  for (const char* bad : {"not json", "[1,2]", R"({"name":"x"})", R"({"type":"warp"})",
                          R"({"type":"clutch","engaged":"yes"})", R"({"type":"gripper"})",
                          R"({"type":"record","action":"pause"})", R"({"type":"pose_delta","dx":"1"})"}) {
    CAPTURE(bad);
    try {
      parse_client_message(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ClientProtocolError);
    }
  }
}

TEST_CASE("server records carry the documented fields") {
  teleop::TickReport r;
  r.tick = 42;
  r.opening_mm = 30.0;
  r.force.normalized = 0.25;
  const json state = json::parse(encode_state(r, {teleop::Event::Clamp}));
  CHECK(state["type"] == "state");
  CHECK(state["tick"] == 42);
  CHECK(state["joints"].size() == 6);
  CHECK(state["ee_pose"].size() == 7);
  CHECK(state["force_norm"] == 0.25);
  CHECK(state["events"] == json::array({"clamp"}));
  const json end = json::parse(encode_episode_end({gripper::OutcomeLabel::Damage, 9.5, 3}));
  CHECK(end["outcome"] == "damage");
  CHECK(end["peak_force"] == 9.5);
  CHECK(json::parse(encode_error("nope"))["reason"] == "nope");
}

TEST_CASE("command slot coalesces latest-wins") {
  CommandSlot slot;
  slot.put(PoseDelta{{0.01, 0, 0, 0, 0, 0}});
  slot.put(PoseDelta{{0.02, 0, 0, 0, 0, 0}});
  slot.put(GripperTarget{50});
  slot.put(GripperTarget{20});
  slot.put(Record{true});
  auto in = slot.take();
  REQUIRE(in.command);
  CHECK((*in.command->pose_delta)[0] == doctest::Approx(0.03));
  CHECK(*in.command->gripper_target_mm == 20.0);
  CHECK(*in.record);
  CHECK(slot.take().empty());
}

TEST_CASE("telemetry queue drops the oldest line on overflow") {
  TelemetryQueue q(3);
  for (int i = 0; i < 5; ++i) q.push(std::to_string(i));
  CHECK(q.dropped() == 2);
  CHECK(*q.pop(std::chrono::milliseconds(0)) == "2");
  CHECK(*q.pop(std::chrono::milliseconds(0)) == "3");
  CHECK(*q.pop(std::chrono::milliseconds(0)) == "4");
  CHECK_FALSE(q.pop(std::chrono::milliseconds(0)));
  q.close();
  q.push("late");
  CHECK_FALSE(q.pop(std::chrono::milliseconds(0)));
}

TEST_CASE("occupied port fails to bind") {
  SessionServer first(config::Config{}, {});
  ServeOptions opts;
  opts.port = first.port();
  try {
    SessionServer second(config::Config{}, opts);
    FAIL("second bind succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BindFailure);
  }
}

TEST_CASE("scripted client drives a live session") {
  SessionServer server(config::Config{}, {});
  REQUIRE(server.port() != 0);
  Running loop(server);

  Client client(server.port());
  client.send(Hello{"test"});
  const auto t0 = Clock::now();
  int states = 0;
  for (int i = 0; i < 10; ++i) {
    auto s = client.read_until("state", std::chrono::milliseconds(1000));
    REQUIRE(s);
    states++;
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  CHECK(states / elapsed >= 20.0);

  {
    Client intruder(server.port());
    const auto rejected = intruder.read_until("error", std::chrono::milliseconds(2000));
    REQUIRE(rejected);
    CHECK((*rejected)["reason"].get<std::string>().find("active") != std::string::npos);
    CHECK_FALSE(intruder.read(std::chrono::milliseconds(500)));
  }

  // Move down onto the tomato and squeeze it.
  client.send(Record{true});
  client.send(Clutch{true});
  client.send(PoseDelta{{0, 0, -0.10, 0, 0, 0}});
  client.send(GripperTarget{50});
  double force = 0.0;
  double opening = 85.0;
  bool saw_tick_increase = true;
  std::int64_t last_tick = -1;
  const auto deadline = Clock::now() + std::chrono::seconds(8);
  while (Clock::now() < deadline && force <= 0.0) {
    auto s = client.read_until("state", std::chrono::milliseconds(1000));
    REQUIRE(s);
    force = (*s)["force_norm"].get<double>();
    opening = (*s)["opening_mm"].get<double>();
    const auto t = (*s)["tick"].get<std::int64_t>();
    saw_tick_increase = saw_tick_increase && t > last_tick;
    last_tick = t;
  }
  CHECK(saw_tick_increase);
  CHECK(force > 0.0);
  CHECK(opening < 60.0);

  client.send(Record{false});
  const auto end = client.read_until("episode_end", std::chrono::milliseconds(2000));
  REQUIRE(end);
  CHECK((*end)["peak_force"].get<double>() > 0.0);

  client.send(SelectObject{"anvil"});
  const auto err = client.read_until("error", std::chrono::milliseconds(2000));
  REQUIRE(err);

  client.close();
  loop.join();
  CHECK(loop.ticks > 0);
}

TEST_CASE("malformed input ends the session with a reason") {
  SessionServer server(config::Config{}, {});
  Running loop(server);
  Client client(server.port());
  client.send(std::string("{\"type\":\"teleport\"}"));
  const auto err = client.read_until("error", std::chrono::milliseconds(2000));
  REQUIRE(err);
  CHECK((*err)["reason"].get<std::string>().find("teleport") != std::string::npos);
  // Drain until the server hangs up.
  while (client.read(std::chrono::milliseconds(2000))) {
  }
  loop.join();
}

TEST_CASE("stop() releases a server waiting for a client") {
  SessionServer server(config::Config{}, {});
  Running loop(server);
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  loop.join();
  CHECK(true);
}
