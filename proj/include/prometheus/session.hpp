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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "prometheus/config.hpp"
#include "prometheus/teleop_server.hpp"

namespace prometheus::session {

// Client -> server records. Each line on the wire is one JSON object with a "type" field.
struct Hello {
  std::string name;
};
struct PoseDelta {
  std::array<double, 6> d{};  // dx dy dz droll dpitch dyaw, m and rad
};
struct Clutch {
  bool engaged = false;
};
struct GripperTarget {
  double target_opening_mm = 0.0;
};
struct Record {
  bool start = false;
};
struct SelectObject {
  std::string name;
};

using ClientMessage = std::variant<Hello, PoseDelta, Clutch, GripperTarget, Record, SelectObject>;

/// Throws ClientProtocolError with a human-readable reason.
ClientMessage parse_client_message(std::string_view line);
std::string encode_client_message(const ClientMessage& msg);

/// Server -> client records, newline not included.
std::string encode_state(const teleop::TickReport& report, const std::vector<teleop::Event>& events);
std::string encode_episode_end(const gripper::GraspOutcome& outcome);
std::string encode_error(std::string_view reason);

/// Everything the control loop needs from the client since its last tick.
struct PendingInput {
  std::optional<teleop::OperatorCommand> command;
  std::optional<bool> record;
  std::optional<std::string> select_object;

  bool empty() const { return !command && !record && !select_object; }
  void merge(const ClientMessage& msg);
};

/// Latest-wins inbound slot: writers coalesce, the control loop drains once per tick.
class CommandSlot {
 public:
  void put(const ClientMessage& msg);
  PendingInput take();

 private:
  std::mutex mu_;
  PendingInput pending_;
};

/// Bounded outbound queue. On overflow the oldest line is dropped.
class TelemetryQueue {
 public:
  explicit TelemetryQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(std::string line);
  /// Blocks up to `timeout`; empty when nothing arrived.
  std::optional<std::string> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed();
  std::uint64_t dropped() const { return dropped_.load(); }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> lines_;
  std::size_t capacity_;
  bool closed_ = false;
  std::atomic<std::uint64_t> dropped_{0};
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  std::string object = "tomato";
  /// Trajectories finished by record{stop} are written here when set.
  std::optional<std::filesystem::path> record_dir;
  std::size_t telemetry_capacity = 64;
};

/// Single-operator session service. The constructor binds and listens; run()
/// serves one client session and returns when that client disconnects.
class SessionServer {
 public:
  /// Throws BindFailure.
  SessionServer(config::Config cfg, ServeOptions opts);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  std::uint16_t port() const { return port_; }
  const std::string& host() const { return opts_.host; }

  /// Serves exactly one session. Returns the number of ticks run.
  std::uint64_t run();
  /// Unblocks run() from another thread.
  void stop();

 private:
  std::uint64_t serve_client(int fd);

  config::Config cfg_;
  ServeOptions opts_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
};

}  // namespace prometheus::session
