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

#include "prometheus/session.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "prometheus/dataset.hpp"
#include "prometheus/error.hpp"

namespace prometheus::session {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxLine = 64 * 1024;

[[noreturn]] void reject(const std::string& reason) { throw Error(Errc::ClientProtocolError, reason); }

double finite_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) reject(std::string("missing numeric field '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) reject(std::string("non-finite field '") + key + "'");
  return v;
}

std::string string_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) reject(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

ClientMessage parse_client_message(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    reject("malformed JSON");
  }
  if (!j.is_object()) reject("message is not an object");
  const std::string type = string_field(j, "type");
  if (type == "hello") return Hello{j.contains("name") ? string_field(j, "name") : std::string{}};
  if (type == "pose_delta") {
    PoseDelta p;
    const char* keys[] = {"dx", "dy", "dz", "droll", "dpitch", "dyaw"};
    for (std::size_t i = 0; i < 6; ++i) p.d[i] = j.contains(keys[i]) ? finite_number(j, keys[i]) : 0.0;
    return p;
  }
  if (type == "clutch") {
    const auto it = j.find("engaged");
    if (it == j.end() || !it->is_boolean()) reject("missing boolean field 'engaged'");
    return Clutch{it->get<bool>()};
  }
  if (type == "gripper") return GripperTarget{finite_number(j, "target_opening_mm")};
  if (type == "record") {
    const std::string action = string_field(j, "action");
    if (action != "start" && action != "stop") reject("record action must be start or stop");
    return Record{action == "start"};
  }
  if (type == "select_object") return SelectObject{string_field(j, "name")};
  reject("unknown message type '" + type + "'");
}

std::string encode_client_message(const ClientMessage& msg) {
  json j = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) {
          return {{"type", "hello"}, {"name", m.name}};
        } else if constexpr (std::is_same_v<T, PoseDelta>) {
          return {{"type", "pose_delta"}, {"dx", m.d[0]},     {"dy", m.d[1]},
                  {"dz", m.d[2]},         {"droll", m.d[3]}, {"dpitch", m.d[4]}, {"dyaw", m.d[5]}};
        } else if constexpr (std::is_same_v<T, Clutch>) {
          return {{"type", "clutch"}, {"engaged", m.engaged}};
        } else if constexpr (std::is_same_v<T, GripperTarget>) {
          return {{"type", "gripper"}, {"target_opening_mm", m.target_opening_mm}};
        } else if constexpr (std::is_same_v<T, Record>) {
          return {{"type", "record"}, {"action", m.start ? "start" : "stop"}};
        } else {
          return {{"type", "select_object"}, {"name", m.name}};
        }
      },
      msg);
  return j.dump();
}

std::string encode_state(const teleop::TickReport& r, const std::vector<teleop::Event>& events) {
  json ev = json::array();
  for (const auto e : events) ev.push_back(std::string(teleop::to_string(e)));
  const json j{{"type", "state"},
               {"tick", r.tick},
               {"joints", r.joints},
               {"ee_pose", r.ee_pose.to_array()},
               {"opening_mm", r.opening_mm},
               {"force_norm", r.force.normalized},
               {"events", std::move(ev)}};
  return j.dump();
}

std::string encode_episode_end(const gripper::GraspOutcome& outcome) {
  return json{{"type", "episode_end"},
              {"outcome", std::string(gripper::to_string(outcome.label))},
              {"peak_force", outcome.peak_force}}
      .dump();
}

std::string encode_error(std::string_view reason) {
  return json{{"type", "error"}, {"reason", std::string(reason)}}.dump();
}

void PendingInput::merge(const ClientMessage& msg) {
  std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        teleop::OperatorCommand c;
        if constexpr (std::is_same_v<T, PoseDelta>) {
          c.pose_delta = m.d;
        } else if constexpr (std::is_same_v<T, Clutch>) {
          c.clutch = m.engaged;
        } else if constexpr (std::is_same_v<T, GripperTarget>) {
          c.gripper_target_mm = m.target_opening_mm;
        } else if constexpr (std::is_same_v<T, Record>) {
          record = m.start;
          return;
        } else if constexpr (std::is_same_v<T, SelectObject>) {
          select_object = m.name;
          return;
        } else {
          return;  // hello carries nothing for the loop
        }
        if (command) {
          command->merge(c);
        } else {
          command = c;
        }
      },
      msg);
}

void CommandSlot::put(const ClientMessage& msg) {
  std::lock_guard lock(mu_);
  pending_.merge(msg);
}

PendingInput CommandSlot::take() {
  std::lock_guard lock(mu_);
  return std::exchange(pending_, PendingInput{});
}

void TelemetryQueue::push(std::string line) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (lines_.size() >= capacity_) {
      lines_.pop_front();
      ++dropped_;
    }
    lines_.push_back(std::move(line));
  }
  cv_.notify_one();
}

std::optional<std::string> TelemetryQueue::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [this] { return closed_ || !lines_.empty(); });
  if (lines_.empty()) return std::nullopt;
  std::string line = std::move(lines_.front());
  lines_.pop_front();
  return line;
}

bool TelemetryQueue::closed() {
  std::lock_guard lock(mu_);
  return closed_;
}

void TelemetryQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

SessionServer::SessionServer(config::Config cfg, ServeOptions opts) : cfg_(std::move(cfg)), opts_(std::move(opts)) {
  cfg_.server.validate();
  cfg_.object(opts_.object);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::BindFailure, std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(opts_.port);
  if (::inet_pton(AF_INET, opts_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(Errc::BindFailure, "invalid host " + opts_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 4) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw Error(Errc::BindFailure, opts_.host + ":" + std::to_string(opts_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

SessionServer::~SessionServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void SessionServer::stop() { stopping_ = true; }

std::uint64_t SessionServer::run() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    return serve_client(fd);
  }
  return 0;
}

std::uint64_t SessionServer::serve_client(int fd) {
  const teleop::ServerConfig& cfg = cfg_.server;
  CommandSlot slot;
  TelemetryQueue queue(opts_.telemetry_capacity);
  std::mutex write_mu;
  std::atomic<bool> gone{false};
  std::atomic<bool> active{true};

  auto write_line = [&](std::string_view line) {
    std::lock_guard lock(write_mu);
    return send_all(fd, std::string(line) + "\n");
  };

  std::thread reader([&] {
    std::string buf;
    char chunk[4096];
    while (!gone) {
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (std::size_t nl; (nl = buf.find('\n', start)) != std::string::npos; start = nl + 1) {
        std::string_view line(buf.data() + start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        try {
          slot.put(parse_client_message(line));
        } catch (const Error& e) {
          write_line(encode_error(e.what()));
          gone = true;
          ::shutdown(fd, SHUT_RDWR);
          return;
        }
      }
      buf.erase(0, start);
      if (buf.size() > kMaxLine) {
        write_line(encode_error("line too long"));
        ::shutdown(fd, SHUT_RDWR);
        break;
      }
    }
    gone = true;
  });

  std::thread writer([&] {
    bool broken = false;
    while (true) {
      if (auto line = queue.pop(std::chrono::milliseconds(100))) {
        // After a failed write keep draining so the control loop never blocks on us.
        broken = broken || !write_line(*line);
      } else if (queue.closed()) {
        break;
      }
    }
  });

  // Turns away anyone else while this session is active.
  std::thread gatekeeper([&] {
    while (active) {
      pollfd p{listen_fd_, POLLIN, 0};
      if (::poll(&p, 1, 50) <= 0) continue;
      const int other = ::accept(listen_fd_, nullptr, nullptr);
      if (other < 0) continue;
      send_all(other, encode_error("another operator session is active") + "\n");
      ::shutdown(other, SHUT_RDWR);
      ::close(other);
    }
  });

  const Eigen::Vector3d home = kinematics::forward_kinematics(cfg.home, cfg.dh).position;
  const teleop::EpisodePlan plan{};
  auto fresh_state = [&](const gripper::ObjectModel& obj) {
    return teleop::SessionState::initial(cfg, obj, home + plan.object_offset);
  };
  gripper::ObjectModel object = cfg_.object(opts_.object);
  teleop::SessionState state = fresh_state(object);

  const int publish_every = std::max(1, static_cast<int>(std::floor(cfg.control_hz / cfg.telemetry_hz)));
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(cfg.dt()));
  std::optional<dataset::Recorder> recorder;
  std::vector<gripper::TraceEntry> trace;
  std::vector<teleop::Event> pending_events;
  int episodes = 0;
  std::uint64_t ticks = 0;

  auto finish_recording = [&] {
    if (!recorder) return;
    const auto outcome = gripper::classify_outcome(trace, object);
    const std::string id = "live-" + std::to_string(episodes++);
    auto traj = std::move(*recorder).finish(id, object.name, outcome);
    traj.control_hz = cfg.control_hz;
    traj.record_hz = cfg.record_hz();
    traj.meta["source"] = "live";
    if (opts_.record_dir) dataset::export_trajectory(traj, *opts_.record_dir / (id + ".jsonl"));
    queue.push(encode_episode_end(outcome));
    recorder.reset();
    trace.clear();
  };

  auto next = std::chrono::steady_clock::now();
  while (!gone && !stopping_) {
    PendingInput in = slot.take();
    if (in.select_object) {
      const auto it = cfg_.objects.find(*in.select_object);
      if (it == cfg_.objects.end()) {
        queue.push(encode_error("unknown object '" + *in.select_object + "'"));
      } else {
        recorder.reset();
        trace.clear();
        object = it->second;
        state = fresh_state(object);
      }
    }
    if (in.record) {
      if (*in.record && !recorder) {
        recorder.emplace(cfg.gripper.stroke, cfg.action_scale);
      } else if (!*in.record) {
        finish_recording();
      }
    }

    auto [next_state, report] = teleop::tick(std::move(state), in.command, cfg);
    state = std::move(next_state);
    ++ticks;
    pending_events.insert(pending_events.end(), report.events.begin(), report.events.end());
    if (recorder) {
      trace.push_back({report.contact_force, report.opening_mm, report.lifted});
      if (report.recording_tick) recorder->record(teleop::observation_of(report, cfg));
    }
    if (report.tick % static_cast<std::uint64_t>(publish_every) == 0) {
      queue.push(encode_state(report, pending_events));
      pending_events.clear();
    }

    next += period;
    std::this_thread::sleep_until(next);
  }

  queue.close();
  writer.join();
  gone = true;
  ::shutdown(fd, SHUT_RDWR);
  reader.join();
  active = false;
  gatekeeper.join();
  ::close(fd);
  return ticks;
}

}  // namespace prometheus::session
