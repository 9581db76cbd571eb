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

#include "prometheus/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "prometheus/error.hpp"

namespace prometheus::dataset {

using nlohmann::json;

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

template <std::size_t N>
std::array<double, N> read_array(const json& j) {
  if (!j.is_array() || j.size() != N) throw Error(Errc::CorruptRecord, "expected array of " + std::to_string(N));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<double>();
  return out;
}

json step_record(std::size_t k, const Step& s) {
  json j;
  j["k"] = k;
  j["joints"] = s.obs.joints;
  j["ee_pose"] = s.obs.ee_pose.to_array();
  j["gripper_pos"] = s.obs.gripper_pos_norm;
  j["force"] = s.obs.force_norm;
  j["wrist_image"] = optional_string(s.obs.wrist_image_ref);
  j["side_image"] = optional_string(s.obs.side_image_ref);
  j["action"] = s.action ? json(s.action->values) : json(nullptr);
  j["clamped"] = s.clamped;
  return j;
}

Step parse_step(const json& j, std::size_t expect_k) {
  if (j.at("k").get<std::size_t>() != expect_k) throw Error(Errc::CorruptRecord, "step index out of sequence");
  Step s;
  s.obs.joints = read_array<6>(j.at("joints"));
  s.obs.ee_pose = Pose::from_array(read_array<7>(j.at("ee_pose")));
  s.obs.gripper_pos_norm = j.at("gripper_pos").get<double>();
  s.obs.force_norm = j.at("force").get<double>();
  if (!in_unit(s.obs.gripper_pos_norm) || !in_unit(s.obs.force_norm)) {
    throw Error(Errc::CorruptRecord, "normalized observation outside [0, 1]");
  }
  s.obs.wrist_image_ref = read_optional_string(j.at("wrist_image"));
  s.obs.side_image_ref = read_optional_string(j.at("side_image"));
  if (const json& a = j.at("action"); !a.is_null()) {
    Action act{read_array<kActionDim>(a)};
    for (double v : act.values) {
      if (!(v >= -1.0 && v <= 1.0)) throw Error(Errc::CorruptRecord, "action component outside [-1, 1]");
    }
    s.action = act;
  }
  s.clamped = j.at("clamped").get<bool>();
  return s;
}

}  // namespace

bool Observation::operator==(const Observation& other) const {
  return joints == other.joints && ee_pose.to_array() == other.ee_pose.to_array() &&
         gripper_pos_norm == other.gripper_pos_norm && force_norm == other.force_norm &&
         wrist_image_ref == other.wrist_image_ref && side_image_ref == other.side_image_ref;
}

StandardizedAction standardize_action(const Vec7& raw, const Vec7& a_max) {
  StandardizedAction out;
  for (std::size_t i = 0; i < kActionDim; ++i) {
    if (!(a_max[i] > 0.0)) throw Error(Errc::NonPositiveScale, "action scale must be positive");
    const double v = raw[i] / a_max[i];
    if (v > 1.0 || v < -1.0) out.clamped = true;
    out.action.values[i] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

Vec7 destandardize_action(const Action& action, const Vec7& a_max) {
  Vec7 raw{};
  for (std::size_t i = 0; i < kActionDim; ++i) raw[i] = action.values[i] * a_max[i];
  return raw;
}

BinIndex::BinIndex(int value) {
  if (value < 0 || value >= kBins) throw Error(Errc::OutOfRange, "bin index outside 0..255");
  value_ = static_cast<std::uint8_t>(value);
}

BinIndex discretize(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::OutOfRange, "discretize expects a value in [0, 1]");
  return BinIndex(std::min(static_cast<int>(std::floor(v * kBins)), kBins - 1));
}

std::vector<Vec7> compute_deltas(std::span<const RawState> states) {
  if (states.size() < 2) throw Error(Errc::TooShort, "need at least two states for a delta");
  std::vector<Vec7> out(states.size() - 1);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    for (std::size_t i = 0; i < kActionDim; ++i) out[k][i] = states[k + 1][i] - states[k][i];
  }
  return out;
}

RawState Trajectory::raw_state(std::size_t k) const {
  const Observation& o = steps.at(k).obs;
  RawState s{};
  std::copy(o.joints.begin(), o.joints.end(), s.begin());
  s[6] = o.gripper_pos_norm * stroke_mm;
  return s;
}

std::vector<RawState> Trajectory::reconstruct_states() const {
  std::vector<RawState> out;
  if (steps.empty()) return out;
  out.push_back(raw_state(0));
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    const Vec7 d = destandardize_action(*steps[k].action, a_max);
    RawState next = out.back();
    for (std::size_t i = 0; i < kActionDim; ++i) next[i] += d[i];
    out.push_back(next);
  }
  return out;
}

Trajectory build_trajectory(std::vector<Observation> observations, const Vec7& a_max, double stroke_mm) {
  Trajectory t;
  t.a_max = a_max;
  t.stroke_mm = stroke_mm;
  for (auto& o : observations) {
    if (!in_unit(o.gripper_pos_norm) || !in_unit(o.force_norm)) {
      throw Error(Errc::OutOfRange, "normalized observation outside [0, 1]");
    }
    t.steps.push_back({std::move(o), std::nullopt, false});
  }
  if (t.steps.size() < 2) return t;

  std::vector<RawState> raw;
  raw.reserve(t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k) raw.push_back(t.raw_state(k));
  const auto deltas = compute_deltas(raw);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const auto std_action = standardize_action(deltas[k], a_max);
    t.steps[k].action = std_action.action;
    t.steps[k].clamped = std_action.clamped;
  }
  return t;
}

void export_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  json header;
  header["schema"] = kSchemaVersion;
  header["episode_id"] = traj.episode_id;
  header["task"] = traj.task;
  header["control_hz"] = traj.control_hz;
  header["record_hz"] = traj.record_hz;
  header["stroke_mm"] = traj.stroke_mm;
  header["a_max"] = traj.a_max;
  header["outcome"] = std::string(gripper::to_string(traj.outcome));
  header["peak_force"] = traj.peak_force;
  header["steps"] = traj.steps.size();
  header["meta"] = traj.meta;
  out << header.dump() << '\n';
  for (std::size_t k = 0; k < traj.steps.size(); ++k) out << step_record(k, traj.steps[k]).dump() << '\n';
  out.flush();
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Trajectory import_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::CorruptRecord, path.string() + ": missing header");

  Trajectory t;
  std::size_t expected_steps = 0;
  try {
    const json header = json::parse(line);
    const auto schema = header.at("schema").get<std::string>();
    if (schema != kSchemaVersion) {
      throw Error(Errc::SchemaVersionMismatch, "file schema '" + schema + "', expected " + kSchemaVersion);
    }
    t.episode_id = header.at("episode_id").get<std::string>();
    t.task = header.at("task").get<std::string>();
    t.control_hz = header.at("control_hz").get<int>();
    t.record_hz = header.at("record_hz").get<int>();
    t.stroke_mm = header.at("stroke_mm").get<double>();
    t.a_max = read_array<kActionDim>(header.at("a_max"));
    const auto label = gripper::outcome_from_string(header.at("outcome").get<std::string>());
    if (!label) throw Error(Errc::CorruptRecord, "unknown outcome label");
    t.outcome = *label;
    t.peak_force = header.at("peak_force").get<double>();
    expected_steps = header.at("steps").get<std::size_t>();
    t.meta = header.at("meta").get<std::map<std::string, std::string>>();

    while (std::getline(in, line)) {
      if (in.eof()) throw Error(Errc::CorruptRecord, "record without trailing newline (truncated?)");
      t.steps.push_back(parse_step(json::parse(line), t.steps.size()));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptRecord, path.string() + ": " + e.what());
  }
  if (t.steps.size() != expected_steps) {
    throw Error(Errc::CorruptRecord, path.string() + ": header declares " + std::to_string(expected_steps) +
                                         " steps, found " + std::to_string(t.steps.size()));
  }
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const bool last = k + 1 == t.steps.size();
    if (t.steps[k].action.has_value() == last) throw Error(Errc::CorruptRecord, "action presence out of place");
  }
  return t;
}

void Recorder::record(const Observation& obs) {
  if (!in_unit(obs.gripper_pos_norm) || !in_unit(obs.force_norm)) {
    throw Error(Errc::OutOfRange, "normalized observation outside [0, 1]");
  }
  observations_.push_back(obs);
}

Trajectory Recorder::finish(std::string episode_id, std::string task, const gripper::GraspOutcome& outcome) && {
  Trajectory t = build_trajectory(std::move(observations_), a_max_, stroke_mm_);
  t.episode_id = std::move(episode_id);
  t.task = std::move(task);
  t.outcome = outcome.label;
  t.peak_force = outcome.peak_force;
  return t;
}

std::vector<StepTokens> tokenize(const Trajectory& traj) {
  std::vector<StepTokens> out;
  out.reserve(traj.steps.size());
  for (const auto& s : traj.steps) {
    StepTokens tok;
    tok.gripper = discretize(s.obs.gripper_pos_norm);
    tok.force = discretize(s.obs.force_norm);
    if (s.action) {
      std::array<BinIndex, kActionDim> bins{BinIndex(0), BinIndex(0), BinIndex(0), BinIndex(0),
                                            BinIndex(0), BinIndex(0), BinIndex(0)};
      for (std::size_t i = 0; i < kActionDim; ++i) bins[i] = discretize((s.action->values[i] + 1.0) / 2.0);
      tok.action = bins;
    }
    out.push_back(tok);
  }
  return out;
}

}  // namespace prometheus::dataset
