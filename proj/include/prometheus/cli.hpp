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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prometheus/config.hpp"
#include "prometheus/dataset.hpp"
#include "prometheus/teleop_server.hpp"

namespace prometheus::cli {

/// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Per-episode randomization derived from (seed, index) alone.
struct EpisodeSetup {
  gripper::ObjectModel object;
  Eigen::Vector3d object_offset;
};

/// Horizontal offsets fall in a half-disc of this radius on the far side of the home pose.
inline constexpr double kOffsetRadius = 0.05;   // m
inline constexpr double kTomatoSizeJitter = 5.0; // mm

EpisodeSetup episode_setup(const config::Config& cfg, const std::string& task, std::uint64_t seed,
                           std::uint64_t index);

/// Deterministic scripted episode for one (task, policy, seed, index).
teleop::EpisodeResult simulate_episode(const config::Config& cfg, const std::string& task, gripper::PolicyKind policy,
                                       std::uint64_t seed, std::uint64_t index);

struct SimulateOptions {
  std::string task;
  std::string policy;
  std::uint64_t episodes = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

struct EpisodeSummary {
  std::string file;
  std::string episode_id;
  gripper::OutcomeLabel outcome = gripper::OutcomeLabel::Slip;
  double peak_force = 0.0;       // N
  double mean_hold_force = 0.0;  // N sensed, over steps in contact
  std::size_t steps = 0;
};

struct SimulateSummary {
  std::string task;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<EpisodeSummary> episodes;
};

/// Writes episode_NNNN.jsonl files and summary.json into out_dir.
/// Throws UnknownTask, UnknownPolicy, Io.
SimulateSummary simulate(const config::Config& cfg, const SimulateOptions& opts);

struct ReplayResult {
  bool identical = false;
  std::size_t steps = 0;
  std::optional<std::size_t> first_mismatch;  // step index of the first force difference
  std::string detail;
};

/// Re-simulates a file written by simulate() from its metadata and compares the force trace.
ReplayResult replay(const config::Config& cfg, const std::filesystem::path& file);

enum class Metric { Peak, Hold };
std::optional<Metric> metric_from_string(std::string_view s);

struct BatchSummary {
  std::vector<EpisodeSummary> episodes;
  double success_rate = 0.0;
  double slip_rate = 0.0;
  double damage_rate = 0.0;
  double mean_peak = 0.0;
  double mean_hold = 0.0;
  /// Mean sensed force in N at each recorded step, over the episodes long enough to have it.
  std::vector<double> mean_force_curve;
  std::vector<std::size_t> curve_counts;

  double metric(Metric m) const { return m == Metric::Peak ? mean_peak : mean_hold; }
};

/// Throws EmptyBatch for no episodes.
BatchSummary summarize(const std::vector<std::pair<std::string, dataset::Trajectory>>& batch, double f_max);

/// (A - B) / A on the chosen metric.
double reduction(const BatchSummary& a, const BatchSummary& b, Metric m);

struct AnalysisSummary {
  BatchSummary batch;
  std::optional<BatchSummary> compare;
  Metric metric = Metric::Peak;
  std::optional<double> reduction;
};

/// Directories expand to their *.jsonl files in name order.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs);

AnalysisSummary analyze(const config::Config& cfg, const std::vector<std::filesystem::path>& files,
                        const std::vector<std::filesystem::path>& compare, Metric metric);

std::string format_analysis(const AnalysisSummary& summary);

/// Columns: step, time_s, mean_force_n[, compare_force_n].
void write_plot_data(const AnalysisSummary& summary, double record_hz, const std::filesystem::path& path);

/// One CSV row per step of every file: bins for gripper, force and the seven action channels.
void export_tokens(const std::vector<std::filesystem::path>& files, const std::filesystem::path& out);

}  // namespace prometheus::cli
