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

#include "prometheus/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "prometheus/error.hpp"

namespace prometheus::cli {
namespace {

constexpr double kPi = 3.141592653589793;

/// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

gripper::PolicyKind parse_policy(std::string_view name) {
  const auto kind = gripper::policy_from_string(name);
  if (!kind) throw Error(Errc::UnknownPolicy, "unknown policy: " + std::string(name));
  return *kind;
}

const gripper::ObjectModel& task_object(const config::Config& cfg, const std::string& task) {
  const auto it = cfg.objects.find(task);
  if (it == cfg.objects.end()) throw Error(Errc::UnknownTask, "unknown task: " + task);
  return it->second;
}

std::string episode_file(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%04llu.jsonl", static_cast<unsigned long long>(index));
  return buf;
}

EpisodeSummary describe(const std::string& file, const dataset::Trajectory& t, double f_max) {
  EpisodeSummary e{file, t.episode_id, t.outcome, t.peak_force, 0.0, t.steps.size()};
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& step : t.steps) {
    if (step.obs.force_norm > 0.0) {
      sum += step.obs.force_norm * f_max;
      ++n;
    }
  }
  e.mean_hold_force = n == 0 ? 0.0 : sum / static_cast<double>(n);
  return e;
}

std::uint64_t meta_uint(const dataset::Trajectory& t, const std::string& key) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end()) throw Error(Errc::CorruptRecord, "missing metadata '" + key + "' in " + t.episode_id);
  return std::stoull(it->second);
}

std::string meta_string(const dataset::Trajectory& t, const std::string& key) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end()) throw Error(Errc::CorruptRecord, "missing metadata '" + key + "' in " + t.episode_id);
  return it->second;
}

std::vector<std::pair<std::string, dataset::Trajectory>> load_batch(const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::pair<std::string, dataset::Trajectory>> out;
  for (const auto& path : expand_inputs(inputs)) out.emplace_back(path.string(), dataset::import_trajectory(path));
  return out;
}

}  // namespace

EpisodeSetup episode_setup(const config::Config& cfg, const std::string& task, std::uint64_t seed,
                           std::uint64_t index) {
  EpisodeSetup setup{task_object(cfg, task), Eigen::Vector3d(0.0, 0.0, -0.10)};
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 gen(seq);

  // Half-disc facing away from the base, so objects never crowd the shoulder axis.
  const Eigen::Vector3d home = kinematics::forward_kinematics(cfg.server.home, cfg.server.dh).position;
  const Eigen::Vector2d out = Eigen::Vector2d(home.x(), home.y()).normalized();
  const Eigen::Vector2d side(-out.y(), out.x());
  const double rho = kOffsetRadius * std::sqrt(unit(gen));
  const double phi = kPi * (unit(gen) - 0.5);
  const Eigen::Vector2d xy = rho * (std::cos(phi) * out + std::sin(phi) * side);
  setup.object_offset.x() = xy.x();
  setup.object_offset.y() = xy.y();

  const double size_draw = unit(gen);
  if (task == "tomato") setup.object.free_size += kTomatoSizeJitter * (2.0 * size_draw - 1.0);
  return setup;
}

teleop::EpisodeResult simulate_episode(const config::Config& cfg, const std::string& task, gripper::PolicyKind policy,
                                       std::uint64_t seed, std::uint64_t index) {
  const EpisodeSetup setup = episode_setup(cfg, task, seed, index);
  teleop::EpisodePlan plan{setup.object};
  plan.object_offset = setup.object_offset;
  teleop::ScriptedOperator op(plan, policy, cfg.server, cfg.policy);
  const std::string id = task + "-" + std::string(gripper::to_string(policy)) + "-" + std::to_string(seed) + "-" +
                         std::to_string(index);
  teleop::EpisodeResult result = teleop::run_episode(cfg.server, op, plan, id);
  auto& meta = result.trajectory.meta;
  meta["policy"] = std::string(gripper::to_string(policy));
  meta["seed"] = std::to_string(seed);
  meta["episode_index"] = std::to_string(index);
  meta["termination"] = std::string(teleop::to_string(result.termination));
  meta["object_free_size_mm"] = exact(setup.object.free_size);
  meta["object_offset_x_m"] = exact(setup.object_offset.x());
  meta["object_offset_y_m"] = exact(setup.object_offset.y());
  return result;
}

SimulateSummary simulate(const config::Config& cfg, const SimulateOptions& opts) {
  const gripper::PolicyKind policy = parse_policy(opts.policy);
  task_object(cfg, opts.task);
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + opts.out_dir.string() + ": " + ec.message());

  SimulateSummary summary{opts.task, std::string(gripper::to_string(policy)), opts.seed, {}};
  const double f_max = cfg.server.haptics.fsr.f_max;
  for (std::uint64_t i = 0; i < opts.episodes; ++i) {
    const auto result = simulate_episode(cfg, opts.task, policy, opts.seed, i);
    const std::string name = episode_file(i);
    dataset::export_trajectory(result.trajectory, opts.out_dir / name);
    summary.episodes.push_back(describe(name, result.trajectory, f_max));
  }

  nlohmann::ordered_json j;
  j["task"] = summary.task;
  j["policy"] = summary.policy;
  j["seed"] = summary.seed;
  j["episodes"] = nlohmann::ordered_json::array();
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& e : summary.episodes) {
    counts[static_cast<int>(e.outcome)]++;
    j["episodes"].push_back({{"file", e.file},
                             {"episode_id", e.episode_id},
                             {"outcome", std::string(gripper::to_string(e.outcome))},
                             {"peak_force", e.peak_force},
                             {"mean_hold_force", e.mean_hold_force},
                             {"steps", e.steps}});
  }
  j["counts"] = {{"success", counts[0]}, {"slip", counts[1]}, {"damage", counts[2]}};
  if (!summary.episodes.empty()) {
    const double n = static_cast<double>(summary.episodes.size());
    j["success_rate"] = static_cast<double>(counts[0]) / n;
  }
  std::ofstream out(opts.out_dir / "summary.json", std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write summary in " + opts.out_dir.string());
  out << j.dump(2) << "\n";
  return summary;
}

ReplayResult replay(const config::Config& cfg, const std::filesystem::path& file) {
  const dataset::Trajectory stored = dataset::import_trajectory(file);
  const gripper::PolicyKind policy = parse_policy(meta_string(stored, "policy"));
  const auto result =
      simulate_episode(cfg, stored.task, policy, meta_uint(stored, "seed"), meta_uint(stored, "episode_index"));
  const dataset::Trajectory& fresh = result.trajectory;

  ReplayResult r;
  r.steps = stored.steps.size();
  const std::size_t n = std::min(stored.steps.size(), fresh.steps.size());
  for (std::size_t k = 0; k < n && !r.first_mismatch; ++k) {
    if (stored.steps[k].obs.force_norm != fresh.steps[k].obs.force_norm) r.first_mismatch = k;
  }
  if (!r.first_mismatch && stored.steps.size() != fresh.steps.size()) r.first_mismatch = n;
  if (r.first_mismatch) {
    r.detail = "force trace diverges at step " + std::to_string(*r.first_mismatch);
  } else if (stored.peak_force != fresh.peak_force) {
    r.detail = "peak force differs";
  } else if (!(stored == fresh)) {
    r.detail = "force trace matches but other fields differ";
  } else {
    r.identical = true;
    r.detail = "identical";
  }
  return r;
}

std::optional<Metric> metric_from_string(std::string_view s) {
  if (s == "peak") return Metric::Peak;
  if (s == "hold") return Metric::Hold;
  return std::nullopt;
}

BatchSummary summarize(const std::vector<std::pair<std::string, dataset::Trajectory>>& batch, double f_max) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "no episodes to analyze");
  BatchSummary s;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& [file, traj] : batch) {
    s.episodes.push_back(describe(file, traj, f_max));
    counts[static_cast<int>(traj.outcome)]++;
    s.mean_peak += traj.peak_force;
    s.mean_hold += s.episodes.back().mean_hold_force;
    if (traj.steps.size() > s.mean_force_curve.size()) {
      s.mean_force_curve.resize(traj.steps.size(), 0.0);
      s.curve_counts.resize(traj.steps.size(), 0);
    }
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
      s.mean_force_curve[k] += traj.steps[k].obs.force_norm * f_max;
      s.curve_counts[k]++;
    }
  }
  const double n = static_cast<double>(batch.size());
  s.success_rate = static_cast<double>(counts[0]) / n;
  s.slip_rate = static_cast<double>(counts[1]) / n;
  s.damage_rate = static_cast<double>(counts[2]) / n;
  s.mean_peak /= n;
  s.mean_hold /= n;
  for (std::size_t k = 0; k < s.mean_force_curve.size(); ++k) {
    s.mean_force_curve[k] /= static_cast<double>(s.curve_counts[k]);
  }
  return s;
}

double reduction(const BatchSummary& a, const BatchSummary& b, Metric m) {
  const double base = a.metric(m);
  if (!(base > 0.0)) throw Error(Errc::EmptyBatch, "reference batch has zero force; reduction undefined");
  return (base - b.metric(m)) / base;
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::filesystem::path> out;
  for (const auto& in : inputs) {
    if (std::filesystem::is_directory(in)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(in);
    }
  }
  return out;
}

AnalysisSummary analyze(const config::Config& cfg, const std::vector<std::filesystem::path>& files,
                        const std::vector<std::filesystem::path>& compare, Metric metric) {
  const double f_max = cfg.server.haptics.fsr.f_max;
  AnalysisSummary a;
  a.metric = metric;
  a.batch = summarize(load_batch(files), f_max);
  if (!compare.empty()) {
    a.compare = summarize(load_batch(compare), f_max);
    a.reduction = reduction(a.batch, *a.compare, metric);
  }
  return a;
}

std::string format_analysis(const AnalysisSummary& summary) {
  std::ostringstream os;
  char line[256];
  auto table = [&](const char* title, const BatchSummary& b) {
    os << title << "\n";
    std::snprintf(line, sizeof line, "  %-32s %-8s %10s %10s %6s\n", "episode", "outcome", "peak_N", "hold_N", "steps");
    os << line;
    for (const auto& e : b.episodes) {
      std::snprintf(line, sizeof line, "  %-32s %-8s %10.4f %10.4f %6zu\n", e.episode_id.c_str(),
                    std::string(gripper::to_string(e.outcome)).c_str(), e.peak_force, e.mean_hold_force, e.steps);
      os << line;
    }
    std::snprintf(line, sizeof line, "  rates: success %.3f  slip %.3f  damage %.3f\n", b.success_rate, b.slip_rate,
                  b.damage_rate);
    os << line;
    std::snprintf(line, sizeof line, "  mean peak %.4f N  mean hold %.4f N\n", b.mean_peak, b.mean_hold);
    os << line;
  };
  table("batch A", summary.batch);
  if (summary.compare) table("batch B", *summary.compare);
  if (summary.reduction) {
    std::snprintf(line, sizeof line, "reduction (%s): %.2f%%\n", summary.metric == Metric::Peak ? "peak" : "hold",
                  100.0 * *summary.reduction);
    os << line;
  }
  return os.str();
}

void write_plot_data(const AnalysisSummary& summary, double record_hz, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  const auto& a = summary.batch.mean_force_curve;
  const std::vector<double> empty;
  const auto& b = summary.compare ? summary.compare->mean_force_curve : empty;
  out << (summary.compare ? "step,time_s,mean_force_n,compare_force_n\n" : "step,time_s,mean_force_n\n");
  const std::size_t n = std::max(a.size(), b.size());
  char line[128];
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / record_hz;
    std::snprintf(line, sizeof line, "%zu,%.3f,", k, t);
    out << line;
    if (k < a.size()) out << exact(a[k]);
    if (summary.compare) {
      out << ",";
      if (k < b.size()) out << exact(b[k]);
    }
    out << "\n";
  }
}

void export_tokens(const std::vector<std::filesystem::path>& files, const std::filesystem::path& out_path) {
  const auto paths = expand_inputs(files);
  if (paths.empty()) throw Error(Errc::EmptyBatch, "no trajectories to export");
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + out_path.string());
  out << "episode_id,step,gripper,force,a0,a1,a2,a3,a4,a5,a6\n";
  for (const auto& path : paths) {
    const dataset::Trajectory t = dataset::import_trajectory(path);
    const auto tokens = dataset::tokenize(t);
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      out << t.episode_id << ',' << k << ',' << tokens[k].gripper.value() << ',' << tokens[k].force.value();
      for (std::size_t i = 0; i < dataset::kActionDim; ++i) {
        out << ',';
        if (tokens[k].action) out << (*tokens[k].action)[i].value();
      }
      out << '\n';
    }
  }
}

}  // namespace prometheus::cli
