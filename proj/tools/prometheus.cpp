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

// Command-line entry point: simulate, serve, replay, analyze, export.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "prometheus/cli.hpp"
#include "prometheus/error.hpp"
#include "prometheus/session.hpp"

namespace {

using namespace prometheus;

struct Args {
  std::optional<std::filesystem::path> config_path;

  cli::SimulateOptions sim;

  std::uint16_t port = 7700;
  std::string host = "127.0.0.1";
  std::string object = "tomato";
  std::optional<std::filesystem::path> record_dir;

  std::vector<std::filesystem::path> replay_files;

  std::vector<std::filesystem::path> files;
  std::vector<std::filesystem::path> compare;
  std::string metric = "peak";
  std::optional<std::filesystem::path> plot;

  std::vector<std::filesystem::path> export_files;
  std::filesystem::path export_out = "tokens.csv";
};

int run_simulate(const Args& a) {
  const auto cfg = config::load_effective(a.config_path);
  const auto summary = cli::simulate(cfg, a.sim);
  std::size_t success = 0;
  for (const auto& e : summary.episodes) success += e.outcome == gripper::OutcomeLabel::Success;
  std::cout << "wrote " << summary.episodes.size() << " episode(s) to " << a.sim.out_dir.string() << "\n";
  if (!summary.episodes.empty()) {
    std::printf("success rate %.3f\n", static_cast<double>(success) / static_cast<double>(summary.episodes.size()));
  }
  return cli::kExitOk;
}

int run_serve(const Args& a) {
  const auto cfg = config::load_effective(a.config_path);
  session::ServeOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.object = a.object;
  opts.record_dir = a.record_dir;
  if (opts.record_dir) std::filesystem::create_directories(*opts.record_dir);
  session::SessionServer server(cfg, opts);
  std::cout << "listening on " << server.host() << ":" << server.port() << std::endl;
  const auto ticks = server.run();
  std::cout << "session ended after " << ticks << " ticks" << std::endl;
  return cli::kExitOk;
}

int run_replay(const Args& a) {
  const auto cfg = config::load_effective(a.config_path);
  bool all = true;
  for (const auto& file : cli::expand_inputs(a.replay_files)) {
    const auto r = cli::replay(cfg, file);
    std::cout << file.string() << ": " << r.detail << "\n";
    all = all && r.identical;
  }
  if (!all) {
    std::cerr << "replay mismatch\n";
    return cli::kExitRuntime;
  }
  return cli::kExitOk;
}

int run_analyze(const Args& a) {
  const auto metric = cli::metric_from_string(a.metric);
  if (!metric) {
    std::cerr << "unknown metric: " << a.metric << " (expected peak or hold)\n";
    return cli::kExitUsage;
  }
  const auto cfg = config::load_effective(a.config_path);
  const auto summary = cli::analyze(cfg, a.files, a.compare, *metric);
  std::cout << cli::format_analysis(summary);
  if (a.plot) cli::write_plot_data(summary, cfg.server.record_hz(), *a.plot);
  return cli::kExitOk;
}

int run_export(const Args& a) {
  cli::export_tokens(a.export_files, a.export_out);
  std::cout << "wrote " << a.export_out.string() << "\n";
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  CLI::App app{"Teleoperation simulator with force feedback"};
  app.require_subcommand(1);
  app.add_option("-c,--config", a.config_path, "config file (default: $PROMETHEUS_CONFIG, else built-in)");

  auto* sim = app.add_subcommand("simulate", "run scripted episodes and write trajectories");
  sim->add_option("--task", a.sim.task, "object preset")->required();
  sim->add_option("--policy", a.sim.policy, "position_only or force_capped")->required();
  sim->add_option("--episodes", a.sim.episodes, "number of episodes")->capture_default_str();
  sim->add_option("--seed", a.sim.seed, "randomization seed")->capture_default_str();
  sim->add_option("--out-dir", a.sim.out_dir, "output directory")->required();

  auto* serve = app.add_subcommand("serve", "serve one live operator session");
  serve->add_option("--port", a.port, "TCP port, 0 for any free port")->capture_default_str();
  serve->add_option("--host", a.host, "bind address")->capture_default_str();
  serve->add_option("--object", a.object, "initial object preset")->capture_default_str();
  serve->add_option("--record-dir", a.record_dir, "write recorded episodes here");

  auto* replay = app.add_subcommand("replay", "re-simulate recorded episodes and compare force traces");
  replay->add_option("files", a.replay_files, "trajectory files or directories")->required();

  auto* analyze = app.add_subcommand("analyze", "summarize force and outcomes of a batch");
  analyze->add_option("files", a.files, "trajectory files or directories")->required();
  analyze->add_option("--compare", a.compare, "second batch; reports (A - B) / A");
  analyze->add_option("--metric", a.metric, "peak or hold")->capture_default_str();
  analyze->add_option("--plot", a.plot, "write the mean force curve as CSV");

  auto* exp = app.add_subcommand("export", "write discretized tokens as CSV");
  exp->add_option("files", a.export_files, "trajectory files or directories")->required();
  exp->add_option("-o,--out", a.export_out, "output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (sim->parsed()) return run_simulate(a);
    if (serve->parsed()) return run_serve(a);
    if (replay->parsed()) return run_replay(a);
    if (analyze->parsed()) return run_analyze(a);
    return run_export(a);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return cli::kExitRuntime;
}
