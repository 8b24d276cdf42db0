// Copyright 2026 The Clook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// clook: run scenarios, serve a live clock, replay traces.
//
// Exit status: 0 success, 2 invalid input, 1 anything else.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "clook/gateway.hpp"
#include "clook/scenario.hpp"
#include "clook/simulator.hpp"
#include "clook/trace.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("clook");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CLOOK_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

clook::SimConfig load_config_or_default(const std::string& path) {
  return path.empty() ? clook::SimConfig{} : clook::load_config(path);
}

int cmd_run(const std::string& scenario_path, const std::string& config_path,
            const std::string& trace_out, std::optional<std::uint64_t> seed) {
  clook::Scenario sc = clook::load_scenario(scenario_path);
  if (seed) sc.seed = *seed;
  const clook::SimConfig cfg = load_config_or_default(config_path);
  const clook::RunResult result = clook::run(sc, cfg);

  if (!trace_out.empty()) {
    std::ofstream out(trace_out, std::ios::binary);
    if (!out) throw clook::Error("cannot write trace to " + trace_out);
    clook::write_trace(out, result.trace);
  }
  clook::Json metrics = clook::Json::object();
  for (const auto& c : result.clocks) metrics[c.id] = clook::to_json(c.metrics);
  std::cout << metrics.dump(2) << '\n';
  return 0;
}

int cmd_serve(const std::string& listen, const std::string& peer, int tz_offset,
              const std::string& config_path) {
  clook::GatewayOptions opts;
  opts.listen = listen;
  if (!peer.empty()) opts.peer = peer;
  opts.tz_offset_minutes = tz_offset;
  opts.config = load_config_or_default(config_path);
  if (tz_offset < -720 || tz_offset > 840) {
    throw clook::ValidationError("--tz-offset must be in [-720, 840]");
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  clook::Gateway gateway(opts);
  gateway.start();
  std::cerr << "clook: serving " << gateway.local_id() << " on port " << gateway.port() << '\n';
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, shutting down", sig);
  gateway.stop();
  return 0;
}

int cmd_replay(const std::string& trace_path, double speed) {
  std::ifstream in(trace_path);
  if (!in) throw clook::ValidationError("cannot open trace " + trace_path);
  const clook::Trace trace = clook::read_trace(in);
  const clook::ReplayReport report = clook::replay(trace, speed, std::cout);
  if (!report.ok()) {
    std::cerr << "clook: replay diverged in " << report.mismatches << " of " << report.samples
              << " samples\n";
    return kExitError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Attention-warped clock: simulator, live gateway and trace replay"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string config_path;
  std::string trace_out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and print per-clock metrics");
  run->add_option("--scenario", scenario_path, "Scenario file (NDJSON)")->required();
  run->add_option("--config", config_path, "Config file (JSON)");
  run->add_option("--trace-out", trace_out, "Write the trace here (NDJSON)");
  run->add_option("--seed", seed, "Override the scenario seed");

  std::string listen;
  std::string peer;
  int tz_offset = 0;
  auto* serve = app.add_subcommand("serve", "Drive one clock live over NDJSON/TCP");
  serve->add_option("--listen", listen, "host:port to accept clients on")->required();
  serve->add_option("--peer", peer, "host:port of the paired gateway");
  serve->add_option("--tz-offset", tz_offset, "Local UTC offset in minutes");
  serve->add_option("--config", config_path, "Config file (JSON)");

  std::string trace_path;
  double speed = std::numeric_limits<double>::infinity();
  auto* replay = app.add_subcommand("replay", "Re-run a trace and check its display samples");
  replay->add_option("--trace", trace_path, "Trace file written by run --trace-out")->required();
  replay->add_option("--speed", speed, "Real-time pacing multiple (default: as fast as possible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(scenario_path, config_path, trace_out, seed);
    if (*serve) return cmd_serve(listen, peer, tz_offset, config_path);
    if (*replay) return cmd_replay(trace_path, speed);
  } catch (const clook::ValidationError& e) {
    std::cerr << "clook: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "clook: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
