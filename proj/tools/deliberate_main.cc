// Copyright 2026 The Deliberate Authors.
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

// Command-line driver: scripted sessions, baseline comparison, the HTTP
// service and the synthetic manifest generator.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "deliberate/api_server.h"
#include "deliberate/error.h"
#include "deliberate/scripted_run.h"
#include "deliberate/synthetic.h"

namespace {

using namespace deliberate;

void ApplyOverrides(RunConfig& config, const std::optional<uint64_t>& seed,
                    const std::optional<int>& rounds, const std::string& backend) {
  if (seed) {
    config.session.seed = *seed;
    config.session.backend.rng_seed = *seed;
  }
  if (rounds) config.rounds = *rounds;
  if (backend == "mock") {
    config.session.backend.kind = BackendKind::kMock;
  } else if (backend == "http") {
    config.session.backend.kind = BackendKind::kHttpJson;
  } else if (!backend.empty()) {
    throw Error(ErrorCode::kConfig, "--backend must be mock or http");
  }
}

int Serve(const std::string& host, int port, const std::string& sessions_dir,
          const std::string& static_dir) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  EngineOptions engine_options;
  engine_options.sessions_dir = sessions_dir;
  Engine engine(std::move(engine_options));
  ServerOptions options;
  options.host = host;
  options.port = port;
  options.static_dir = static_dir;
  ApiServer server(engine, options);
  const int bound = server.Start();
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    server.Stop();
  });
  server.Wait();
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept deliberation engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> rounds;
  std::string backend;
  std::string mode = "deliberate";
  std::string out_dir = "out";
  std::string sessions_dir;
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error");

  CLI::App* run = app.add_subcommand("run", "Run a scripted session with a simulated owner");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--seed", seed, "Overrides the configured seed");
  run->add_option("--rounds", rounds, "Overrides the configured round count");
  run->add_option("--backend", backend, "mock|http");
  run->add_option("--mode", mode, "deliberate|zeroshot|autodecompose");
  run->add_option("--out", out_dir, "Artifact directory");
  run->add_option("--sessions-dir", sessions_dir, "Also persist the session here");

  CLI::App* compare = app.add_subcommand("compare", "Run all three modes and write comparison.csv");
  compare->add_option("--config", config_path, "Run configuration (JSON)")->required();
  compare->add_option("--seed", seed, "Overrides the configured seed");
  compare->add_option("--rounds", rounds, "Overrides the configured round count");
  compare->add_option("--backend", backend, "mock|http");
  compare->add_option("--out", out_dir, "Artifact directory");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir = "web";
  CLI::App* serve = app.add_subcommand("serve", "Serve the HTTP API and the web UI");
  serve->add_option("--host", host);
  serve->add_option("--port", port, "0 picks a free port");
  serve->add_option("--sessions-dir", sessions_dir, "Session files")->required();
  serve->add_option("--static-dir", static_dir, "Web UI assets served under /");

  std::string spec_path;
  std::string manifest_out;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic attribute-tagged manifest");
  synth->add_option("--spec", spec_path, "Generator spec (JSON)")->required();
  synth->add_option("--seed", seed, "Overrides the spec seed");
  synth->add_option("--out", manifest_out, "Manifest path (JSONL)")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run || *compare) {
      RunConfig config = LoadRunConfig(config_path);
      ApplyOverrides(config, seed, rounds, backend);
      if (*compare) {
        for (const ComparisonRow& row : RunComparison(config, out_dir)) {
          std::printf("%-14s precision=%.4f recall=%.4f f1=%.4f\n",
                      std::string(ToString(row.mode)).c_str(), row.final.precision,
                      row.final.recall, row.final.f1);
        }
        return 0;
      }
      const RunResult result = RunScripted(config, ParseRunMode(mode), out_dir, sessions_dir);
      if (!result.stop_reason.empty()) std::printf("stopped early: %s\n", result.stop_reason.c_str());
      for (const MetricsRow& r : result.metrics) {
        std::printf("round %d precision=%.4f recall=%.4f f1=%.4f\n", r.round, r.precision, r.recall,
                    r.f1);
      }
      return 0;
    }
    if (*serve) return Serve(host, port, sessions_dir, static_dir);
    if (*synth) {
      std::ifstream in(spec_path);
      if (!in) throw Error(ErrorCode::kConfig, "cannot read " + spec_path);
      SyntheticSpec spec;
      try {
        spec = nlohmann::json::parse(in).get<SyntheticSpec>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfig, std::string("synthetic spec: ") + e.what());
      }
      if (seed) spec.seed = *seed;
      WriteManifest(manifest_out, GenerateSynthetic(spec));
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(ErrorCodeName(e.code())).c_str(), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
