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

#ifndef DELIBERATE_API_SERVER_H_
#define DELIBERATE_API_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>

#include "deliberate/engine.h"

namespace deliberate {

struct ServerOptions {
  std::string host = "127.0.0.1";
  // 0 picks a free port.
  int port = 8080;
  // Served under "/" when it exists.
  std::filesystem::path static_dir;
  size_t job_workers = 1;
  // Upper bound on the long-poll wait of GET /v1/jobs/{id}?wait_ms=.
  int max_wait_ms = 30000;
};

enum class JobKind { kNextRound, kRefine, kDecompose, kPropose };
enum class JobStatus { kRunning, kDone, kFailed };
std::string_view ToString(JobKind kind);
std::string_view ToString(JobStatus status);

// HTTP/JSON facade over an Engine. Long-running commands become jobs that
// clients poll.
class ApiServer {
 public:
  ApiServer(Engine& engine, ServerOptions options);
  ~ApiServer();

  // Binds and starts serving on a background thread; returns the bound port.
  // kConfig when the address cannot be bound.
  int Start();
  // Stops accepting requests and waits for queued jobs to finish.
  void Stop();
  // Blocks until Stop() is called from another thread or a signal handler.
  void Wait();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace deliberate

#endif  // DELIBERATE_API_SERVER_H_
