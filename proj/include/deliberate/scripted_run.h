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

#ifndef DELIBERATE_SCRIPTED_RUN_H_
#define DELIBERATE_SCRIPTED_RUN_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deliberate/engine.h"
#include "deliberate/sim_user.h"

namespace deliberate {

enum class RunMode { kDeliberate, kZeroShot, kAutoDecompose };
std::string_view ToString(RunMode mode);
RunMode ParseRunMode(std::string_view text);

// How scoping proposals are requested and decided without a human.
struct ScopingScript {
  size_t category_per_unit = 3;
  size_t borderline_per_unit = 0;
  // Decisions keyed by proposal name (case-insensitive).
  std::map<std::string, ScopingDecision> by_name;
  ScopingDecision default_decision = ScopingDecision::kDiscard;
};

struct RunConfig {
  SessionConfig session;
  SimUserSpec sim_user;
  ScopingScript scoping;
  int rounds = 5;
  // Empty means "sim-{seed}".
  std::string session_id;
};

// Relative paths inside the file resolve against its directory.
RunConfig LoadRunConfig(const std::filesystem::path& path);
RunConfig ParseRunConfig(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct RunResult {
  Session session;
  std::vector<MetricsRow> metrics;
  // Why the loop ended before the requested rounds, if it did.
  std::string stop_reason;
};

// Runs one mode end to end and writes session.json, metrics.csv and
// definition.md (plus labeled_f1.csv for deliberation) into `out_dir`.
RunResult RunScripted(const RunConfig& config, RunMode mode, const std::filesystem::path& out_dir,
                      const std::filesystem::path& sessions_dir = {});

struct ComparisonRow {
  RunMode mode = RunMode::kDeliberate;
  MetricsRow final;
};

// All three modes on one configuration; writes comparison.csv with one row
// per mode and each mode's artifacts under out_dir/<mode>.
std::vector<ComparisonRow> RunComparison(const RunConfig& config,
                                         const std::filesystem::path& out_dir);

}  // namespace deliberate

#endif  // DELIBERATE_SCRIPTED_RUN_H_
