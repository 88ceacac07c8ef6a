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

#ifndef DELIBERATE_SESSION_H_
#define DELIBERATE_SESSION_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deliberate/borderline.h"
#include "deliberate/classifier.h"
#include "deliberate/concept.h"
#include "deliberate/evaluation.h"
#include "deliberate/gateway.h"
#include "deliberate/refinement.h"
#include "deliberate/scoping.h"
#include "deliberate/simulator.h"
#include "json.hpp"

namespace deliberate {

inline constexpr int kSessionSchemaVersion = 1;

enum class Stage { kScoping, kIteration, kDone };
std::string_view ToString(Stage stage);
Stage ParseStage(std::string_view text);

// Held-out images with gold labels given by a formula over their attributes.
struct TestSetConfig {
  std::string manifest;
  std::string gold_formula;
};

struct SessionConfig {
  std::string concept_name;
  std::string description;
  std::string manifest;
  BackendConfig backend;
  uint64_t seed = 0;
  // Behavior of the built-in simulated model when the backend is the mock.
  SimulatorOptions simulator;
  MinerConfig miner;
  RefinementOptions refinement;
  ScopingOptions scoping;
  ClassifierOptions classifier;
  std::optional<TestSetConfig> test;
};

struct LabelInput {
  std::string image_id;
  bool label = false;
  std::string feedback;
};

struct RoundRecord {
  int t = 0;
  size_t atom_id = 0;
  int pool_generation = 0;
  DeliberationBatch batch;
  // Incumbent ratings shown next to each batch image.
  std::map<std::string, ClassificationResult> ratings;
  int incumbent_version = 0;
  bool labels_submitted = false;
  std::vector<LabelInput> labels;
  std::optional<int> resulting_version;
  std::optional<RefinementReport> report;
};

struct ScopingState {
  std::optional<Decomposition> decomposition;
  std::optional<ConceptDefinition> draft;
  std::vector<SubconceptProposal> proposals;
};

struct TestMetrics {
  int version = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  double coverage = 1.0;
};

struct AuditEntry {
  std::string at;
  std::string op;
  std::string detail;
};

struct Session {
  std::string id;
  SessionConfig config;
  Stage stage = Stage::kScoping;
  ScopingState scoping;
  std::map<int, ConceptDefinition> definitions;
  // L_t, keyed by image id; relabeling keeps the latest label.
  std::map<std::string, LabeledExample> labeled;
  std::vector<RoundRecord> rounds;
  std::optional<MiningPool> pool;
  // Every query issued so far, across pool refreshes.
  std::vector<BorderlineQuery> queries;
  std::map<int, TestMetrics> test_metrics;
  std::vector<std::string> warnings;
  std::vector<AuditEntry> audit;
  std::string created_at;
  std::string updated_at;

  // The latest definition version; kStageConflict before scoping finishes.
  const ConceptDefinition& Incumbent() const;
  std::set<std::string> LabeledIds() const;
  const RoundRecord* PendingRound() const;
};

void to_json(nlohmann::json& j, const RefinementOptions& o);
void from_json(const nlohmann::json& j, RefinementOptions& o);
void to_json(nlohmann::json& j, const TestSetConfig& c);
void from_json(const nlohmann::json& j, TestSetConfig& c);
void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);
void to_json(nlohmann::json& j, const LabelInput& l);
void from_json(const nlohmann::json& j, LabelInput& l);
void to_json(nlohmann::json& j, const RoundRecord& r);
void from_json(const nlohmann::json& j, RoundRecord& r);
void to_json(nlohmann::json& j, const TestMetrics& m);
void from_json(const nlohmann::json& j, TestMetrics& m);
void to_json(nlohmann::json& j, const Session& s);
// kUnsupportedVersion for another schema version; kCorruptSession for a
// malformed document.
void from_json(const nlohmann::json& j, Session& s);

// Writes to a temporary sibling and renames it over `path`.
void SaveSession(const std::filesystem::path& path, const Session& session);
// kNotFound when absent, kCorruptSession when unreadable. Never modifies the
// file.
Session LoadSession(const std::filesystem::path& path);

// Pretty-printed, byte-stable serialization.
std::string SerializeSession(const Session& session);

}  // namespace deliberate

#endif  // DELIBERATE_SESSION_H_
