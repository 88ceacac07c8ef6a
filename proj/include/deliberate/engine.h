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

#ifndef DELIBERATE_ENGINE_H_
#define DELIBERATE_ENGINE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "deliberate/session.h"

namespace deliberate {

inline constexpr std::string_view kEngineVersion = "0.1.0";

using Clock = std::function<std::string()>;
using IdGenerator = std::function<std::string()>;
using GatewayFactory = std::function<std::unique_ptr<Gateway>(
    const SessionConfig&, std::shared_ptr<const Simulator>)>;

// UTC wall clock in ISO 8601.
Clock SystemClock();
// "t000001", "t000002", ... for reproducible output.
Clock LogicalClock();
IdGenerator RandomIds();

struct EngineOptions {
  // Session files live here; empty keeps sessions in memory only.
  std::filesystem::path sessions_dir;
  Clock clock;
  IdGenerator ids;
  // Defaults to MakeGateway.
  GatewayFactory gateway_factory;
};

struct SubmitResult {
  ConceptDefinition definition;
  RefinementReport report;
  // F1 of the resulting definition on L_t.
  double f1_labeled = 0.0;
};

struct RoundMetrics {
  int t = 0;
  int incumbent_version = 0;
  int resulting_version = 0;
  size_t batch_size = 0;
  size_t labeled_total = 0;
  double f1_before = 0.0;
  double f1_after = 0.0;
};

struct SessionMetrics {
  std::vector<RoundMetrics> rounds;
  // Test-set metrics per definition version; empty without a test set.
  std::vector<TestMetrics> test;
};

// The deliberation state machine. Commands on one session are serialized;
// distinct sessions run independently. Every command either commits a new
// persisted state or leaves the session untouched.
class Engine {
 public:
  explicit Engine(EngineOptions options);
  ~Engine();

  // Loads the manifest(s) and persists a fresh SCOPING session.
  Session CreateSession(const SessionConfig& config);
  Session GetSession(const std::string& id);

  Decomposition Decompose(const std::string& id);
  SubconceptProposal Propose(const std::string& id, const std::string& unit_id, ProposalMode mode);
  // Installs d0 and moves to ITERATION.
  ConceptDefinition ApplyDecisions(const std::string& id,
                                   const std::map<std::string, ScopingDecision>& decisions,
                                   Provenance decided_by = Provenance::kUser);

  RoundRecord NextRound(const std::string& id);
  SubmitResult SubmitLabels(const std::string& id, int t, const std::vector<LabelInput>& labels);
  // The checks SubmitLabels performs before refining, without side effects.
  void ValidateLabels(const std::string& id, int t, const std::vector<LabelInput>& labels);
  // kNotFound for an unknown session, kStageConflict for another stage.
  void CheckStage(const std::string& id, Stage stage);
  ConceptDefinition ManualEdit(const std::string& id, std::vector<DefinitionEdit> edits);
  ConceptDefinition GetDefinition(const std::string& id, std::optional<int> version);
  // Evaluates every definition version missing from the test metrics.
  SessionMetrics Metrics(const std::string& id);
  Session Finish(const std::string& id);

  // Classifies the test set against arbitrary definition text (e.g. the bare
  // concept). kConfig when the session has no test set.
  MetricsReport EvaluateRenderedOnTest(const std::string& id, const std::string& rendered,
                                       int version);
  // Scores a stored definition version against the current labeled set.
  MetricsReport EvaluateOnLabeled(const std::string& id, int version);

  // Shared runtime objects of a session (index, gateway, classifier).
  struct Runtime;
  std::shared_ptr<Runtime> RuntimeFor(const std::string& id);
  const Gateway& GatewayOf(const Runtime& rt) const;
  const Classifier& ClassifierOf(const Runtime& rt) const;
  const ImageIndex& IndexOf(const Runtime& rt) const;

 private:
  struct Entry;
  std::shared_ptr<Entry> Open(const std::string& id);
  void Commit(Entry& entry, Session next, const std::string& op, const std::string& detail);
  std::shared_ptr<Runtime> BuildRuntime(const SessionConfig& config) const;

  EngineOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

void to_json(nlohmann::json& j, const RoundMetrics& m);
void to_json(nlohmann::json& j, const SessionMetrics& m);
void to_json(nlohmann::json& j, const SubmitResult& r);

}  // namespace deliberate

#endif  // DELIBERATE_ENGINE_H_
