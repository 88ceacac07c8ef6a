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

#include "deliberate/engine.h"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "deliberate/error.h"
#include "deliberate/image_index.h"
#include "session_fixture.h"
#include "test_util.h"

namespace deliberate {
namespace {

using testing::FixedOptions;
using testing::HealthyRun;
using testing::ScopeSession;
using testing::SimLabels;
using testing::TempDir;

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInternal;
}

std::string ReadAll(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class EngineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::filesystem::create_directories(data_dir());
    std::filesystem::create_directories(sessions_dir());
    run_ = HealthyRun(data_dir(), 11, 300, 60);
  }
  std::filesystem::path data_dir() const { return tmp_.path() / "data"; }
  std::filesystem::path sessions_dir() const { return tmp_.path() / "sessions"; }

  TempDir tmp_;
  RunConfig run_;
};

TEST_F(EngineTest, CreateSessionPersistsScopingState) {
  Engine engine(FixedOptions(sessions_dir()));
  const Session s = engine.CreateSession(run_.session);
  EXPECT_EQ(s.stage, Stage::kScoping);
  EXPECT_TRUE(s.definitions.empty());
  EXPECT_TRUE(std::filesystem::exists(sessions_dir() / "s1.json"));
  EXPECT_EQ(CodeOf([&] { engine.CreateSession(run_.session); }), ErrorCode::kInvalidArgument);
}

TEST_F(EngineTest, BadManifestPersistsNothing) {
  Engine engine(FixedOptions(sessions_dir()));
  SessionConfig config = run_.session;
  config.manifest = (data_dir() / "missing.jsonl").string();
  EXPECT_EQ(CodeOf([&] { engine.CreateSession(config); }), ErrorCode::kManifest);
  EXPECT_FALSE(std::filesystem::exists(sessions_dir() / "s1.json"));
  EXPECT_EQ(CodeOf([&] { engine.GetSession("s1"); }), ErrorCode::kNotFound);
}

TEST_F(EngineTest, SameSeedGivesSameInitialState) {
  Engine a(FixedOptions({}, "a"));
  Engine b(FixedOptions({}, "b"));
  Session sa = a.CreateSession(run_.session);
  Session sb = b.CreateSession(run_.session);
  sb.id = sa.id;
  EXPECT_EQ(SerializeSession(sa), SerializeSession(sb));
}

TEST_F(EngineTest, StageConflicts) {
  Engine engine(FixedOptions(sessions_dir()));
  const std::string id = engine.CreateSession(run_.session).id;
  EXPECT_EQ(CodeOf([&] { engine.NextRound(id); }), ErrorCode::kStageConflict);
  EXPECT_EQ(CodeOf([&] { engine.ManualEdit(id, {DefinitionEdit{}}); }), ErrorCode::kStageConflict);
  EXPECT_EQ(CodeOf([&] { engine.ApplyDecisions(id, {}); }), ErrorCode::kStageConflict);
  EXPECT_EQ(CodeOf([&] { engine.NextRound("nope"); }), ErrorCode::kNotFound);
  EXPECT_EQ(CodeOf([&] { engine.GetSession("../etc"); }), ErrorCode::kNotFound);

  ScopeSession(engine, id, run_);
  const Session s = engine.GetSession(id);
  EXPECT_EQ(s.stage, Stage::kIteration);
  ASSERT_EQ(s.definitions.count(0), 1u);
  EXPECT_EQ(CodeOf([&] { engine.ApplyDecisions(id, {}); }), ErrorCode::kStageConflict);
  EXPECT_EQ(CodeOf([&] { engine.Decompose(id); }), ErrorCode::kStageConflict);
}

TEST_F(EngineTest, RejectingEverythingStillIterates) {
  Engine engine(FixedOptions({}));
  const std::string id = engine.CreateSession(run_.session).id;
  RunConfig run = run_;
  run.scoping.by_name.clear();
  run.scoping.default_decision = ScopingDecision::kDiscard;
  const size_t warnings_before = engine.GetSession(id).warnings.size();
  ScopeSession(engine, id, run);
  const Session s = engine.GetSession(id);
  EXPECT_EQ(s.stage, Stage::kIteration);
  EXPECT_GT(s.warnings.size(), warnings_before);
  for (const ConceptNode& unit : s.Incumbent().root.children) {
    for (const ConceptNode& sig : unit.children) EXPECT_NE(sig.status, NodeStatus::kAccepted);
  }
}

TEST_F(EngineTest, RoundLifecycleErrors) {
  Engine engine(FixedOptions(sessions_dir()));
  const std::string id = engine.CreateSession(run_.session).id;
  ScopeSession(engine, id, run_);
  const ImageIndex index = LoadManifest(run_.session.manifest);

  const RoundRecord r1 = engine.NextRound(id);
  EXPECT_EQ(r1.t, 1);
  EXPECT_FALSE(r1.labels_submitted);
  ASSERT_FALSE(r1.batch.image_ids.empty());
  if (r1.batch.reached_target) EXPECT_GE(r1.batch.image_ids.size(), 5u);
  EXPECT_EQ(CodeOf([&] { engine.NextRound(id); }), ErrorCode::kPendingLabels);

  std::vector<LabelInput> labels = SimLabels(run_, r1, index);
  std::vector<LabelInput> partial(labels.begin(), labels.end() - 1);
  try {
    engine.SubmitLabels(id, 1, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPartialLabels);
    EXPECT_NE(std::string(e.what()).find(labels.back().image_id), std::string::npos);
  }
  std::vector<LabelInput> extra = labels;
  extra.push_back(LabelInput{"not-in-batch", true, ""});
  EXPECT_EQ(CodeOf([&] { engine.SubmitLabels(id, 1, extra); }), ErrorCode::kValidation);
  EXPECT_EQ(CodeOf([&] { engine.SubmitLabels(id, 7, labels); }), ErrorCode::kUnknownRound);
  // Failed submissions leave the round open.
  EXPECT_NE(engine.GetSession(id).PendingRound(), nullptr);

  const SubmitResult res = engine.SubmitLabels(id, 1, labels);
  EXPECT_GE(res.report.winner_f1_all, res.report.incumbent_f1_all);
  EXPECT_EQ(CodeOf([&] { engine.SubmitLabels(id, 1, labels); }), ErrorCode::kAlreadyLabeled);

  const Session s = engine.GetSession(id);
  EXPECT_EQ(s.labeled.size(), labels.size());
  ASSERT_TRUE(s.rounds[0].resulting_version.has_value());
  EXPECT_EQ(s.definitions.count(*s.rounds[0].resulting_version), 1u);
}

TEST_F(EngineTest, RoundsNeverRelabelAndKeepImproving) {
  Engine engine(FixedOptions({}));
  const std::string id = engine.CreateSession(run_.session).id;
  ScopeSession(engine, id, run_);
  const ImageIndex index = LoadManifest(run_.session.manifest);
  size_t labeled = 0;
  for (int t = 1; t <= 4; ++t) {
    RoundRecord r;
    try {
      r = engine.NextRound(id);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kAllSummariesEmpty);
      break;
    }
    const std::set<std::string> before = engine.GetSession(id).LabeledIds();
    for (const std::string& img : r.batch.image_ids) EXPECT_EQ(before.count(img), 0u) << img;
    const SubmitResult res = engine.SubmitLabels(id, t, SimLabels(run_, r, index));
    EXPECT_GE(res.report.winner_f1_all + 1e-12, res.report.incumbent_f1_all);
    const Session s = engine.GetSession(id);
    EXPECT_GE(s.labeled.size(), labeled);
    labeled = s.labeled.size();
    for (const RoundRecord& rec : s.rounds) {
      EXPECT_EQ(s.definitions.count(rec.incumbent_version), 1u);
      if (rec.resulting_version) EXPECT_EQ(s.definitions.count(*rec.resulting_version), 1u);
    }
  }
  const SessionMetrics m = engine.Metrics(id);
  for (const RoundMetrics& r : m.rounds) EXPECT_GE(r.f1_after + 1e-12, r.f1_before);
  EXPECT_EQ(m.test.size(), engine.GetSession(id).definitions.size());
}

TEST_F(EngineTest, ReloadAndReplay) {
  const ImageIndex index = LoadManifest(run_.session.manifest);
  const auto drive = [&](Engine& engine, int rounds) {
    for (int t = 1; t <= rounds; ++t) {
      const RoundRecord r = engine.NextRound("s1");
      engine.SubmitLabels("s1", t, SimLabels(run_, r, index));
    }
  };
  std::string first;
  {
    Engine engine(FixedOptions(sessions_dir()));
    engine.CreateSession(run_.session);
    ScopeSession(engine, "s1", run_);
    drive(engine, 1);
    first = SerializeSession(engine.GetSession("s1"));
  }
  // A fresh engine picks the session up from disk.
  Engine reloaded(FixedOptions(sessions_dir()));
  EXPECT_EQ(SerializeSession(reloaded.GetSession("s1")), first);

  TempDir other;
  Engine replay(FixedOptions(other.path()));
  replay.CreateSession(run_.session);
  ScopeSession(replay, "s1", run_);
  drive(replay, 1);
  EXPECT_EQ(SerializeSession(replay.GetSession("s1")), first);
  EXPECT_EQ(ReadAll(other.path() / "s1.json"), ReadAll(sessions_dir() / "s1.json"));
}

TEST_F(EngineTest, CorruptFilesAreReportedAndLeftAlone) {
  {
    Engine engine(FixedOptions(sessions_dir()));
    engine.CreateSession(run_.session);
  }
  const std::filesystem::path path = sessions_dir() / "s1.json";
  const std::string full = ReadAll(path);
  const std::string truncated = full.substr(0, full.size() / 2);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << truncated;
  Engine engine(FixedOptions(sessions_dir()));
  EXPECT_EQ(CodeOf([&] { engine.GetSession("s1"); }), ErrorCode::kCorruptSession);
  EXPECT_EQ(ReadAll(path), truncated);

  nlohmann::json j = nlohmann::json::parse(full);
  j["schema_version"] = 0;
  std::ofstream(path, std::ios::binary | std::ios::trunc) << j.dump();
  Engine engine2(FixedOptions(sessions_dir()));
  EXPECT_EQ(CodeOf([&] { engine2.GetSession("s1"); }), ErrorCode::kUnsupportedVersion);
}

TEST_F(EngineTest, SaveLoadRoundTrip) {
  Engine engine(FixedOptions({}));
  const std::string id = engine.CreateSession(run_.session).id;
  ScopeSession(engine, id, run_);
  engine.NextRound(id);
  const Session s = engine.GetSession(id);
  SaveSession(tmp_.path() / "copy.json", s);
  EXPECT_EQ(SerializeSession(LoadSession(tmp_.path() / "copy.json")), SerializeSession(s));
  // No temp files left behind by the atomic write.
  size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp_.path())) ++files;
  EXPECT_EQ(files, 3u);  // data/, sessions/, copy.json
}

TEST_F(EngineTest, ManualEditDuringPendingRound) {
  Engine engine(FixedOptions({}));
  const std::string id = engine.CreateSession(run_.session).id;
  ScopeSession(engine, id, run_);
  const ImageIndex index = LoadManifest(run_.session.manifest);
  const RoundRecord r = engine.NextRound(id);
  const ConceptDefinition d0 = engine.GetDefinition(id, std::nullopt);
  ASSERT_FALSE(d0.root.children.empty());
  const ConceptNode& unit = d0.root.children[0];

  DefinitionEdit stale;
  stale.target_id = unit.id;
  stale.old_description = "something else";
  stale.new_description = "x";
  EXPECT_EQ(CodeOf([&] { engine.ManualEdit(id, {stale}); }), ErrorCode::kStaleEdit);
  EXPECT_EQ(engine.GetDefinition(id, std::nullopt).version, d0.version);

  DefinitionEdit edit;
  edit.target_id = unit.id;
  edit.old_description = unit.description;
  edit.new_description = unit.description + " Plated dishes only.";
  const ConceptDefinition manual = engine.ManualEdit(id, {edit});
  EXPECT_EQ(manual.version, d0.version + 1);
  EXPECT_EQ(manual.root.children[0].provenance, Provenance::kUser);
  EXPECT_EQ(manual.edit_log.back().provenance, Provenance::kUser);

  const SubmitResult res = engine.SubmitLabels(id, r.t, SimLabels(run_, r, index));
  EXPECT_EQ(res.report.incumbent_version, manual.version);
  EXPECT_NE(res.definition.root.children[0].description.find("Plated dishes only."),
            std::string::npos);
  // The batch was rated by the definition in force when it was mined.
  EXPECT_EQ(engine.GetSession(id).rounds[0].incumbent_version, d0.version);
}

}  // namespace
}  // namespace deliberate
