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

#include "deliberate/scripted_run.h"

#include <algorithm>
#include <fstream>

#include <spdlog/spdlog.h>

#include "deliberate/error.h"
#include "deliberate/rng.h"

namespace deliberate {
namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string Resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void WriteMetrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteMetricsCsv(out, rows);
}

MetricsRow RowOf(int round, const MetricsReport& r) { return MetricsRow{round, r.precision, r.recall, r.f1}; }

MetricsRow RowOf(int round, const TestMetrics& m) { return MetricsRow{round, m.precision, m.recall, m.f1}; }

EngineOptions MakeEngineOptions(const RunConfig& config, const std::filesystem::path& sessions_dir) {
  EngineOptions options;
  options.sessions_dir = sessions_dir;
  options.clock = LogicalClock();
  const std::string id =
      config.session_id.empty() ? "sim-" + std::to_string(config.session.seed) : config.session_id;
  options.ids = [id] { return id; };
  return options;
}

std::vector<std::string> UnitIds(const ConceptDefinition& draft) {
  std::vector<std::string> ids;
  for (const ConceptNode& n : draft.root.children) {
    if (n.kind == NodeKind::kNecessary && n.status == NodeStatus::kAccepted) ids.push_back(n.id);
  }
  return ids;
}

void ProposeAll(Engine& engine, const std::string& id, const ScopingScript& script) {
  const Session s = engine.GetSession(id);
  for (const std::string& unit : UnitIds(*s.scoping.draft)) {
    const std::pair<ProposalMode, size_t> plan[] = {
        {ProposalMode::kCategory, script.category_per_unit},
        {ProposalMode::kBorderline, script.borderline_per_unit}};
    for (const auto& [mode, count] : plan) {
      for (size_t i = 0; i < count; ++i) {
        try {
          engine.Propose(id, unit, mode);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kDuplicateExhausted) throw;
          spdlog::warn("unit {}: {}", unit, e.what());
          break;
        }
      }
    }
  }
}

ScopingDecision AutoDecision(const SubconceptProposal& p) {
  return p.polarity_hint == PolarityHint::kNegative ? ScopingDecision::kAcceptNegative
                                                    : ScopingDecision::kAcceptPositive;
}

void WriteSessionArtifacts(Engine& engine, const std::string& id, const std::filesystem::path& out,
                           const std::string& definition_md, const std::vector<MetricsRow>& rows) {
  WriteFile(out / "session.json", SerializeSession(engine.GetSession(id)));
  WriteFile(out / "definition.md", definition_md);
  WriteMetrics(out / "metrics.csv", rows);
}

}  // namespace

std::string_view ToString(RunMode mode) {
  switch (mode) {
    case RunMode::kDeliberate: return "deliberate";
    case RunMode::kZeroShot: return "zeroshot";
    case RunMode::kAutoDecompose: return "autodecompose";
  }
  return "deliberate";
}

RunMode ParseRunMode(std::string_view text) {
  if (text == "deliberate") return RunMode::kDeliberate;
  if (text == "zeroshot") return RunMode::kZeroShot;
  if (text == "autodecompose") return RunMode::kAutoDecompose;
  throw Error(ErrorCode::kConfig, "unknown mode '" + std::string(text) +
                                      "' (expected deliberate, zeroshot or autodecompose)");
}

RunConfig ParseRunConfig(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    c.session = j.get<SessionConfig>();
    if (j.contains("sim_user")) c.sim_user = j.at("sim_user").get<SimUserSpec>();
    const nlohmann::json script = j.value("scoping_script", nlohmann::json::object());
    c.scoping.category_per_unit = script.value("category_per_unit", c.scoping.category_per_unit);
    c.scoping.borderline_per_unit =
        script.value("borderline_per_unit", c.scoping.borderline_per_unit);
    const nlohmann::json decisions = script.value("decisions", nlohmann::json::object());
    for (const auto& [name, d] : decisions.items()) {
      c.scoping.by_name[Lower(name)] = ParseScopingDecision(d.get<std::string>());
    }
    if (script.contains("default")) {
      c.scoping.default_decision = ParseScopingDecision(script.at("default").get<std::string>());
    }
    c.rounds = j.value("rounds", c.rounds);
    c.session_id = j.value("session_id", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("run config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string("run config: ") + e.what());
  }
  c.session.manifest = Resolve(c.session.manifest, base_dir);
  if (c.session.test) c.session.test->manifest = Resolve(c.session.test->manifest, base_dir);
  c.session.backend.mock_script = Resolve(c.session.backend.mock_script, base_dir);
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "config " + path.string() + " is not JSON: " + e.what());
  }
  return ParseRunConfig(j, path.parent_path());
}

RunResult RunScripted(const RunConfig& config, RunMode mode, const std::filesystem::path& out_dir,
                      const std::filesystem::path& sessions_dir) {
  if (config.rounds < 0) throw Error(ErrorCode::kConfig, "rounds must be non-negative");
  if (mode != RunMode::kDeliberate && !config.session.test) {
    throw Error(ErrorCode::kConfig, "baseline modes need a test set in the config");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string());

  Engine engine(MakeEngineOptions(config, sessions_dir));
  const std::string id = engine.CreateSession(config.session).id;
  RunResult result;

  if (mode == RunMode::kZeroShot) {
    const std::string bare = RenderBareConcept(config.session.concept_name, config.session.description);
    result.metrics.push_back(RowOf(0, engine.EvaluateRenderedOnTest(id, bare, 0)));
    WriteSessionArtifacts(engine, id, out_dir,
                          "# " + config.session.concept_name + "\n\n" + config.session.description + "\n",
                          result.metrics);
    result.session = engine.GetSession(id);
    return result;
  }

  engine.Decompose(id);
  ProposeAll(engine, id, config.scoping);
  std::map<std::string, ScopingDecision> decisions;
  for (const SubconceptProposal& p : engine.GetSession(id).scoping.proposals) {
    if (mode == RunMode::kAutoDecompose) {
      decisions[p.id] = AutoDecision(p);
    } else {
      const auto it = config.scoping.by_name.find(Lower(p.name));
      decisions[p.id] = it != config.scoping.by_name.end() ? it->second : config.scoping.default_decision;
    }
  }
  engine.ApplyDecisions(id, decisions,
                        mode == RunMode::kAutoDecompose ? Provenance::kAuto : Provenance::kUser);

  const bool has_test = config.session.test.has_value();
  std::vector<MetricsRow> labeled_rows;
  std::string labeled_csv = "round,f1_before,f1_after\n";
  if (mode == RunMode::kDeliberate) {
    const SimUser user(config.sim_user);
    const ImageIndex index = LoadManifest(config.session.manifest);
    user.CheckManifest(index);
    for (int t = 1; t <= config.rounds; ++t) {
      RoundRecord round;
      try {
        round = engine.NextRound(id);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kAllSummariesEmpty) throw;
        result.stop_reason = e.what();
        spdlog::info("stopping after {} rounds: {}", t - 1, e.what());
        break;
      }
      Rng rng(DeriveSeed(config.session.seed, "sim-user", static_cast<uint64_t>(t)));
      std::vector<LabelInput> labels;
      for (const std::string& image_id : round.batch.image_ids) {
        const SimLabel l = user.Label(index.Get(image_id), &round.ratings.at(image_id), rng);
        labels.push_back(LabelInput{image_id, l.label, l.feedback.value_or("")});
      }
      const SubmitResult submitted = engine.SubmitLabels(id, t, labels);
      char line[96];
      std::snprintf(line, sizeof(line), "%d,%.6f,%.6f\n", t, submitted.report.incumbent_f1_all,
                    submitted.report.winner_f1_all);
      labeled_csv += line;
      if (!has_test) {
        labeled_rows.push_back(RowOf(t, engine.EvaluateOnLabeled(id, submitted.definition.version)));
      }
    }
    engine.Finish(id);
  }

  if (has_test) {
    const SessionMetrics m = engine.Metrics(id);
    std::map<int, TestMetrics> by_version;
    for (const TestMetrics& tm : m.test) by_version[tm.version] = tm;
    result.metrics.push_back(RowOf(0, by_version.at(0)));
    for (const RoundMetrics& r : m.rounds) {
      result.metrics.push_back(RowOf(r.t, by_version.at(r.resulting_version)));
    }
  } else {
    result.metrics = labeled_rows;
  }
  if (mode == RunMode::kDeliberate) WriteFile(out_dir / "labeled_f1.csv", labeled_csv);
  WriteSessionArtifacts(engine, id, out_dir, RenderMarkdown(engine.GetDefinition(id, std::nullopt)),
                        result.metrics);
  result.session = engine.GetSession(id);
  return result;
}

std::vector<ComparisonRow> RunComparison(const RunConfig& config,
                                         const std::filesystem::path& out_dir) {
  std::vector<ComparisonRow> rows;
  for (RunMode mode : {RunMode::kZeroShot, RunMode::kAutoDecompose, RunMode::kDeliberate}) {
    const RunResult r = RunScripted(config, mode, out_dir / std::string(ToString(mode)));
    rows.push_back(ComparisonRow{mode, r.metrics.back()});
  }
  std::string csv = "mode,precision,recall,f1\n";
  for (const ComparisonRow& row : rows) {
    char line[128];
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f\n", std::string(ToString(row.mode)).c_str(),
                  row.final.precision, row.final.recall, row.final.f1);
    csv += line;
  }
  WriteFile(out_dir / "comparison.csv", csv);
  return rows;
}

}  // namespace deliberate
