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

#include "deliberate/session.h"

#include <fstream>
#include <sstream>

#include "deliberate/error.h"

namespace deliberate {

std::string_view ToString(Stage stage) {
  switch (stage) {
    case Stage::kScoping: return "SCOPING";
    case Stage::kIteration: return "ITERATION";
    case Stage::kDone: return "DONE";
  }
  return "SCOPING";
}

Stage ParseStage(std::string_view text) {
  if (text == "SCOPING") return Stage::kScoping;
  if (text == "ITERATION") return Stage::kIteration;
  if (text == "DONE") return Stage::kDone;
  throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + std::string(text) + "'");
}

const ConceptDefinition& Session::Incumbent() const {
  if (definitions.empty()) {
    throw Error(ErrorCode::kStageConflict, "session '" + id + "' has no definition yet");
  }
  return definitions.rbegin()->second;
}

std::set<std::string> Session::LabeledIds() const {
  std::set<std::string> ids;
  for (const auto& [id, ex] : labeled) ids.insert(id);
  return ids;
}

const RoundRecord* Session::PendingRound() const {
  if (rounds.empty() || rounds.back().labels_submitted) return nullptr;
  return &rounds.back();
}

void to_json(nlohmann::json& j, const RefinementOptions& o) {
  j = {{"candidates", o.candidates},
       {"survivors", o.survivors},
       {"max_failure_fraction", o.max_failure_fraction}};
}

void from_json(const nlohmann::json& j, RefinementOptions& o) {
  const RefinementOptions d;
  o.candidates = j.value("candidates", d.candidates);
  o.survivors = j.value("survivors", d.survivors);
  o.max_failure_fraction = j.value("max_failure_fraction", d.max_failure_fraction);
}

void to_json(nlohmann::json& j, const TestSetConfig& c) {
  j = {{"manifest", c.manifest}, {"gold_formula", c.gold_formula}};
}

void from_json(const nlohmann::json& j, TestSetConfig& c) {
  j.at("manifest").get_to(c.manifest);
  j.at("gold_formula").get_to(c.gold_formula);
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
  j = {{"concept_name", c.concept_name},
       {"description", c.description},
       {"manifest", c.manifest},
       {"backend", c.backend},
       {"seed", c.seed},
       {"simulator", c.simulator},
       {"miner", c.miner},
       {"refinement", c.refinement},
       {"scoping",
        {{"representative_count", c.scoping.representative_count},
         {"duplicate_retries", c.scoping.duplicate_retries}}},
       {"classifier",
        {{"positive_threshold", c.classifier.positive_threshold},
         {"concurrency", c.classifier.concurrency}}}};
  if (c.test) j["test"] = *c.test;
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
  j.at("concept_name").get_to(c.concept_name);
  c.description = j.value("description", std::string());
  j.at("manifest").get_to(c.manifest);
  c.backend = j.value("backend", BackendConfig{});
  c.seed = j.value("seed", uint64_t{0});
  c.simulator = j.value("simulator", SimulatorOptions{});
  c.miner = j.value("miner", MinerConfig{});
  c.refinement = j.value("refinement", RefinementOptions{});
  const nlohmann::json scoping = j.value("scoping", nlohmann::json::object());
  c.scoping.representative_count =
      scoping.value("representative_count", ScopingOptions{}.representative_count);
  c.scoping.duplicate_retries = scoping.value("duplicate_retries", ScopingOptions{}.duplicate_retries);
  const nlohmann::json classifier = j.value("classifier", nlohmann::json::object());
  c.classifier.positive_threshold =
      classifier.value("positive_threshold", kDefaultPositiveThreshold);
  c.classifier.concurrency = classifier.value("concurrency", size_t{1});
  if (j.contains("test") && !j.at("test").is_null()) {
    c.test = j.at("test").get<TestSetConfig>();
  } else {
    c.test.reset();
  }
}

void to_json(nlohmann::json& j, const LabelInput& l) {
  j = {{"image_id", l.image_id}, {"label", l.label}, {"feedback", l.feedback}};
}

void from_json(const nlohmann::json& j, LabelInput& l) {
  j.at("image_id").get_to(l.image_id);
  j.at("label").get_to(l.label);
  l.feedback = j.value("feedback", std::string());
}

void to_json(nlohmann::json& j, const RoundRecord& r) {
  j = {{"t", r.t},
       {"atom_id", r.atom_id},
       {"pool_generation", r.pool_generation},
       {"batch", r.batch},
       {"ratings", r.ratings},
       {"incumbent_version", r.incumbent_version},
       {"labels_submitted", r.labels_submitted},
       {"labels", r.labels},
       {"resulting_version", r.resulting_version ? nlohmann::json(*r.resulting_version)
                                                 : nlohmann::json()},
       {"report", r.report ? nlohmann::json(*r.report) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, RoundRecord& r) {
  j.at("t").get_to(r.t);
  j.at("atom_id").get_to(r.atom_id);
  r.pool_generation = j.value("pool_generation", 0);
  j.at("batch").get_to(r.batch);
  j.at("ratings").get_to(r.ratings);
  j.at("incumbent_version").get_to(r.incumbent_version);
  j.at("labels_submitted").get_to(r.labels_submitted);
  j.at("labels").get_to(r.labels);
  r.resulting_version.reset();
  if (!j.at("resulting_version").is_null()) r.resulting_version = j.at("resulting_version").get<int>();
  r.report.reset();
  if (!j.at("report").is_null()) r.report = j.at("report").get<RefinementReport>();
}

void to_json(nlohmann::json& j, const TestMetrics& m) {
  j = {{"version", m.version}, {"precision", m.precision}, {"recall", m.recall},
       {"f1", m.f1},           {"counts", m.counts},       {"coverage", m.coverage}};
}

void from_json(const nlohmann::json& j, TestMetrics& m) {
  j.at("version").get_to(m.version);
  j.at("precision").get_to(m.precision);
  j.at("recall").get_to(m.recall);
  j.at("f1").get_to(m.f1);
  j.at("counts").get_to(m.counts);
  m.coverage = j.value("coverage", 1.0);
}

void to_json(nlohmann::json& j, const Session& s) {
  nlohmann::json definitions = nlohmann::json::array();
  for (const auto& [version, def] : s.definitions) definitions.push_back(def);
  nlohmann::json labeled = nlohmann::json::array();
  for (const auto& [id, ex] : s.labeled) labeled.push_back(ex);
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& [version, m] : s.test_metrics) metrics.push_back(m);
  nlohmann::json audit = nlohmann::json::array();
  for (const AuditEntry& a : s.audit) {
    audit.push_back({{"at", a.at}, {"op", a.op}, {"detail", a.detail}});
  }
  nlohmann::json scoping = {{"proposals", s.scoping.proposals}};
  scoping["decomposition"] =
      s.scoping.decomposition ? nlohmann::json(*s.scoping.decomposition) : nlohmann::json();
  scoping["draft"] = s.scoping.draft ? nlohmann::json(*s.scoping.draft) : nlohmann::json();
  j = {{"schema_version", kSessionSchemaVersion},
       {"id", s.id},
       {"config", s.config},
       {"stage", ToString(s.stage)},
       {"scoping", scoping},
       {"definitions", definitions},
       {"labeled", labeled},
       {"rounds", s.rounds},
       {"pool", s.pool ? nlohmann::json(*s.pool) : nlohmann::json()},
       {"queries", s.queries},
       {"test_metrics", metrics},
       {"warnings", s.warnings},
       {"audit", audit},
       {"created_at", s.created_at},
       {"updated_at", s.updated_at}};
}

void from_json(const nlohmann::json& j, Session& s) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw Error(ErrorCode::kCorruptSession, "session document has no schema_version");
  }
  const int schema = j.at("schema_version").get<int>();
  if (schema != kSessionSchemaVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "session schema_version " + std::to_string(schema) + " is not supported (expected " +
                    std::to_string(kSessionSchemaVersion) + ")");
  }
  try {
    Session out;
    j.at("id").get_to(out.id);
    j.at("config").get_to(out.config);
    out.stage = ParseStage(j.at("stage").get<std::string>());
    const nlohmann::json& scoping = j.at("scoping");
    scoping.at("proposals").get_to(out.scoping.proposals);
    if (!scoping.at("decomposition").is_null()) {
      out.scoping.decomposition = scoping.at("decomposition").get<Decomposition>();
    }
    if (!scoping.at("draft").is_null()) {
      out.scoping.draft = scoping.at("draft").get<ConceptDefinition>();
    }
    for (const auto& d : j.at("definitions")) {
      ConceptDefinition def = d.get<ConceptDefinition>();
      const int version = def.version;
      if (!out.definitions.emplace(version, std::move(def)).second) {
        throw Error(ErrorCode::kCorruptSession,
                    "definition version " + std::to_string(version) + " appears twice");
      }
    }
    for (const auto& e : j.at("labeled")) {
      LabeledExample ex = e.get<LabeledExample>();
      const std::string id = ex.image_id;
      out.labeled[id] = std::move(ex);
    }
    j.at("rounds").get_to(out.rounds);
    if (!j.at("pool").is_null()) out.pool = j.at("pool").get<MiningPool>();
    j.at("queries").get_to(out.queries);
    for (const auto& m : j.at("test_metrics")) {
      TestMetrics tm = m.get<TestMetrics>();
      out.test_metrics[tm.version] = tm;
    }
    j.at("warnings").get_to(out.warnings);
    for (const auto& a : j.at("audit")) {
      out.audit.push_back(AuditEntry{a.at("at").get<std::string>(), a.at("op").get<std::string>(),
                                     a.at("detail").get<std::string>()});
    }
    j.at("created_at").get_to(out.created_at);
    j.at("updated_at").get_to(out.updated_at);
    for (const RoundRecord& r : out.rounds) {
      if (!out.definitions.count(r.incumbent_version) ||
          (r.resulting_version && !out.definitions.count(*r.resulting_version))) {
        throw Error(ErrorCode::kCorruptSession,
                    "round " + std::to_string(r.t) + " references a missing definition version");
      }
    }
    s = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptSession, std::string("malformed session document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptSession) throw;
    throw Error(ErrorCode::kCorruptSession, std::string("malformed session document: ") + e.what());
  }
}

std::string SerializeSession(const Session& session) {
  return nlohmann::json(session).dump(2) + "\n";
}

void SaveSession(const std::filesystem::path& path, const Session& session) {
  const std::string text = SerializeSession(session);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot replace " + path.string());
  }
}

Session LoadSession(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "no session file at " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kCorruptSession,
                "session file " + path.string() + " is not valid JSON: " + e.what());
  }
  return j.get<Session>();
}

}  // namespace deliberate
