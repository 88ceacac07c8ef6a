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

#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

#include <spdlog/spdlog.h>

#include "deliberate/error.h"
#include "deliberate/formula.h"
#include "deliberate/rng.h"

namespace deliberate {

struct Engine::Runtime {
  std::shared_ptr<const ImageIndex> index;
  std::shared_ptr<const ImageIndex> test_index;
  std::map<std::string, bool> gold;
  std::shared_ptr<const Simulator> simulator;
  std::unique_ptr<Gateway> gateway;
  std::unique_ptr<Classifier> classifier;
};

struct Engine::Entry {
  std::mutex mutex;
  Session session;
  std::shared_ptr<Runtime> runtime;
};

namespace {

void RequireStage(const Session& s, Stage stage) {
  if (s.stage != stage) {
    throw Error(ErrorCode::kStageConflict, "session '" + s.id + "' is in stage " +
                                               std::string(ToString(s.stage)) + ", expected " +
                                               std::string(ToString(stage)));
  }
}

std::string JoinIds(const std::vector<std::string>& ids) {
  std::string out;
  for (const std::string& id : ids) out += (out.empty() ? "" : ", ") + id;
  return out;
}

void RefreshClusterStats(MiningPool& pool, const std::map<std::string, LabeledExample>& labeled) {
  for (Cluster& c : pool.clusters) {
    ClusterStats stats;
    for (const std::string& id : c.member_ids) {
      const auto it = labeled.find(id);
      if (it == labeled.end()) continue;
      const LabeledExample& ex = it->second;
      ++stats.explored;
      if (ex.user_label != ex.classifier_at_label.label) ++stats.mistakes;
      if (!ex.feedback_text.empty()) ++stats.feedback_count;
      stats.ratings.push_back(ex.user_label ? 5 : 1);
    }
    c.stats = std::move(stats);
  }
}

bool ValidId(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

RoundRecord& CheckLabels(Session& s, int t, const std::vector<LabelInput>& labels) {
  const auto round_it = std::find_if(s.rounds.begin(), s.rounds.end(),
                                     [&](const RoundRecord& r) { return r.t == t; });
  if (round_it == s.rounds.end()) {
    throw Error(ErrorCode::kUnknownRound, "session '" + s.id + "' has no round " + std::to_string(t));
  }
  RoundRecord& round = *round_it;
  if (round.labels_submitted) {
    throw Error(ErrorCode::kAlreadyLabeled, "round " + std::to_string(t) + " is already labeled");
  }
  const std::set<std::string> batch_ids(round.batch.image_ids.begin(), round.batch.image_ids.end());
  std::map<std::string, const LabelInput*> by_id;
  for (const LabelInput& l : labels) {
    if (!batch_ids.count(l.image_id)) {
      throw Error(ErrorCode::kValidation,
                  "image '" + l.image_id + "' is not in the batch of round " + std::to_string(t));
    }
    if (!by_id.emplace(l.image_id, &l).second) {
      throw Error(ErrorCode::kValidation, "image '" + l.image_id + "' is labeled twice");
    }
  }
  std::vector<std::string> missing;
  for (const std::string& image_id : round.batch.image_ids) {
    if (!by_id.count(image_id)) missing.push_back(image_id);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kPartialLabels, "missing labels for: " + JoinIds(missing));
  }
  return round;
}

}  // namespace

Clock SystemClock() {
  return [] {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  };
}

Clock LogicalClock() {
  auto tick = std::make_shared<std::atomic<uint64_t>>(0);
  return [tick] {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t%06llu",
                  static_cast<unsigned long long>(++*tick));
    return std::string(buf);
  };
}

IdGenerator RandomIds() {
  auto state = std::make_shared<std::pair<std::mutex, std::mt19937_64>>();
  state->second.seed(std::random_device{}());
  return [state] {
    std::lock_guard<std::mutex> lock(state->first);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s-%016llx",
                  static_cast<unsigned long long>(state->second()));
    return std::string(buf);
  };
}

Engine::Engine(EngineOptions options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = SystemClock();
  if (!options_.ids) options_.ids = RandomIds();
  if (!options_.gateway_factory) {
    options_.gateway_factory = [](const SessionConfig& config,
                                  std::shared_ptr<const Simulator> simulator) {
      return MakeGateway(config.backend, std::move(simulator));
    };
  }
  if (!options_.sessions_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options_.sessions_dir, ec);
    if (ec) {
      throw Error(ErrorCode::kConfig,
                  "cannot create sessions directory " + options_.sessions_dir.string());
    }
  }
}

Engine::~Engine() = default;

std::shared_ptr<Engine::Runtime> Engine::BuildRuntime(const SessionConfig& config) const {
  if (config.concept_name.empty()) {
    throw Error(ErrorCode::kConfig, "session config needs a concept_name");
  }
  config.backend.Check();
  auto rt = std::make_shared<Runtime>();
  rt->index = std::make_shared<const ImageIndex>(LoadManifest(config.manifest));
  if (rt->index->size() == 0) {
    throw Error(ErrorCode::kManifest, "manifest " + config.manifest + " has no images");
  }
  std::vector<std::shared_ptr<const ImageIndex>> perceived = {rt->index};
  if (config.test) {
    rt->test_index = std::make_shared<const ImageIndex>(LoadManifest(config.test->manifest));
    Formula gold;
    try {
      gold = Formula::Parse(config.test->gold_formula);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("test gold_formula: ") + e.what());
    }
    for (const ImageRecord& r : rt->test_index->records()) {
      try {
        rt->gold[r.id] = gold.Evaluate(r.attributes);
      } catch (const Error& e) {
        throw Error(ErrorCode::kManifest, "test image '" + r.id + "': " + e.what());
      }
    }
    perceived.push_back(rt->test_index);
  }
  if (config.backend.kind == BackendKind::kMock) {
    rt->simulator = std::make_shared<const Simulator>(perceived, config.simulator);
  }
  rt->gateway = options_.gateway_factory(config, rt->simulator);
  rt->classifier = std::make_unique<Classifier>(*rt->gateway, config.classifier);
  return rt;
}

const Gateway& Engine::GatewayOf(const Runtime& rt) const { return *rt.gateway; }
const Classifier& Engine::ClassifierOf(const Runtime& rt) const { return *rt.classifier; }
const ImageIndex& Engine::IndexOf(const Runtime& rt) const { return *rt.index; }

std::shared_ptr<Engine::Entry> Engine::Open(const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find(id);
  if (it != entries_.end()) return it->second;
  if (!ValidId(id) || options_.sessions_dir.empty()) {
    throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  }
  const std::filesystem::path path = options_.sessions_dir / (id + ".json");
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  }
  auto entry = std::make_shared<Entry>();
  entry->session = LoadSession(path);
  entry->runtime = BuildRuntime(entry->session.config);
  entries_[id] = entry;
  return entry;
}

std::shared_ptr<Engine::Runtime> Engine::RuntimeFor(const std::string& id) {
  return Open(id)->runtime;
}

void Engine::Commit(Entry& entry, Session next, const std::string& op, const std::string& detail) {
  const std::string now = options_.clock();
  next.updated_at = now;
  next.audit.push_back(AuditEntry{now, op, detail});
  if (!options_.sessions_dir.empty()) {
    SaveSession(options_.sessions_dir / (next.id + ".json"), next);
  }
  entry.session = std::move(next);
}

Session Engine::CreateSession(const SessionConfig& config) {
  auto entry = std::make_shared<Entry>();
  entry->runtime = BuildRuntime(config);
  Session s;
  s.id = options_.ids();
  if (!ValidId(s.id)) throw Error(ErrorCode::kConfig, "invalid session id '" + s.id + "'");
  s.config = config;
  s.stage = Stage::kScoping;
  s.created_at = options_.clock();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.count(s.id) ||
        (!options_.sessions_dir.empty() &&
         std::filesystem::exists(options_.sessions_dir / (s.id + ".json")))) {
      throw Error(ErrorCode::kInvalidArgument, "session '" + s.id + "' already exists");
    }
    entries_[s.id] = entry;
  }
  std::lock_guard<std::mutex> lock(entry->mutex);
  try {
    Commit(*entry, s, "create_session", config.concept_name);
  } catch (...) {
    std::lock_guard<std::mutex> map_lock(mutex_);
    entries_.erase(s.id);
    throw;
  }
  return entry->session;
}

Session Engine::GetSession(const std::string& id) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  return entry->session;
}

Decomposition Engine::Decompose(const std::string& id) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kScoping);
  Session next = entry->session;
  Decomposition d =
      deliberate::Decompose(*entry->runtime->gateway, next.config.concept_name, next.config.description);
  next.scoping.decomposition = d;
  next.scoping.draft = DraftDefinition(next.config.concept_name, d);
  next.scoping.proposals.clear();
  next.warnings.insert(next.warnings.end(), d.warnings.begin(), d.warnings.end());
  Commit(*entry, std::move(next), "decompose", std::to_string(d.units.size()) + " units");
  return d;
}

SubconceptProposal Engine::Propose(const std::string& id, const std::string& unit_id,
                                   ProposalMode mode) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kScoping);
  Session next = entry->session;
  if (!next.scoping.draft) {
    throw Error(ErrorCode::kStageConflict, "decompose the concept before proposing subconcepts");
  }
  const ConceptNode* unit = FindNode(next.scoping.draft->root, unit_id);
  if (unit == nullptr || unit == &next.scoping.draft->root || unit->kind != NodeKind::kNecessary) {
    throw Error(ErrorCode::kNotFound, "unknown unit concept '" + unit_id + "'");
  }
  char pid[16];
  std::snprintf(pid, sizeof(pid), "p%03zu", next.scoping.proposals.size() + 1);
  SubconceptProposal p =
      ProposeSubconcept(*entry->runtime->gateway, *entry->runtime->index, *next.scoping.draft,
                        unit_id, next.scoping.proposals, mode, pid, next.config.scoping);
  next.scoping.proposals.push_back(p);
  Commit(*entry, std::move(next), "propose", p.id + " " + p.name);
  return p;
}

ConceptDefinition Engine::ApplyDecisions(const std::string& id,
                                         const std::map<std::string, ScopingDecision>& decisions,
                                         Provenance decided_by) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kScoping);
  Session next = entry->session;
  if (!next.scoping.draft) {
    throw Error(ErrorCode::kStageConflict, "decompose the concept before deciding on proposals");
  }
  ConceptDefinition d0 =
      ApplyScopingDecisions(*next.scoping.draft, next.scoping.proposals, decisions, decided_by);
  size_t accepted = 0;
  for (SubconceptProposal& p : next.scoping.proposals) {
    const auto it = decisions.find(p.id);
    if (it != decisions.end()) p.decision = it->second;
    if (p.decision == ScopingDecision::kAcceptPositive ||
        p.decision == ScopingDecision::kAcceptNegative) {
      ++accepted;
    }
  }
  if (accepted == 0) {
    next.warnings.push_back("no subconcept was accepted; the initial definition has no signals");
    spdlog::warn("session {}: {}", id, next.warnings.back());
  }
  next.definitions.clear();
  next.definitions[d0.version] = d0;
  next.stage = Stage::kIteration;
  Commit(*entry, std::move(next), "scoping_decisions", std::to_string(accepted) + " accepted");
  return d0;
}

RoundRecord Engine::NextRound(const std::string& id) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kIteration);
  if (const RoundRecord* pending = entry->session.PendingRound()) {
    throw Error(ErrorCode::kPendingLabels,
                "round " + std::to_string(pending->t) + " is still awaiting labels");
  }
  Session next = entry->session;
  const Runtime& rt = *entry->runtime;
  const ConceptDefinition& def = next.Incumbent();
  const MinerConfig& miner = next.config.miner;
  const std::set<std::string> labeled = next.LabeledIds();
  const int t = static_cast<int>(next.rounds.size()) + 1;

  const auto refresh = [&] {
    const int generation = next.pool ? next.pool->generation + 1 : 1;
    MiningPool pool =
        BuildMiningPool(*rt.gateway, *rt.index, def, next.queries, miner,
                        DeriveSeed(next.config.seed, "pool", static_cast<uint64_t>(generation)),
                        generation);
    next.queries.insert(next.queries.end(), pool.queries.begin(), pool.queries.end());
    next.warnings.insert(next.warnings.end(), pool.warnings.begin(), pool.warnings.end());
    next.pool = std::move(pool);
  };
  if (!next.pool || UnexploredCount(next.pool->ids, labeled) < miner.refresh_threshold) refresh();

  std::optional<DeliberationBatch> batch;
  bool refreshed_for_empty = false;
  while (!batch) {
    MiningPool& pool = *next.pool;
    RefreshClusterStats(pool, next.labeled);
    bool saw_empty = false;
    for (size_t atom : RankClusters(pool.clusters, miner.strategy, pool.history, miner.ucb_beta)) {
      const auto flagged = pool.unambiguous_at.find(atom);
      if (flagged != pool.unambiguous_at.end() && flagged->second == def.version) {
        saw_empty = true;
        continue;
      }
      const Cluster& cluster = *std::find_if(pool.clusters.begin(), pool.clusters.end(),
                                             [&](const Cluster& c) { return c.atom_id == atom; });
      try {
        batch = MineAmbiguities(*rt.gateway, *rt.index, def, cluster, labeled,
                                DeriveSeed(next.config.seed, "mining", static_cast<uint64_t>(t)), t,
                                miner.mining);
        break;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kClusterExhausted) continue;
        if (e.code() == ErrorCode::kAllSummariesEmpty) {
          pool.unambiguous_at[atom] = def.version;
          saw_empty = true;
          continue;
        }
        throw;
      }
    }
    if (batch) break;
    if (refreshed_for_empty) {
      if (saw_empty) {
        throw Error(ErrorCode::kAllSummariesEmpty,
                    "no cluster yields ambiguous images under definition version " +
                        std::to_string(def.version));
      }
      throw Error(ErrorCode::kClusterExhausted, "every cluster is exhausted after a pool refresh");
    }
    refreshed_for_empty = true;
    refresh();
  }

  RoundRecord record;
  record.t = t;
  record.atom_id = batch->atom_id;
  record.pool_generation = next.pool->generation;
  record.incumbent_version = def.version;
  std::vector<const ImageRecord*> images;
  for (const std::string& image_id : batch->image_ids) images.push_back(&rt.index->Get(image_id));
  for (const ClassificationOutcome& o : rt.classifier->ClassifyBatch(def, images)) {
    if (!o.ok()) throw Error(o.error->code, o.error->message);
    record.ratings[o.result->image_id] = *o.result;
  }
  record.batch = std::move(*batch);
  next.rounds.push_back(record);
  Commit(*entry, std::move(next), "next_round",
         "round " + std::to_string(t) + ", cluster " + std::to_string(record.atom_id) + ", " +
             std::to_string(record.batch.image_ids.size()) + " images");
  return record;
}

SubmitResult Engine::SubmitLabels(const std::string& id, int t,
                                  const std::vector<LabelInput>& labels) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kIteration);
  Session next = entry->session;
  RoundRecord& round = CheckLabels(next, t, labels);
  std::map<std::string, const LabelInput*> by_id;
  for (const LabelInput& l : labels) by_id[l.image_id] = &l;

  std::vector<LabeledExample> examples;
  for (const std::string& image_id : round.batch.image_ids) {
    const LabelInput& l = *by_id.at(image_id);
    examples.push_back(LabeledExample{image_id, l.label, l.feedback, round.ratings.at(image_id), t});
  }
  for (const LabeledExample& ex : examples) next.labeled[ex.image_id] = ex;

  const Runtime& rt = *entry->runtime;
  RefinementOutcome outcome =
      RefineRound(*rt.gateway, *rt.classifier, *rt.index, next.Incumbent(), t, examples,
                  next.labeled, next.config.refinement);
  if (outcome.report.changed) next.definitions[outcome.definition.version] = outcome.definition;

  size_t mistakes = 0;
  for (const LabeledExample& ex : examples) {
    if (ex.user_label != ex.classifier_at_label.label) ++mistakes;
  }
  if (next.pool && next.pool->generation == round.pool_generation) {
    next.pool->history.Record(round.atom_id,
                              static_cast<double>(mistakes) / static_cast<double>(examples.size()));
  }
  round.labels = labels;
  round.labels_submitted = true;
  round.resulting_version = outcome.definition.version;
  round.report = outcome.report;

  SubmitResult result{outcome.definition, outcome.report, outcome.report.winner_f1_all};
  Commit(*entry, std::move(next), "submit_labels",
         "round " + std::to_string(t) + " -> version " + std::to_string(outcome.definition.version));
  return result;
}

void Engine::ValidateLabels(const std::string& id, int t, const std::vector<LabelInput>& labels) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kIteration);
  Session copy = entry->session;
  CheckLabels(copy, t, labels);
}

void Engine::CheckStage(const std::string& id, Stage stage) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, stage);
}

ConceptDefinition Engine::ManualEdit(const std::string& id, std::vector<DefinitionEdit> edits) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kIteration);
  if (edits.empty()) throw Error(ErrorCode::kValidation, "manual edit carries no edits");
  for (DefinitionEdit& e : edits) e.provenance = Provenance::kUser;
  Session next = entry->session;
  ConceptDefinition edited = ApplyEdits(next.Incumbent(), edits);
  next.definitions[edited.version] = edited;
  Commit(*entry, std::move(next), "manual_edit", "version " + std::to_string(edited.version));
  return edited;
}

ConceptDefinition Engine::GetDefinition(const std::string& id, std::optional<int> version) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  const Session& s = entry->session;
  if (!version) return s.Incumbent();
  const auto it = s.definitions.find(*version);
  if (it == s.definitions.end()) {
    throw Error(ErrorCode::kNotFound, "session '" + id + "' has no definition version " +
                                          std::to_string(*version));
  }
  return it->second;
}

SessionMetrics Engine::Metrics(const std::string& id) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  const Runtime& rt = *entry->runtime;
  Session next = entry->session;
  bool added = false;
  if (rt.test_index && !rt.gold.empty()) {
    for (const auto& [version, def] : next.definitions) {
      if (next.test_metrics.count(version)) continue;
      const MetricsReport r = EvaluateDefinition(*rt.classifier, def, *rt.test_index, rt.gold);
      next.test_metrics[version] = TestMetrics{version, r.precision, r.recall, r.f1, r.counts, r.coverage};
      added = true;
    }
  }
  SessionMetrics m;
  std::set<std::string> seen;
  for (const RoundRecord& r : next.rounds) {
    if (!r.report) continue;
    seen.insert(r.batch.image_ids.begin(), r.batch.image_ids.end());
    m.rounds.push_back(RoundMetrics{r.t, r.report->incumbent_version, r.report->resulting_version,
                                    r.batch.image_ids.size(), seen.size(),
                                    r.report->incumbent_f1_all, r.report->winner_f1_all});
  }
  for (const auto& [version, tm] : next.test_metrics) m.test.push_back(tm);
  if (added) Commit(*entry, std::move(next), "evaluate", "test metrics");
  return m;
}

Session Engine::Finish(const std::string& id) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  RequireStage(entry->session, Stage::kIteration);
  if (const RoundRecord* pending = entry->session.PendingRound()) {
    throw Error(ErrorCode::kPendingLabels,
                "round " + std::to_string(pending->t) + " is still awaiting labels");
  }
  Session next = entry->session;
  next.stage = Stage::kDone;
  Commit(*entry, std::move(next), "finish", "");
  return entry->session;
}

MetricsReport Engine::EvaluateRenderedOnTest(const std::string& id, const std::string& rendered,
                                             int version) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  const Runtime& rt = *entry->runtime;
  if (!rt.test_index) throw Error(ErrorCode::kConfig, "session '" + id + "' has no test set");
  return EvaluateRendered(*rt.classifier, rendered, version, *rt.test_index, rt.gold);
}

MetricsReport Engine::EvaluateOnLabeled(const std::string& id, int version) {
  auto entry = Open(id);
  std::lock_guard<std::mutex> lock(entry->mutex);
  const Session& s = entry->session;
  const auto it = s.definitions.find(version);
  if (it == s.definitions.end()) {
    throw Error(ErrorCode::kNotFound, "session '" + id + "' has no definition version " +
                                          std::to_string(version));
  }
  std::map<std::string, bool> gold;
  for (const auto& [image_id, ex] : s.labeled) gold[image_id] = ex.user_label;
  return EvaluateDefinition(*entry->runtime->classifier, it->second, *entry->runtime->index, gold);
}

void to_json(nlohmann::json& j, const RoundMetrics& m) {
  j = {{"t", m.t},
       {"incumbent_version", m.incumbent_version},
       {"resulting_version", m.resulting_version},
       {"batch_size", m.batch_size},
       {"labeled_total", m.labeled_total},
       {"f1_before", m.f1_before},
       {"f1_after", m.f1_after}};
}

void to_json(nlohmann::json& j, const SessionMetrics& m) {
  j = {{"rounds", m.rounds}, {"test", m.test}};
}

void to_json(nlohmann::json& j, const SubmitResult& r) {
  j = {{"definition", r.definition}, {"report", r.report}, {"f1_labeled", r.f1_labeled}};
}

}  // namespace deliberate
