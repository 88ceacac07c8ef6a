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

#include "deliberate/refinement.h"

#include <algorithm>
#include <sstream>

#include <spdlog/spdlog.h>

#include "deliberate/error.h"
#include "deliberate/evaluation.h"
#include "deliberate/prompts.h"

namespace deliberate {
namespace {

std::string Trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string Field(const FieldRecord& record, const std::string& key) {
  const auto it = record.find(key);
  return it == record.end() ? std::string() : Trim(it->second);
}

struct Scored {
  double f1 = 0.0;
  size_t evaluated = 0;
  size_t failures = 0;
};

Scored ScoreOn(const Classifier& classifier, const ImageIndex& index,
               const ConceptDefinition& def, const std::map<std::string, bool>& labels) {
  std::vector<const ImageRecord*> images;
  images.reserve(labels.size());
  for (const auto& [id, label] : labels) images.push_back(&index.Get(id));
  const auto outcomes = classifier.ClassifyBatch(def, images);
  std::map<std::string, bool> predictions;
  std::map<std::string, bool> gold;
  Scored scored;
  scored.evaluated = outcomes.size();
  for (const ClassificationOutcome& o : outcomes) {
    if (!o.ok()) {
      ++scored.failures;
      continue;
    }
    predictions[o.result->image_id] = o.result->label;
    gold[o.result->image_id] = labels.at(o.result->image_id);
  }
  scored.f1 = predictions.empty() ? 0.0 : F1(predictions, gold);
  return scored;
}

bool Disqualified(const Scored& s, double max_failure_fraction) {
  if (s.evaluated == 0) return false;
  return static_cast<double>(s.failures) >
         max_failure_fraction * static_cast<double>(s.evaluated);
}

}  // namespace

std::string ScopeText(bool in_scope) { return in_scope ? "in-scope" : "out-of-scope"; }

Rationale ArticulateFeedback(const Gateway& gateway, const ConceptDefinition& def,
                             const LabeledExample& example, const ImageRecord& image) {
  const ClassificationResult& rater = example.classifier_at_label;
  std::map<std::string, std::string> vars = {
      {"definition", RenderDefinition(def)},
      {"rater_decision",
       std::to_string(rater.rating.value) + " (" + ScopeText(rater.label) + ")"},
      {"rater_summary", rater.rationale},
      {"ground_truth", ScopeText(example.user_label)},
      {"user_feedback", example.feedback_text},
      {"caption", image.caption},
  };
  const ModelResponse response =
      gateway.Complete(MakeRequest(TemplateId::kArticulate, std::move(vars), {image.uri}));
  return Rationale{example.image_id, Trim(response.parsed.values.at("clarification"))};
}

std::vector<DefinitionEdit> ParseRefinementEdits(const ConceptDefinition& def,
                                                 const ParsedFields& fields) {
  std::vector<DefinitionEdit> edits;
  const auto it = fields.lists.find("concept");
  if (it == fields.lists.end()) return edits;
  for (const FieldRecord& block : it->second) {
    const std::string parent = Field(block, "parent-signal");
    const std::string type = Lower(Field(block, "type"));
    const std::string new_name = Field(block, "new-name");
    const std::string new_description = Field(block, "new-description");
    DefinitionEdit edit;
    edit.provenance = Provenance::kRefined;
    if (!parent.empty() || !type.empty() || !new_name.empty()) {
      if (parent.empty() || new_name.empty() || new_description.empty()) {
        throw Error(ErrorCode::kParse, "add block needs parent-signal, new-name and new-description");
      }
      if (type != "positive" && type != "negative") {
        throw Error(ErrorCode::kParse, "add block type must be positive or negative, got '" +
                                           type + "'");
      }
      const ConceptNode* node = FindNodeByName(def.root, parent);
      if (node == nullptr) {
        throw Error(ErrorCode::kParse, "add block names unknown signal '" + parent + "'");
      }
      edit.op = EditOp::kAddSignal;
      edit.target_id = node->id;
      edit.kind = type == "positive" ? NodeKind::kPositive : NodeKind::kNegative;
      edit.new_name = new_name;
      edit.new_description = new_description;
    } else {
      std::string name = Field(block, "name");
      if (name.empty()) name = Field(block, "old-name");
      if (name.empty() || new_description.empty()) {
        throw Error(ErrorCode::kParse, "edit block needs name and new-description");
      }
      const ConceptNode* node = FindNodeByName(def.root, name);
      if (node == nullptr) {
        throw Error(ErrorCode::kParse, "edit block names unknown signal '" + name + "'");
      }
      edit.op = EditOp::kEditDescription;
      edit.target_id = node->id;
      const auto old = block.find("old-description");
      edit.old_description = old == block.end() ? node->description : Trim(old->second);
      edit.new_description = new_description;
    }
    edits.push_back(std::move(edit));
  }
  return edits;
}

CandidateSet GenerateCandidates(const Gateway& gateway, const ConceptDefinition& def,
                                const std::vector<Rationale>& rationales,
                                const RefinementOptions& options) {
  CandidateSet set;
  set.candidates.push_back(CandidateDefinition{def, {}, 0, std::nullopt, std::nullopt});
  std::string clarifications;
  for (const Rationale& r : rationales) clarifications += r.clarification + "\n";
  const std::string rendered = RenderDefinition(def);

  for (size_t m = 0; m < options.candidates; ++m) {
    const size_t index = m + 1;
    PromptRequest request = MakeRequest(TemplateId::kRefine,
                                        {{"definition", rendered},
                                         {"clarifications", clarifications},
                                         {"images_num", std::to_string(rationales.size())}});
    request.decoding.sample_index = m;
    const auto warn = [&](const std::string& why) {
      const std::string message = "refinement sample " + std::to_string(index) + " dropped: " + why;
      spdlog::warn("{}", message);
      set.warnings.push_back(message);
    };
    try {
      const ModelResponse response = gateway.Complete(request);
      std::vector<DefinitionEdit> edits = ParseRefinementEdits(def, response.parsed);
      if (edits.empty()) {
        warn("no edits");
        continue;
      }
      ConceptDefinition next = ApplyEdits(def, edits);
      set.candidates.push_back(CandidateDefinition{std::move(next), std::move(edits), index,
                                                   std::nullopt, std::nullopt});
    } catch (const Error& e) {
      warn(std::string(ErrorCodeName(e.code())) + ": " + e.what());
    }
  }
  return set;
}

Selection SelectCandidate(const Classifier& classifier, const ImageIndex& index,
                          std::vector<CandidateDefinition>& candidates,
                          const std::map<std::string, bool>& batch_labels,
                          const std::map<std::string, bool>& all_labels,
                          const RefinementOptions& options) {
  if (candidates.empty() || candidates.front().index != 0) {
    throw Error(ErrorCode::kInvalidArgument, "candidate list must start with the incumbent");
  }
  Selection selection;

  std::vector<size_t> ranked;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const Scored s = ScoreOn(classifier, index, candidates[i].definition, batch_labels);
    const bool out = Disqualified(s, options.max_failure_fraction);
    candidates[i].f1_on_batch = s.f1;
    selection.batch_table.push_back(
        F1Entry{candidates[i].index, s.f1, s.evaluated, s.failures, out});
    if (!out) ranked.push_back(i);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [&](size_t a, size_t b) {
    const CandidateDefinition& x = candidates[a];
    const CandidateDefinition& y = candidates[b];
    if (*x.f1_on_batch != *y.f1_on_batch) return *x.f1_on_batch > *y.f1_on_batch;
    if ((x.index == 0) != (y.index == 0)) return x.index == 0;
    if (x.edits.size() != y.edits.size()) return x.edits.size() < y.edits.size();
    return x.index < y.index;
  });
  if (ranked.size() > options.survivors) ranked.resize(options.survivors);
  for (size_t i : ranked) selection.survivors.push_back(candidates[i].index);

  std::vector<size_t> finalists = ranked;
  if (std::find(finalists.begin(), finalists.end(), size_t{0}) == finalists.end()) {
    finalists.insert(finalists.begin(), 0);
  }
  std::sort(finalists.begin(), finalists.end());

  std::optional<size_t> best;
  for (size_t i : finalists) {
    const Scored s = ScoreOn(classifier, index, candidates[i].definition, all_labels);
    const bool out = Disqualified(s, options.max_failure_fraction);
    candidates[i].f1_on_all = s.f1;
    selection.all_table.push_back(
        F1Entry{candidates[i].index, s.f1, s.evaluated, s.failures, out});
    if (out) continue;
    // Finalists are visited in index order, so only a strict gain displaces.
    if (!best || s.f1 > *candidates[*best].f1_on_all) best = i;
  }
  if (!best) {
    selection.warnings.push_back("every candidate was disqualified; keeping the incumbent");
    spdlog::warn("{}", selection.warnings.back());
    best = 0;
  }
  selection.winner = candidates[*best].index;
  return selection;
}

RefinementOutcome RefineRound(const Gateway& gateway, const Classifier& classifier,
                              const ImageIndex& index, const ConceptDefinition& def, int round,
                              const std::vector<LabeledExample>& round_examples,
                              const std::map<std::string, LabeledExample>& all_examples,
                              const RefinementOptions& options) {
  if (round_examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "refinement needs at least one labeled example");
  }
  RefinementOutcome outcome;
  RefinementReport& report = outcome.report;
  report.round = round;
  report.incumbent_version = def.version;

  for (const LabeledExample& ex : round_examples) {
    report.rationales.push_back(ArticulateFeedback(gateway, def, ex, index.Get(ex.image_id)));
  }
  CandidateSet set = GenerateCandidates(gateway, def, report.rationales, options);
  report.warnings = set.warnings;
  for (const CandidateDefinition& c : set.candidates) {
    report.candidates.push_back(CandidateSummary{c.index, c.edits, RenderDefinition(c.definition)});
  }

  std::map<std::string, bool> batch_labels;
  for (const LabeledExample& ex : round_examples) batch_labels[ex.image_id] = ex.user_label;
  std::map<std::string, bool> all_labels;
  for (const auto& [id, ex] : all_examples) all_labels[id] = ex.user_label;
  for (const auto& [id, label] : batch_labels) all_labels[id] = label;

  Selection selection =
      SelectCandidate(classifier, index, set.candidates, batch_labels, all_labels, options);
  report.batch_f1 = selection.batch_table;
  report.all_f1 = selection.all_table;
  report.survivors = selection.survivors;
  report.winner = selection.winner;
  report.warnings.insert(report.warnings.end(), selection.warnings.begin(),
                         selection.warnings.end());

  const auto by_index = [&](size_t idx) -> const CandidateDefinition& {
    return *std::find_if(set.candidates.begin(), set.candidates.end(),
                         [&](const CandidateDefinition& c) { return c.index == idx; });
  };
  const CandidateDefinition& incumbent = by_index(0);
  const CandidateDefinition& winner = by_index(selection.winner);
  report.incumbent_f1_all = incumbent.f1_on_all.value_or(0.0);
  report.winner_f1_all = winner.f1_on_all.value_or(report.incumbent_f1_all);
  report.changed = selection.winner != 0;
  outcome.definition = report.changed ? winner.definition : def;
  report.resulting_version = outcome.definition.version;
  return outcome;
}

void to_json(nlohmann::json& j, const LabeledExample& e) {
  j = {{"image_id", e.image_id},
       {"user_label", e.user_label},
       {"feedback_text", e.feedback_text},
       {"classifier_at_label", e.classifier_at_label},
       {"round", e.round}};
}

void from_json(const nlohmann::json& j, LabeledExample& e) {
  j.at("image_id").get_to(e.image_id);
  j.at("user_label").get_to(e.user_label);
  e.feedback_text = j.value("feedback_text", std::string());
  j.at("classifier_at_label").get_to(e.classifier_at_label);
  j.at("round").get_to(e.round);
}

void to_json(nlohmann::json& j, const Rationale& r) {
  j = {{"image_id", r.image_id}, {"clarification", r.clarification}};
}

void from_json(const nlohmann::json& j, Rationale& r) {
  j.at("image_id").get_to(r.image_id);
  j.at("clarification").get_to(r.clarification);
}

void to_json(nlohmann::json& j, const F1Entry& e) {
  j = {{"index", e.index},
       {"f1", e.f1},
       {"evaluated", e.evaluated},
       {"failures", e.failures},
       {"disqualified", e.disqualified}};
}

void from_json(const nlohmann::json& j, F1Entry& e) {
  j.at("index").get_to(e.index);
  j.at("f1").get_to(e.f1);
  e.evaluated = j.value("evaluated", size_t{0});
  e.failures = j.value("failures", size_t{0});
  e.disqualified = j.value("disqualified", false);
}

void to_json(nlohmann::json& j, const RefinementReport& r) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const CandidateSummary& c : r.candidates) {
    candidates.push_back({{"index", c.index}, {"edits", c.edits}, {"rendered", c.rendered}});
  }
  j = {{"round", r.round},
       {"incumbent_version", r.incumbent_version},
       {"resulting_version", r.resulting_version},
       {"changed", r.changed},
       {"rationales", r.rationales},
       {"candidates", candidates},
       {"batch_f1", r.batch_f1},
       {"all_f1", r.all_f1},
       {"survivors", r.survivors},
       {"winner", r.winner},
       {"incumbent_f1_all", r.incumbent_f1_all},
       {"winner_f1_all", r.winner_f1_all},
       {"warnings", r.warnings}};
}

void from_json(const nlohmann::json& j, RefinementReport& r) {
  j.at("round").get_to(r.round);
  j.at("incumbent_version").get_to(r.incumbent_version);
  j.at("resulting_version").get_to(r.resulting_version);
  j.at("changed").get_to(r.changed);
  j.at("rationales").get_to(r.rationales);
  r.candidates.clear();
  for (const auto& c : j.at("candidates")) {
    CandidateSummary s;
    c.at("index").get_to(s.index);
    c.at("edits").get_to(s.edits);
    s.rendered = c.value("rendered", std::string());
    r.candidates.push_back(std::move(s));
  }
  j.at("batch_f1").get_to(r.batch_f1);
  j.at("all_f1").get_to(r.all_f1);
  j.at("survivors").get_to(r.survivors);
  j.at("winner").get_to(r.winner);
  r.incumbent_f1_all = j.value("incumbent_f1_all", 0.0);
  r.winner_f1_all = j.value("winner_f1_all", 0.0);
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

}  // namespace deliberate
