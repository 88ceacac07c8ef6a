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

#ifndef DELIBERATE_REFINEMENT_H_
#define DELIBERATE_REFINEMENT_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deliberate/classifier.h"
#include "deliberate/concept.h"
#include "deliberate/gateway.h"
#include "deliberate/image_index.h"
#include "json.hpp"

namespace deliberate {

struct LabeledExample {
  std::string image_id;
  bool user_label = false;
  std::string feedback_text;
  ClassificationResult classifier_at_label;
  int round = 0;

  bool operator==(const LabeledExample&) const = default;
};

struct Rationale {
  std::string image_id;
  std::string clarification;

  bool operator==(const Rationale&) const = default;
};

struct CandidateDefinition {
  ConceptDefinition definition;
  std::vector<DefinitionEdit> edits;
  // 0 is the unmodified incumbent; i > 0 came from refinement sample i - 1.
  size_t index = 0;
  std::optional<double> f1_on_batch;
  std::optional<double> f1_on_all;
};

struct RefinementOptions {
  size_t candidates = 5;
  size_t survivors = 3;
  // A candidate whose classifications fail more often than this is dropped.
  double max_failure_fraction = 0.5;
};

// Wording shared by the articulation prompt inputs.
std::string ScopeText(bool in_scope);

// Turns one labeled example into an explicit clarification of the owner's
// intent.
Rationale ArticulateFeedback(const Gateway& gateway, const ConceptDefinition& def,
                             const LabeledExample& example, const ImageRecord& image);

// Parses one refinement response into edits against `def`. kParse when a
// block is incomplete or names an unknown signal.
std::vector<DefinitionEdit> ParseRefinementEdits(const ConceptDefinition& def,
                                                 const ParsedFields& fields);

struct CandidateSet {
  std::vector<CandidateDefinition> candidates;
  std::vector<std::string> warnings;
};

// Samples the refinement prompt M times. Samples that fail at the gateway,
// fail to parse, carry no edits, or do not apply cleanly are dropped with a
// warning; the incumbent always leads at index 0.
CandidateSet GenerateCandidates(const Gateway& gateway, const ConceptDefinition& def,
                                const std::vector<Rationale>& rationales,
                                const RefinementOptions& options = {});

struct F1Entry {
  size_t index = 0;
  double f1 = 0.0;
  size_t evaluated = 0;
  size_t failures = 0;
  bool disqualified = false;

  bool operator==(const F1Entry&) const = default;
};

struct Selection {
  size_t winner = 0;
  std::vector<F1Entry> batch_table;
  std::vector<F1Entry> all_table;
  // Top candidates by batch F1, in rank order.
  std::vector<size_t> survivors;
  std::vector<std::string> warnings;
};

// Two-stage greedy selection. Stage 1 ranks candidates by F1 on the batch
// (ties: incumbent, fewer edits, lower index) and keeps the top ones; stage 2
// scores the survivors and the incumbent on every label and picks the best
// (ties: incumbent, lower index). Keeping the incumbent in stage 2 makes the
// update non-regressive on the full label set.
Selection SelectCandidate(const Classifier& classifier, const ImageIndex& index,
                          std::vector<CandidateDefinition>& candidates,
                          const std::map<std::string, bool>& batch_labels,
                          const std::map<std::string, bool>& all_labels,
                          const RefinementOptions& options = {});

struct CandidateSummary {
  size_t index = 0;
  std::vector<DefinitionEdit> edits;
  std::string rendered;
};

struct RefinementReport {
  int round = 0;
  int incumbent_version = 0;
  int resulting_version = 0;
  bool changed = false;
  std::vector<Rationale> rationales;
  std::vector<CandidateSummary> candidates;
  std::vector<F1Entry> batch_f1;
  std::vector<F1Entry> all_f1;
  std::vector<size_t> survivors;
  size_t winner = 0;
  double incumbent_f1_all = 0.0;
  double winner_f1_all = 0.0;
  std::vector<std::string> warnings;
};

struct RefinementOutcome {
  ConceptDefinition definition;
  RefinementReport report;
};

// articulate -> generate -> select. The version only advances when a
// candidate beats the incumbent.
RefinementOutcome RefineRound(const Gateway& gateway, const Classifier& classifier,
                              const ImageIndex& index, const ConceptDefinition& def, int round,
                              const std::vector<LabeledExample>& round_examples,
                              const std::map<std::string, LabeledExample>& all_examples,
                              const RefinementOptions& options = {});

void to_json(nlohmann::json& j, const LabeledExample& e);
void from_json(const nlohmann::json& j, LabeledExample& e);
void to_json(nlohmann::json& j, const Rationale& r);
void from_json(const nlohmann::json& j, Rationale& r);
void to_json(nlohmann::json& j, const F1Entry& e);
void from_json(const nlohmann::json& j, F1Entry& e);
void to_json(nlohmann::json& j, const RefinementReport& r);
void from_json(const nlohmann::json& j, RefinementReport& r);

}  // namespace deliberate

#endif  // DELIBERATE_REFINEMENT_H_
