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

#ifndef DELIBERATE_SCOPING_H_
#define DELIBERATE_SCOPING_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "deliberate/concept.h"
#include "deliberate/gateway.h"
#include "deliberate/image_index.h"
#include "json.hpp"

namespace deliberate {

struct UnitConceptProposal {
  std::string name;
  std::string description;
  // The refined overall description the unit came from.
  std::string source;
};

struct Decomposition {
  std::string refined_description;
  std::vector<UnitConceptProposal> units;
  std::vector<std::string> warnings;
};

enum class PolarityHint { kPositive, kNegative, kBorderline };
enum class ScopingDecision { kPending, kAcceptPositive, kAcceptNegative, kDiscard };
enum class ProposalMode { kCategory, kBorderline };

std::string_view ToString(PolarityHint h);
std::string_view ToString(ScopingDecision d);
std::string_view ToString(ProposalMode m);
PolarityHint ParsePolarityHint(std::string_view text);
ScopingDecision ParseScopingDecision(std::string_view text);
ProposalMode ParseProposalMode(std::string_view text);

struct SubconceptProposal {
  std::string id;
  // Unit node the proposal refines.
  std::string unit_id;
  std::string name;
  std::string description;
  PolarityHint polarity_hint = PolarityHint::kPositive;
  std::vector<std::string> representative_images;
  ScopingDecision decision = ScopingDecision::kPending;

  bool operator==(const SubconceptProposal&) const = default;
};

struct ScopingOptions {
  size_t representative_count = 8;
  int duplicate_retries = 3;
};

// Splits a concept into at most three necessary unit concepts. A response
// with no conditions yields one unit carrying the refined description.
Decomposition Decompose(const Gateway& gateway, const std::string& concept_name,
                        const std::string& description);

// The scoping draft: root plus one ACCEPTED necessary node per unit.
ConceptDefinition DraftDefinition(const std::string& concept_name,
                                  const Decomposition& decomposition);

// Asks for one new subconcept under `unit_id` whose name differs
// (case-insensitively) from every prior proposal and existing node name.
// Retries with fresh samples; kDuplicateExhausted after the budget.
SubconceptProposal ProposeSubconcept(const Gateway& gateway, const ImageIndex& index,
                                     const ConceptDefinition& draft, const std::string& unit_id,
                                     const std::vector<SubconceptProposal>& prior,
                                     ProposalMode mode, const std::string& proposal_id,
                                     const ScopingOptions& options = {});

// Builds d0: accepted proposals become ACCEPTED signals under their unit,
// discarded ones REJECTED nodes kept for audit. `decisions` (by proposal id)
// override the proposals' own decisions; anything left PENDING is an error
// listing the ids. Accepted nodes carry `decided_by` as provenance.
ConceptDefinition ApplyScopingDecisions(const ConceptDefinition& draft,
                                        const std::vector<SubconceptProposal>& proposals,
                                        const std::map<std::string, ScopingDecision>& decisions,
                                        Provenance decided_by = Provenance::kUser);

void to_json(nlohmann::json& j, const UnitConceptProposal& u);
void from_json(const nlohmann::json& j, UnitConceptProposal& u);
void to_json(nlohmann::json& j, const Decomposition& d);
void from_json(const nlohmann::json& j, Decomposition& d);
void to_json(nlohmann::json& j, const SubconceptProposal& p);
void from_json(const nlohmann::json& j, SubconceptProposal& p);

}  // namespace deliberate

#endif  // DELIBERATE_SCOPING_H_
