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

#include "deliberate/scoping.h"

#include <set>

#include "deliberate/error.h"
#include "deliberate/text_embedding.h"

namespace deliberate {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void CollectNames(const ConceptNode& node, std::set<std::string>& out) {
  for (const ConceptNode& c : node.children) {
    out.insert(Lower(c.name));
    CollectNames(c, out);
  }
}

void SignalLines(const ConceptNode& node, std::string& out) {
  for (const ConceptNode& c : node.children) {
    if (IsSignal(c.kind) && c.status != NodeStatus::kRejected) {
      out += "- " + c.name + ": " + c.description + "\n";
    }
    SignalLines(c, out);
  }
}

}  // namespace

std::string_view ToString(PolarityHint h) {
  switch (h) {
    case PolarityHint::kPositive: return "POSITIVE";
    case PolarityHint::kNegative: return "NEGATIVE";
    case PolarityHint::kBorderline: return "BORDERLINE";
  }
  return "POSITIVE";
}

std::string_view ToString(ScopingDecision d) {
  switch (d) {
    case ScopingDecision::kPending: return "PENDING";
    case ScopingDecision::kAcceptPositive: return "ACCEPT_POSITIVE";
    case ScopingDecision::kAcceptNegative: return "ACCEPT_NEGATIVE";
    case ScopingDecision::kDiscard: return "DISCARD";
  }
  return "PENDING";
}

std::string_view ToString(ProposalMode m) {
  return m == ProposalMode::kBorderline ? "BORDERLINE" : "CATEGORY";
}

PolarityHint ParsePolarityHint(std::string_view text) {
  for (auto h : {PolarityHint::kPositive, PolarityHint::kNegative, PolarityHint::kBorderline}) {
    if (ToString(h) == text) return h;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown polarity hint '" + std::string(text) + "'");
}

ScopingDecision ParseScopingDecision(std::string_view text) {
  for (auto d : {ScopingDecision::kPending, ScopingDecision::kAcceptPositive,
                 ScopingDecision::kAcceptNegative, ScopingDecision::kDiscard}) {
    if (ToString(d) == text) return d;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scoping decision '" + std::string(text) + "'");
}

ProposalMode ParseProposalMode(std::string_view text) {
  if (text == "CATEGORY") return ProposalMode::kCategory;
  if (text == "BORDERLINE") return ProposalMode::kBorderline;
  throw Error(ErrorCode::kInvalidArgument, "proposal mode must be CATEGORY or BORDERLINE");
}

Decomposition Decompose(const Gateway& gateway, const std::string& concept_name,
                        const std::string& description) {
  if (concept_name.empty()) throw Error(ErrorCode::kInvalidArgument, "concept name is empty");
  const ModelResponse response = gateway.Complete(MakeRequest(
      TemplateId::kDecompose,
      {{"concept_name", concept_name}, {"concept_description", description}}));
  Decomposition out;
  out.refined_description = response.parsed.values.at("new-description");
  if (out.refined_description.empty()) out.refined_description = description;
  const auto it = response.parsed.lists.find("condition");
  if (it != response.parsed.lists.end()) {
    for (const FieldRecord& rec : it->second) {
      if (rec.at("name").empty()) continue;
      if (out.units.size() == static_cast<size_t>(kMaxUnits)) {
        out.warnings.push_back("decomposition returned more than " + std::to_string(kMaxUnits) +
                               " conditions; extra conditions dropped");
        break;
      }
      out.units.push_back({rec.at("name"), rec.at("description"), out.refined_description});
    }
  }
  if (out.units.empty()) {
    out.units.push_back({concept_name, out.refined_description, out.refined_description});
  }
  return out;
}

ConceptDefinition DraftDefinition(const std::string& concept_name,
                                  const Decomposition& decomposition) {
  ConceptDefinition def = MakeDefinition(concept_name, decomposition.refined_description);
  for (const UnitConceptProposal& u : decomposition.units) {
    ConceptNode node;
    node.id = NextNodeId(def);
    node.name = u.name;
    node.description = u.description;
    node.kind = NodeKind::kNecessary;
    def.root.children.push_back(std::move(node));
  }
  return def;
}

SubconceptProposal ProposeSubconcept(const Gateway& gateway, const ImageIndex& index,
                                     const ConceptDefinition& draft, const std::string& unit_id,
                                     const std::vector<SubconceptProposal>& prior,
                                     ProposalMode mode, const std::string& proposal_id,
                                     const ScopingOptions& options) {
  const ConceptNode* unit = FindNode(draft.root, unit_id);
  if (unit == nullptr || unit == &draft.root || unit->kind != NodeKind::kNecessary) {
    throw Error(ErrorCode::kUnknownNode, "unknown unit concept '" + unit_id + "'");
  }
  std::set<std::string> taken;
  CollectNames(draft.root, taken);
  std::string previous;
  SignalLines(draft.root, previous);
  for (const SubconceptProposal& p : prior) {
    taken.insert(Lower(p.name));
    previous += "- " + p.name + ": " + p.description + "\n";
  }
  const TemplateId id = mode == ProposalMode::kCategory ? TemplateId::kProposeCategory
                                                        : TemplateId::kProposeBorderline;
  const std::string context =
      unit->description.empty() ? unit->name : unit->name + ": " + unit->description;
  for (int attempt = 0; attempt <= options.duplicate_retries; ++attempt) {
    PromptRequest request = MakeRequest(id, {{"definition", RenderDefinition(draft)},
                                             {"previous_signals", previous},
                                             {"context", context}});
    request.decoding.sample_index = static_cast<uint64_t>(attempt);
    const ModelResponse response = gateway.Complete(request);
    for (const FieldRecord& rec : response.parsed.lists.at("subconcept")) {
      const std::string& name = rec.at("name");
      if (name.empty() || taken.contains(Lower(name))) continue;
      SubconceptProposal proposal;
      proposal.id = proposal_id;
      proposal.unit_id = unit_id;
      proposal.name = name;
      proposal.description = rec.at("description");
      proposal.polarity_hint =
          mode == ProposalMode::kCategory ? PolarityHint::kPositive : PolarityHint::kBorderline;
      const std::string query = proposal.description.empty() ? name : proposal.description;
      for (const QueryResult& r :
           SearchText(gateway, index, query, options.representative_count)) {
        proposal.representative_images.push_back(r.image_id);
      }
      return proposal;
    }
  }
  throw Error(ErrorCode::kDuplicateExhausted,
              "every proposal for unit '" + unit->name + "' repeated an earlier one after " +
                  std::to_string(options.duplicate_retries) + " retries");
}

ConceptDefinition ApplyScopingDecisions(const ConceptDefinition& draft,
                                        const std::vector<SubconceptProposal>& proposals,
                                        const std::map<std::string, ScopingDecision>& decisions,
                                        Provenance decided_by) {
  std::set<std::string> known;
  for (const SubconceptProposal& p : proposals) known.insert(p.id);
  for (const auto& [id, _] : decisions) {
    if (!known.contains(id)) throw Error(ErrorCode::kNotFound, "unknown proposal id '" + id + "'");
  }
  std::vector<std::string> pending;
  for (const SubconceptProposal& p : proposals) {
    const auto it = decisions.find(p.id);
    const ScopingDecision d = it == decisions.end() ? p.decision : it->second;
    if (d == ScopingDecision::kPending) pending.push_back(p.id);
  }
  if (!pending.empty()) {
    std::string message = "unresolved proposals:";
    for (const std::string& id : pending) message += " " + id;
    throw Error(ErrorCode::kValidation, message);
  }

  ConceptDefinition def = draft;
  for (const SubconceptProposal& p : proposals) {
    const auto it = decisions.find(p.id);
    const ScopingDecision d = it == decisions.end() ? p.decision : it->second;
    ConceptNode* unit = FindNode(def.root, p.unit_id);
    if (unit == nullptr) {
      throw Error(ErrorCode::kUnknownNode,
                  "proposal '" + p.id + "' refers to unknown unit '" + p.unit_id + "'");
    }
    ConceptNode node;
    node.id = NextNodeId(def);
    node.name = p.name;
    node.description = p.description;
    switch (d) {
      case ScopingDecision::kAcceptPositive:
        node.kind = NodeKind::kPositive;
        node.provenance = decided_by;
        break;
      case ScopingDecision::kAcceptNegative:
        node.kind = NodeKind::kNegative;
        node.provenance = decided_by;
        break;
      default:
        node.kind = p.polarity_hint == PolarityHint::kNegative ? NodeKind::kNegative
                                                               : NodeKind::kPositive;
        node.status = NodeStatus::kRejected;
        break;
    }
    // NextNodeId does not mutate, so the unit pointer is still valid.
    unit->children.push_back(std::move(node));
  }
  def.version = 0;
  def.parent_version.reset();
  def.edit_log.clear();
  const auto violations = Validate(def);
  if (!violations.empty()) {
    std::string message = "scoped definition is invalid:";
    for (const Violation& v : violations) message += " [" + v.rule + " @" + v.node_id + "]";
    throw Error(ErrorCode::kValidation, message);
  }
  return def;
}

void to_json(nlohmann::json& j, const UnitConceptProposal& u) {
  j = nlohmann::json{{"name", u.name}, {"description", u.description}, {"source", u.source}};
}

void from_json(const nlohmann::json& j, UnitConceptProposal& u) {
  u.name = j.at("name").get<std::string>();
  u.description = j.value("description", std::string());
  u.source = j.value("source", std::string());
}

void to_json(nlohmann::json& j, const Decomposition& d) {
  j = nlohmann::json{{"refined_description", d.refined_description},
                     {"units", d.units},
                     {"warnings", d.warnings}};
}

void from_json(const nlohmann::json& j, Decomposition& d) {
  d.refined_description = j.at("refined_description").get<std::string>();
  d.units = j.at("units").get<std::vector<UnitConceptProposal>>();
  d.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const SubconceptProposal& p) {
  j = nlohmann::json{{"id", p.id},
                     {"unit_id", p.unit_id},
                     {"name", p.name},
                     {"description", p.description},
                     {"polarity_hint", ToString(p.polarity_hint)},
                     {"representative_images", p.representative_images},
                     {"decision", ToString(p.decision)}};
}

void from_json(const nlohmann::json& j, SubconceptProposal& p) {
  p.id = j.at("id").get<std::string>();
  p.unit_id = j.at("unit_id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.description = j.value("description", std::string());
  p.polarity_hint = ParsePolarityHint(j.value("polarity_hint", std::string("POSITIVE")));
  p.representative_images = j.value("representative_images", std::vector<std::string>{});
  p.decision = ParseScopingDecision(j.value("decision", std::string("PENDING")));
}

}  // namespace deliberate
