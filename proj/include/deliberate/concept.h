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

#ifndef DELIBERATE_CONCEPT_H_
#define DELIBERATE_CONCEPT_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace deliberate {

enum class NodeKind { kNecessary, kPositive, kNegative };
enum class Provenance { kAuto, kUser, kRefined };
enum class NodeStatus { kProposed, kAccepted, kRejected };

std::string_view ToString(NodeKind kind);
std::string_view ToString(Provenance provenance);
std::string_view ToString(NodeStatus status);
NodeKind ParseNodeKind(std::string_view text);
Provenance ParseProvenance(std::string_view text);
NodeStatus ParseNodeStatus(std::string_view text);

inline bool IsSignal(NodeKind kind) { return kind != NodeKind::kNecessary; }

// One node of a structured concept definition. The root stands for the
// concept itself; its children are the unit concepts (necessary conditions),
// and the children of a unit are the positive/negative signals under it.
struct ConceptNode {
  std::string id;
  std::string name;
  std::string description;
  NodeKind kind = NodeKind::kNecessary;
  std::vector<ConceptNode> children;
  Provenance provenance = Provenance::kAuto;
  NodeStatus status = NodeStatus::kAccepted;

  bool operator==(const ConceptNode&) const = default;
};

enum class EditOp { kEditDescription, kAddSignal, kSetStatus };
std::string_view ToString(EditOp op);
EditOp ParseEditOp(std::string_view text);

struct DefinitionEdit {
  EditOp op = EditOp::kEditDescription;
  // Node being edited, or the parent for kAddSignal.
  std::string target_id;
  std::string old_description;
  std::string new_description;
  // kAddSignal payload.
  std::string new_name;
  NodeKind kind = NodeKind::kPositive;
  // Assigned when the edit is applied; recorded in the edit log.
  std::string new_node_id;
  // kSetStatus payload.
  NodeStatus status = NodeStatus::kAccepted;
  // Provenance stamped on added or edited nodes.
  Provenance provenance = Provenance::kRefined;

  bool operator==(const DefinitionEdit&) const = default;
};

struct ConceptDefinition {
  std::string concept_name;
  std::string free_description;
  ConceptNode root;
  int version = 0;
  std::optional<int> parent_version;
  std::vector<DefinitionEdit> edit_log;

  bool operator==(const ConceptDefinition&) const = default;
};

struct Violation {
  std::string node_id;
  std::string rule;
  std::string message;
};

inline constexpr int kDefaultDepthLimit = 3;
inline constexpr int kMaxUnits = 3;

// A definition with only the root node and the given concept text.
ConceptDefinition MakeDefinition(std::string concept_name,
                                 std::string free_description);

// Returns the next unused id of the form "nNNNN".
std::string NextNodeId(const ConceptDefinition& def);

const ConceptNode* FindNode(const ConceptNode& root, std::string_view id);
ConceptNode* FindNode(ConceptNode& root, std::string_view id);

// Case-insensitive lookup over ACCEPTED nodes, preferring the lowest id.
const ConceptNode* FindNodeByName(const ConceptNode& root,
                                  std::string_view name);

std::vector<Violation> Validate(const ConceptDefinition& def,
                                int depth_limit = kDefaultDepthLimit);

// Renders the ACCEPTED subtree to the classifier prompt text. Byte-stable for
// equal definitions; siblings are emitted in node-id order.
std::string RenderDefinition(const ConceptDefinition& def);

// Zero-shot prompt text: name and description only, no structure.
std::string RenderBareConcept(std::string_view concept_name,
                              std::string_view description);

std::string RenderMarkdown(const ConceptDefinition& def);

// Leaf ids whose judgments EvaluateSemantics needs, in node-id order.
std::vector<std::string> RequiredJudgments(const ConceptNode& node);

// Boolean semantics of a definition tree:
//   necessary children -> conjunction;
//   signal children -> (any positive) and not (any negative), where a node
//   with no accepted positive child contributes its own judgment instead;
//   a node without accepted children -> its own judgment.
// Non-ACCEPTED nodes are ignored.
bool EvaluateSemantics(const ConceptNode& node,
                       const std::map<std::string, bool>& leaf_judgments);

// Applies edits atomically to a copy; the result has version + 1.
ConceptDefinition ApplyEdits(const ConceptDefinition& def,
                             const std::vector<DefinitionEdit>& edits);

inline constexpr int kDefinitionSchemaVersion = 1;

void to_json(nlohmann::json& j, const ConceptNode& node);
void from_json(const nlohmann::json& j, ConceptNode& node);
void to_json(nlohmann::json& j, const DefinitionEdit& edit);
void from_json(const nlohmann::json& j, DefinitionEdit& edit);
void to_json(nlohmann::json& j, const ConceptDefinition& def);
void from_json(const nlohmann::json& j, ConceptDefinition& def);

}  // namespace deliberate

#endif  // DELIBERATE_CONCEPT_H_
