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

#include "deliberate/concept.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "deliberate/error.h"

namespace deliberate {
namespace {

constexpr std::string_view kIncludesHeader =
    "This includes any of the following visual elements:";
constexpr std::string_view kExcludesHeader =
    "However, the following visual elements are excluded:";

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<const ConceptNode*> AcceptedChildren(const ConceptNode& node) {
  std::vector<const ConceptNode*> out;
  for (const ConceptNode& child : node.children) {
    if (child.status == NodeStatus::kAccepted) out.push_back(&child);
  }
  std::sort(out.begin(), out.end(),
            [](const ConceptNode* a, const ConceptNode* b) { return a->id < b->id; });
  return out;
}

std::vector<const ConceptNode*> AcceptedOfKind(const ConceptNode& node,
                                               NodeKind kind) {
  std::vector<const ConceptNode*> out;
  for (const ConceptNode* child : AcceptedChildren(node)) {
    if (child->kind == kind) out.push_back(child);
  }
  return out;
}

bool HasMixedChildren(const ConceptNode& node) {
  bool necessary = false;
  bool signal = false;
  for (const ConceptNode& child : node.children) {
    (IsSignal(child.kind) ? signal : necessary) = true;
  }
  return necessary && signal;
}

void CheckStructure(const ConceptNode& node) {
  if (HasMixedChildren(node)) {
    throw Error(ErrorCode::kValidation,
                "mixed-children: node '" + node.id +
                    "' has both necessary and signal children");
  }
  for (const ConceptNode& child : node.children) CheckStructure(child);
}

std::string ItemText(const ConceptNode& node) {
  if (node.description.empty()) return node.name;
  return node.name + ": " + node.description;
}

void RenderSignalBlocks(const ConceptNode& node, size_t indent,
                        std::string& out) {
  const std::string pad(indent, ' ');
  const auto emit = [&](std::string_view header,
                        const std::vector<const ConceptNode*>& items) {
    if (items.empty()) return;
    out += pad;
    out += header;
    out += '\n';
    for (const ConceptNode* item : items) {
      out += pad + "- " + ItemText(*item) + "\n";
      RenderSignalBlocks(*item, indent + 4, out);
    }
  };
  emit(kIncludesHeader, AcceptedOfKind(node, NodeKind::kPositive));
  emit(kExcludesHeader, AcceptedOfKind(node, NodeKind::kNegative));
}

void RenderNecessary(const ConceptNode& node, const std::string& label,
                     size_t indent, std::string& out) {
  out += std::string(indent, ' ') + "Condition " + label + ". " +
         ItemText(node) + "\n";
  const auto nested = AcceptedOfKind(node, NodeKind::kNecessary);
  if (!nested.empty()) {
    for (size_t i = 0; i < nested.size(); ++i) {
      RenderNecessary(*nested[i], label + "." + std::to_string(i + 1),
                      indent + 2, out);
    }
    return;
  }
  RenderSignalBlocks(node, indent + 2, out);
}

void MarkdownSignals(const ConceptNode& node, size_t indent, std::string& out) {
  const std::string pad(indent, ' ');
  const auto emit = [&](std::string_view header,
                        const std::vector<const ConceptNode*>& items) {
    if (items.empty()) return;
    if (indent == 0) {
      out += "\n**" + std::string(header) + "**\n\n";
    } else {
      out += pad + "- " + std::string(header) + "\n";
    }
    for (const ConceptNode* item : items) {
      out += pad + (indent == 0 ? "" : "  ") + "- *" + item->name + "*";
      if (!item->description.empty()) out += ": " + item->description;
      out += "\n";
      MarkdownSignals(*item, indent + 4, out);
    }
  };
  emit(kIncludesHeader, AcceptedOfKind(node, NodeKind::kPositive));
  emit(kExcludesHeader, AcceptedOfKind(node, NodeKind::kNegative));
}

void MarkdownNecessary(const ConceptNode& node, const std::string& label,
                       int level, std::string& out) {
  out += "\n" + std::string(static_cast<size_t>(level), '#') + " Condition " +
         label + ": " + node.name + "\n\n";
  if (!node.description.empty()) out += node.description + "\n";
  const auto nested = AcceptedOfKind(node, NodeKind::kNecessary);
  for (size_t i = 0; i < nested.size(); ++i) {
    MarkdownNecessary(*nested[i], label + "." + std::to_string(i + 1),
                      std::min(level + 1, 6), out);
  }
  MarkdownSignals(node, 0, out);
}

int IdNumber(std::string_view id) {
  if (id.size() < 2 || id[0] != 'n') return -1;
  int value = 0;
  for (char c : id.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return -1;
    value = value * 10 + (c - '0');
  }
  return value;
}

void MaxIdNumber(const ConceptNode& node, int& max_id) {
  max_id = std::max(max_id, IdNumber(node.id));
  for (const ConceptNode& child : node.children) MaxIdNumber(child, max_id);
}

void ValidateNode(const ConceptNode& node, int depth, int depth_limit,
                  std::set<std::string>& seen, std::vector<Violation>& out) {
  if (node.id.empty()) {
    out.push_back({node.id, "empty-id", "node '" + node.name + "' has no id"});
  } else if (!seen.insert(node.id).second) {
    out.push_back({node.id, "duplicate-id", "node id '" + node.id + "' repeats"});
  }
  if (depth > depth_limit) {
    out.push_back({node.id, "depth",
                   "depth " + std::to_string(depth) + " exceeds limit " +
                       std::to_string(depth_limit)});
  }
  if (HasMixedChildren(node)) {
    out.push_back({node.id, "mixed-children",
                   "children mix necessary conditions and signals"});
  }
  if (IsSignal(node.kind)) {
    for (const ConceptNode& child : node.children) {
      if (!IsSignal(child.kind)) {
        out.push_back({child.id, "signal-necessary-child",
                       "signal '" + node.id + "' owns a necessary condition"});
      }
    }
  }
  for (const ConceptNode& child : node.children) {
    ValidateNode(child, depth + 1, depth_limit, seen, out);
  }
}

void CollectJudgments(const ConceptNode& node, std::vector<std::string>& out) {
  const auto accepted = AcceptedChildren(node);
  if (accepted.empty()) {
    out.push_back(node.id);
    return;
  }
  bool has_positive = false;
  bool all_necessary = true;
  for (const ConceptNode* child : accepted) {
    if (IsSignal(child->kind)) all_necessary = false;
    if (child->kind == NodeKind::kPositive) has_positive = true;
  }
  if (!all_necessary && !has_positive) out.push_back(node.id);
  for (const ConceptNode* child : accepted) CollectJudgments(*child, out);
}

bool Judgment(const ConceptNode& node,
              const std::map<std::string, bool>& judgments) {
  const auto it = judgments.find(node.id);
  if (it == judgments.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "missing judgment for leaf '" + node.id + "' (" + node.name + ")");
  }
  return it->second;
}

bool Evaluate(const ConceptNode& node,
              const std::map<std::string, bool>& judgments) {
  const auto accepted = AcceptedChildren(node);
  if (accepted.empty()) return Judgment(node, judgments);
  const bool all_necessary =
      std::none_of(accepted.begin(), accepted.end(),
                   [](const ConceptNode* c) { return IsSignal(c->kind); });
  if (all_necessary) {
    bool all = true;
    for (const ConceptNode* child : accepted) all = Evaluate(*child, judgments) && all;
    return all;
  }
  bool has_positive = false;
  bool any_positive = false;
  bool any_negative = false;
  for (const ConceptNode* child : accepted) {
    const bool value = Evaluate(*child, judgments);
    if (child->kind == NodeKind::kPositive) {
      has_positive = true;
      any_positive = any_positive || value;
    } else if (child->kind == NodeKind::kNegative) {
      any_negative = any_negative || value;
    }
  }
  const bool included = has_positive ? any_positive : Judgment(node, judgments);
  return included && !any_negative;
}

}  // namespace

std::string_view ToString(NodeKind kind) {
  switch (kind) {
    case NodeKind::kNecessary: return "NECESSARY";
    case NodeKind::kPositive: return "POSITIVE";
    case NodeKind::kNegative: return "NEGATIVE";
  }
  return "NECESSARY";
}

std::string_view ToString(Provenance provenance) {
  switch (provenance) {
    case Provenance::kAuto: return "AUTO";
    case Provenance::kUser: return "USER";
    case Provenance::kRefined: return "REFINED";
  }
  return "AUTO";
}

std::string_view ToString(NodeStatus status) {
  switch (status) {
    case NodeStatus::kProposed: return "PROPOSED";
    case NodeStatus::kAccepted: return "ACCEPTED";
    case NodeStatus::kRejected: return "REJECTED";
  }
  return "PROPOSED";
}

std::string_view ToString(EditOp op) {
  switch (op) {
    case EditOp::kEditDescription: return "EDIT_DESCRIPTION";
    case EditOp::kAddSignal: return "ADD_SIGNAL";
    case EditOp::kSetStatus: return "SET_STATUS";
  }
  return "EDIT_DESCRIPTION";
}

NodeKind ParseNodeKind(std::string_view text) {
  if (EqualsIgnoreCase(text, "NECESSARY")) return NodeKind::kNecessary;
  if (EqualsIgnoreCase(text, "POSITIVE")) return NodeKind::kPositive;
  if (EqualsIgnoreCase(text, "NEGATIVE")) return NodeKind::kNegative;
  throw Error(ErrorCode::kInvalidArgument, "unknown node kind '" + std::string(text) + "'");
}

Provenance ParseProvenance(std::string_view text) {
  if (EqualsIgnoreCase(text, "AUTO")) return Provenance::kAuto;
  if (EqualsIgnoreCase(text, "USER")) return Provenance::kUser;
  if (EqualsIgnoreCase(text, "REFINED")) return Provenance::kRefined;
  throw Error(ErrorCode::kInvalidArgument, "unknown provenance '" + std::string(text) + "'");
}

NodeStatus ParseNodeStatus(std::string_view text) {
  if (EqualsIgnoreCase(text, "PROPOSED")) return NodeStatus::kProposed;
  if (EqualsIgnoreCase(text, "ACCEPTED")) return NodeStatus::kAccepted;
  if (EqualsIgnoreCase(text, "REJECTED")) return NodeStatus::kRejected;
  throw Error(ErrorCode::kInvalidArgument, "unknown status '" + std::string(text) + "'");
}

EditOp ParseEditOp(std::string_view text) {
  if (EqualsIgnoreCase(text, "EDIT_DESCRIPTION")) return EditOp::kEditDescription;
  if (EqualsIgnoreCase(text, "ADD_SIGNAL")) return EditOp::kAddSignal;
  if (EqualsIgnoreCase(text, "SET_STATUS")) return EditOp::kSetStatus;
  throw Error(ErrorCode::kInvalidArgument, "unknown edit op '" + std::string(text) + "'");
}

ConceptDefinition MakeDefinition(std::string concept_name,
                                 std::string free_description) {
  ConceptDefinition def;
  def.root.id = "root";
  def.root.name = concept_name;
  def.root.description = free_description;
  def.root.kind = NodeKind::kNecessary;
  def.concept_name = std::move(concept_name);
  def.free_description = std::move(free_description);
  return def;
}

std::string NextNodeId(const ConceptDefinition& def) {
  int max_id = 0;
  MaxIdNumber(def.root, max_id);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "n%04d", max_id + 1);
  return buf;
}

const ConceptNode* FindNode(const ConceptNode& root, std::string_view id) {
  if (root.id == id) return &root;
  for (const ConceptNode& child : root.children) {
    if (const ConceptNode* found = FindNode(child, id)) return found;
  }
  return nullptr;
}

ConceptNode* FindNode(ConceptNode& root, std::string_view id) {
  return const_cast<ConceptNode*>(
      FindNode(static_cast<const ConceptNode&>(root), id));
}

const ConceptNode* FindNodeByName(const ConceptNode& root,
                                  std::string_view name) {
  const ConceptNode* best = nullptr;
  const auto visit = [&](const auto& self, const ConceptNode& node) -> void {
    if (node.status == NodeStatus::kAccepted && EqualsIgnoreCase(node.name, name) &&
        (best == nullptr || node.id < best->id)) {
      best = &node;
    }
    for (const ConceptNode& child : node.children) self(self, child);
  };
  visit(visit, root);
  return best;
}

std::vector<Violation> Validate(const ConceptDefinition& def, int depth_limit) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  ValidateNode(def.root, 0, depth_limit, seen, out);
  size_t units = 0;
  for (const ConceptNode& child : def.root.children) {
    if (IsSignal(child.kind)) {
      out.push_back({child.id, "root-kind",
                     "root-level children must be necessary conditions"});
    }
    if (child.status == NodeStatus::kAccepted) ++units;
  }
  if (units < 1 || units > static_cast<size_t>(kMaxUnits)) {
    out.push_back({def.root.id, "unit-count",
                   "definition has " + std::to_string(units) +
                       " accepted unit concepts; expected 1 to " +
                       std::to_string(kMaxUnits)});
  }
  if (def.version < 0) {
    out.push_back({"", "version", "negative version"});
  }
  if (def.version > 0 && def.parent_version.has_value() &&
      *def.parent_version >= def.version) {
    out.push_back({"", "version-lineage", "parent_version must precede version"});
  }
  return out;
}

std::string RenderDefinition(const ConceptDefinition& def) {
  CheckStructure(def.root);
  std::string out = RenderBareConcept(def.concept_name, def.free_description);
  const auto units = AcceptedOfKind(def.root, NodeKind::kNecessary);
  if (!units.empty()) {
    out += "\nAn image is in scope only if it satisfies all of the following "
           "necessary conditions.\n";
    for (size_t i = 0; i < units.size(); ++i) {
      RenderNecessary(*units[i], std::to_string(i + 1), 0, out);
    }
  }
  return out;
}

std::string RenderBareConcept(std::string_view concept_name,
                              std::string_view description) {
  std::string out = "Concept: " + std::string(concept_name) + "\n";
  if (!description.empty()) {
    out += "Description: " + std::string(description) + "\n";
  }
  return out;
}

std::string RenderMarkdown(const ConceptDefinition& def) {
  CheckStructure(def.root);
  std::string out = "# " + def.concept_name + " (version " +
                    std::to_string(def.version) + ")\n";
  if (!def.free_description.empty()) out += "\n" + def.free_description + "\n";
  const auto units = AcceptedOfKind(def.root, NodeKind::kNecessary);
  for (size_t i = 0; i < units.size(); ++i) {
    MarkdownNecessary(*units[i], std::to_string(i + 1), 2, out);
  }
  return out;
}

std::vector<std::string> RequiredJudgments(const ConceptNode& node) {
  std::vector<std::string> out;
  CollectJudgments(node, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool EvaluateSemantics(const ConceptNode& node,
                       const std::map<std::string, bool>& leaf_judgments) {
  for (const std::string& id : RequiredJudgments(node)) {
    if (!leaf_judgments.contains(id)) {
      const ConceptNode* leaf = FindNode(node, id);
      throw Error(ErrorCode::kInvalidArgument,
                  "missing judgment for leaf '" + id + "' (" +
                      (leaf != nullptr ? leaf->name : std::string()) + ")");
    }
  }
  return Evaluate(node, leaf_judgments);
}

ConceptDefinition ApplyEdits(const ConceptDefinition& def,
                             const std::vector<DefinitionEdit>& edits) {
  ConceptDefinition next = def;
  for (DefinitionEdit edit : edits) {
    ConceptNode* target = FindNode(next.root, edit.target_id);
    if (target == nullptr) {
      throw Error(ErrorCode::kUnknownNode,
                  "unknown node id '" + edit.target_id + "'");
    }
    switch (edit.op) {
      case EditOp::kEditDescription:
        if (target->description != edit.old_description) {
          throw Error(ErrorCode::kStaleEdit,
                      "stale edit on '" + edit.target_id +
                          "': current description is '" + target->description +
                          "', edit expected '" + edit.old_description + "'");
        }
        target->description = edit.new_description;
        target->provenance = edit.provenance;
        if (target == &next.root) next.free_description = edit.new_description;
        break;
      case EditOp::kAddSignal: {
        if (!IsSignal(edit.kind)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "ADD_SIGNAL kind must be POSITIVE or NEGATIVE");
        }
        if (target == &next.root) {
          throw Error(ErrorCode::kValidation,
                      "signals cannot be added at the root; pick a unit concept");
        }
        for (const ConceptNode& child : target->children) {
          if (!IsSignal(child.kind)) {
            throw Error(ErrorCode::kValidation,
                        "node '" + edit.target_id +
                            "' holds necessary conditions and cannot take signals");
          }
        }
        if (edit.new_name.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "ADD_SIGNAL requires a name");
        }
        ConceptNode node;
        node.id = NextNodeId(next);
        node.name = edit.new_name;
        node.description = edit.new_description;
        node.kind = edit.kind;
        node.provenance = edit.provenance;
        node.status = NodeStatus::kAccepted;
        edit.new_node_id = node.id;
        // Re-resolve: NextNodeId walked the tree but did not mutate it.
        FindNode(next.root, edit.target_id)->children.push_back(std::move(node));
        break;
      }
      case EditOp::kSetStatus:
        if (target == &next.root) {
          throw Error(ErrorCode::kValidation, "the root node has no status");
        }
        target->status = edit.status;
        break;
    }
    next.edit_log.push_back(std::move(edit));
  }
  next.parent_version = def.version;
  next.version = def.version + 1;
  const auto violations = Validate(next);
  if (!violations.empty()) {
    std::string message = "edited definition is invalid:";
    for (const Violation& v : violations) {
      message += " [" + v.rule + " @" + v.node_id + ": " + v.message + "]";
    }
    throw Error(ErrorCode::kValidation, message);
  }
  return next;
}

void to_json(nlohmann::json& j, const ConceptNode& node) {
  j = nlohmann::json{{"id", node.id},
                     {"name", node.name},
                     {"description", node.description},
                     {"kind", ToString(node.kind)},
                     {"provenance", ToString(node.provenance)},
                     {"status", ToString(node.status)},
                     {"children", node.children}};
}

void from_json(const nlohmann::json& j, ConceptNode& node) {
  node.id = j.at("id").get<std::string>();
  node.name = j.at("name").get<std::string>();
  node.description = j.value("description", std::string());
  node.kind = ParseNodeKind(j.at("kind").get<std::string>());
  node.provenance = ParseProvenance(j.value("provenance", std::string("AUTO")));
  node.status = ParseNodeStatus(j.value("status", std::string("ACCEPTED")));
  node.children = j.value("children", std::vector<ConceptNode>{});
}

void to_json(nlohmann::json& j, const DefinitionEdit& edit) {
  j = nlohmann::json{{"op", ToString(edit.op)}, {"target_id", edit.target_id}};
  switch (edit.op) {
    case EditOp::kEditDescription:
      j["old_description"] = edit.old_description;
      j["new_description"] = edit.new_description;
      break;
    case EditOp::kAddSignal:
      j["new_name"] = edit.new_name;
      j["new_description"] = edit.new_description;
      j["kind"] = ToString(edit.kind);
      j["new_node_id"] = edit.new_node_id;
      break;
    case EditOp::kSetStatus:
      j["status"] = ToString(edit.status);
      break;
  }
  j["provenance"] = ToString(edit.provenance);
}

void from_json(const nlohmann::json& j, DefinitionEdit& edit) {
  edit = DefinitionEdit{};
  edit.op = ParseEditOp(j.at("op").get<std::string>());
  edit.target_id = j.at("target_id").get<std::string>();
  edit.old_description = j.value("old_description", std::string());
  edit.new_description = j.value("new_description", std::string());
  edit.new_name = j.value("new_name", std::string());
  edit.new_node_id = j.value("new_node_id", std::string());
  if (j.contains("kind")) edit.kind = ParseNodeKind(j.at("kind").get<std::string>());
  if (j.contains("status")) {
    edit.status = ParseNodeStatus(j.at("status").get<std::string>());
  }
  edit.provenance = ParseProvenance(j.value("provenance", std::string("REFINED")));
}

void to_json(nlohmann::json& j, const ConceptDefinition& def) {
  j = nlohmann::json{{"schema_version", kDefinitionSchemaVersion},
                     {"concept_name", def.concept_name},
                     {"free_description", def.free_description},
                     {"version", def.version},
                     {"parent_version", def.parent_version.has_value()
                                            ? nlohmann::json(*def.parent_version)
                                            : nlohmann::json(nullptr)},
                     {"root", def.root},
                     {"edit_log", def.edit_log}};
}

void from_json(const nlohmann::json& j, ConceptDefinition& def) {
  const int schema = j.value("schema_version", 0);
  if (schema != kDefinitionSchemaVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "definition schema_version " + std::to_string(schema) +
                    " is not supported");
  }
  def.concept_name = j.at("concept_name").get<std::string>();
  def.free_description = j.value("free_description", std::string());
  def.version = j.at("version").get<int>();
  const auto& parent = j.at("parent_version");
  def.parent_version =
      parent.is_null() ? std::nullopt : std::optional<int>(parent.get<int>());
  def.root = j.at("root").get<ConceptNode>();
  def.edit_log = j.value("edit_log", std::vector<DefinitionEdit>{});
}

}  // namespace deliberate
