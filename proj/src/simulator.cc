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

#include "deliberate/simulator.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "deliberate/error.h"
#include "deliberate/rng.h"
#include "deliberate/text_embedding.h"
#include "deliberate/xml_fields.h"

namespace deliberate {
namespace {

constexpr std::string_view kIncludesHeader =
    "This includes any of the following visual elements:";
constexpr std::string_view kExcludesHeader =
    "However, the following visual elements are excluded:";
constexpr std::string_view kHarmlessSuffix = " (judged from the whole image)";

std::vector<std::string> Words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in(NormalizeText(text));
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool HasWord(const std::vector<std::string>& words, const std::string& w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

const std::string& Var(const PromptRequest& request, const std::string& name) {
  static const std::string kEmpty;
  const auto it = request.variables.find(name);
  return it == request.variables.end() ? kEmpty : it->second;
}

std::vector<const ConceptNode*> Accepted(const ConceptNode& node) {
  std::vector<const ConceptNode*> out;
  for (const ConceptNode& c : node.children) {
    if (c.status == NodeStatus::kAccepted) out.push_back(&c);
  }
  std::sort(out.begin(), out.end(),
            [](const ConceptNode* a, const ConceptNode* b) { return a->id < b->id; });
  return out;
}

void CollectAccepted(const ConceptNode& node, std::vector<const ConceptNode*>& out) {
  for (const ConceptNode* c : Accepted(node)) {
    out.push_back(c);
    CollectAccepted(*c, out);
  }
}

// First accepted necessary node that takes signals: the natural parent for a
// new signal.
const ConceptNode* SignalParent(const ConceptNode& root) {
  for (const ConceptNode* unit : Accepted(root)) {
    if (unit->kind != NodeKind::kNecessary) continue;
    const auto kids = Accepted(*unit);
    const bool holds_necessary = std::any_of(kids.begin(), kids.end(), [](const ConceptNode* c) {
      return c->kind == NodeKind::kNecessary;
    });
    if (!holds_necessary) return unit;
    if (const ConceptNode* inner = SignalParent(*unit)) return inner;
  }
  return nullptr;
}

std::string ScopeWord(bool in_scope) { return in_scope ? "in-scope" : "out-of-scope"; }

std::string Join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::string AddSignalBlock(const std::string& parent, NodeKind kind, const std::string& attr) {
  return "<concept>\n  <parent-signal>" + EscapeXmlText(parent) + "</parent-signal>\n  <type>" +
         (kind == NodeKind::kNegative ? "negative" : "positive") + "</type>\n  <new-name>" +
         EscapeXmlText(attr) + "</new-name>\n  <new-description>Images that show something " +
         EscapeXmlText(attr) + "</new-description>\n</concept>\n";
}

std::string EditBlock(const ConceptNode& node) {
  std::string next = node.description;
  if (next.size() >= kHarmlessSuffix.size() &&
      next.compare(next.size() - kHarmlessSuffix.size(), kHarmlessSuffix.size(),
                   kHarmlessSuffix) == 0) {
    next.resize(next.size() - kHarmlessSuffix.size());
  } else {
    next += kHarmlessSuffix;
  }
  return "<concept>\n  <name>" + EscapeXmlText(node.name) + "</name>\n  <old-description>" +
         EscapeXmlText(node.description) + "</old-description>\n  <new-description>" +
         EscapeXmlText(next) + "</new-description>\n</concept>\n";
}

std::string RefineResponse(const std::string& keypoints, const std::string& blocks) {
  return "<keypoints>" + EscapeXmlText(keypoints) + "</keypoints>\n<improve-description>\n" +
         blocks + "</improve-description>\n";
}

}  // namespace

void to_json(nlohmann::json& j, const SimulatorOptions& o) {
  nlohmann::json decomp = nlohmann::json::object();
  for (const auto& [name, units] : o.decompositions) {
    nlohmann::json arr = nlohmann::json::array();
    for (const UnitSpec& u : units) arr.push_back({{"name", u.name}, {"description", u.description}});
    decomp[name] = arr;
  }
  j = nlohmann::json{{"vocabulary", o.vocabulary},
                     {"decompositions", decomp},
                     {"refiner", o.refiner == RefinerMode::kOracle ? "oracle" : "feedback"},
                     {"target_formula", o.target_formula}};
}

void from_json(const nlohmann::json& j, SimulatorOptions& o) {
  o.vocabulary = j.value("vocabulary", std::vector<std::string>{});
  o.decompositions.clear();
  if (j.contains("decompositions")) {
    for (const auto& [name, arr] : j.at("decompositions").items()) {
      std::vector<UnitSpec> units;
      for (const auto& u : arr) {
        units.push_back({u.at("name").get<std::string>(), u.value("description", std::string())});
      }
      o.decompositions[NormalizeText(name)] = std::move(units);
    }
  }
  const std::string refiner = j.value("refiner", std::string("feedback"));
  if (refiner == "oracle") {
    o.refiner = RefinerMode::kOracle;
  } else if (refiner == "feedback") {
    o.refiner = RefinerMode::kFeedback;
  } else {
    throw Error(ErrorCode::kConfig, "simulator refiner must be 'feedback' or 'oracle'");
  }
  o.target_formula = j.value("target_formula", std::string());
}

ConceptDefinition ParseRenderedDefinition(const std::string& text) {
  struct Temp {
    int parent;
    NodeKind kind;
    std::string name;
    std::string description;
    size_t child_indent;
    NodeKind polarity = NodeKind::kPositive;
    std::vector<int> kids;
  };
  std::vector<Temp> nodes;
  nodes.push_back({-1, NodeKind::kNecessary, "", "", 0, NodeKind::kPositive, {}});
  std::vector<int> stack = {0};
  std::string concept_name;
  std::string description;

  const auto split = [](std::string_view item, std::string& name, std::string& desc) {
    const size_t colon = item.find(": ");
    if (colon == std::string_view::npos) {
      name = std::string(item);
      desc.clear();
    } else {
      name = std::string(item.substr(0, colon));
      desc = std::string(item.substr(colon + 2));
    }
  };

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const size_t indent = raw.find_first_not_of(' ');
    if (indent == std::string::npos) continue;
    std::string_view line = std::string_view(raw).substr(indent);
    if (nodes.size() == 1 && line.starts_with("Concept: ")) {
      concept_name = std::string(line.substr(9));
      continue;
    }
    if (nodes.size() == 1 && line.starts_with("Description: ")) {
      description = std::string(line.substr(13));
      continue;
    }
    const bool is_condition = line.starts_with("Condition ");
    const bool is_item = line.starts_with("- ");
    const bool is_header = line == kIncludesHeader || line == kExcludesHeader;
    if (!is_condition && !is_item && !is_header) continue;
    while (stack.size() > 1 && nodes[stack.back()].child_indent > indent) stack.pop_back();
    const int owner = stack.back();
    if (is_header) {
      nodes[owner].polarity = line == kIncludesHeader ? NodeKind::kPositive : NodeKind::kNegative;
      continue;
    }
    Temp t{owner, NodeKind::kNecessary, "", "", 0, NodeKind::kPositive, {}};
    if (is_condition) {
      const size_t dot = line.find(". ");
      split(dot == std::string_view::npos ? line.substr(10) : line.substr(dot + 2), t.name,
            t.description);
      t.child_indent = indent + 2;
    } else {
      split(line.substr(2), t.name, t.description);
      t.kind = nodes[owner].polarity;
      t.child_indent = indent + 4;
    }
    nodes.push_back(std::move(t));
    const int index = static_cast<int>(nodes.size()) - 1;
    nodes[owner].kids.push_back(index);
    stack.push_back(index);
  }

  ConceptDefinition def = MakeDefinition(concept_name, description);
  const auto build = [&](const auto& self, int index, ConceptNode& out) -> void {
    for (int kid : nodes[index].kids) {
      ConceptNode child;
      char id[16];
      std::snprintf(id, sizeof(id), "n%04d", kid);
      child.id = id;
      child.name = nodes[kid].name;
      child.description = nodes[kid].description;
      child.kind = nodes[kid].kind;
      self(self, kid, child);
      out.children.push_back(std::move(child));
    }
  };
  build(build, 0, def.root);
  return def;
}

Simulator::Simulator(std::vector<std::shared_ptr<const ImageIndex>> indexes,
                     SimulatorOptions options)
    : indexes_(std::move(indexes)), options_(std::move(options)) {
  if (options_.refiner == RefinerMode::kOracle) {
    target_ = Formula::Parse(options_.target_formula);
    if (target_->ConjunctiveLiterals().empty()) {
      throw Error(ErrorCode::kConfig, "oracle refiner needs a conjunction of literals");
    }
  }
}

std::map<std::string, bool> Simulator::Perceive(const std::vector<std::string>& image_refs,
                                                const std::string& caption) const {
  std::map<std::string, bool> out;
  for (const std::string& ref : image_refs) {
    for (const auto& index : indexes_) {
      const ImageRecord* record = index->FindByUri(ref);
      if (record == nullptr) continue;
      for (const std::string& attr : options_.vocabulary) {
        out[attr] = record->attributes.contains(attr) && AttributeTruth(record->attributes, attr);
      }
      return out;
    }
  }
  const auto words = Words(caption);
  for (const std::string& attr : options_.vocabulary) out[attr] = HasWord(words, attr);
  return out;
}

std::optional<std::string> Simulator::AttributeOf(const ConceptNode& node) const {
  const std::string name = NormalizeText(node.name);
  for (const std::string& attr : options_.vocabulary) {
    if (name == attr) return attr;
  }
  const auto name_words = Words(node.name);
  for (const std::string& attr : options_.vocabulary) {
    if (HasWord(name_words, attr)) return attr;
  }
  if (IsSignal(node.kind)) {
    const auto desc_words = Words(node.description);
    for (const std::string& attr : options_.vocabulary) {
      if (HasWord(desc_words, attr)) return attr;
    }
  }
  return std::nullopt;
}

std::string Simulator::Respond(const PromptRequest& request) const {
  switch (request.template_id) {
    case TemplateId::kClassify: return Classify(request);
    case TemplateId::kDecompose: return Decompose(request);
    case TemplateId::kProposeCategory: return Propose(request, false);
    case TemplateId::kProposeBorderline: return Propose(request, true);
    case TemplateId::kGenerateQueries: return Queries(request);
    case TemplateId::kAmbiguity: return Ambiguity(request);
    case TemplateId::kArticulate: return Articulate(request);
    case TemplateId::kRefine: return Refine(request);
  }
  throw Error(ErrorCode::kBackendRefusal, "simulator has no responder for this template");
}

namespace {

struct Verdict {
  bool in_scope = false;
  std::vector<std::string> reasons;
  std::vector<std::string> evals;
};

// Mirrors EvaluateSemantics while recording why each group failed.
bool Explain(const ConceptNode& node, const std::map<std::string, bool>& judgments,
             Verdict& v) {
  const auto kids = Accepted(node);
  if (kids.empty()) return judgments.at(node.id);
  if (std::none_of(kids.begin(), kids.end(), [](const ConceptNode* c) { return IsSignal(c->kind); })) {
    bool all = true;
    for (const ConceptNode* c : kids) {
      const bool ok = Explain(*c, judgments, v);
      v.evals.push_back(c->name + ": " + (ok ? "satisfied" : "not satisfied"));
      if (!ok && Accepted(*c).empty()) v.reasons.push_back("it fails " + c->name);
      all = all && ok;
    }
    return all;
  }
  std::vector<std::string> positives;
  bool any_positive = false;
  bool any_negative = false;
  for (const ConceptNode* c : kids) {
    const bool value = Explain(*c, judgments, v);
    v.evals.push_back(c->name + ": " + (value ? "present" : "absent"));
    if (c->kind == NodeKind::kPositive) {
      positives.push_back(c->name);
      any_positive = any_positive || value;
    } else if (value) {
      any_negative = true;
      v.reasons.push_back("it shows " + c->name);
    }
  }
  const bool included = positives.empty() ? judgments.at(node.id) : any_positive;
  if (!positives.empty() && !any_positive) {
    v.reasons.push_back("it shows none of " + Join(positives, ", "));
  } else if (!included) {
    v.reasons.push_back("it fails " + node.name);
  }
  return included && !any_negative;
}

}  // namespace

std::string Simulator::Classify(const PromptRequest& request) const {
  const ConceptDefinition def = ParseRenderedDefinition(Var(request, "definition"));
  const auto seen = Perceive(request.image_refs, Var(request, "caption"));
  Verdict v;
  if (Accepted(def.root).empty()) {
    // Bare concept text: every attribute word is required, or forbidden when
    // negated.
    const auto words = Words(def.concept_name + " " + def.free_description);
    v.in_scope = true;
    for (size_t i = 0; i < words.size(); ++i) {
      if (std::find(options_.vocabulary.begin(), options_.vocabulary.end(), words[i]) ==
          options_.vocabulary.end()) {
        continue;
      }
      const bool negated =
          i > 0 && (words[i - 1] == "not" || words[i - 1] == "no" ||
                    words[i - 1] == "without" || words[i - 1] == "non");
      const bool present = seen.at(words[i]);
      if (present == negated) {
        v.in_scope = false;
        v.reasons.push_back(negated ? "it shows " + words[i] : "it lacks " + words[i]);
      }
    }
  } else {
    std::map<std::string, bool> judgments;
    for (const std::string& id : RequiredJudgments(def.root)) {
      const ConceptNode* node = FindNode(def.root, id);
      const auto attr = AttributeOf(*node);
      judgments[id] = attr ? seen.at(*attr) : node->kind == NodeKind::kNecessary;
    }
    v.in_scope = Explain(def.root, judgments, v);
  }
  const std::string summary =
      v.in_scope ? "The image satisfies every condition of the definition."
                 : "The image is out of scope because " + Join(v.reasons, "; ") + ".";
  return "<requirements>Check each condition of the definition.</requirements>\n"
         "<condition-eval>" +
         EscapeXmlText(Join(v.evals, "; ")) + "</condition-eval>\n<decision>" +
         (v.in_scope ? "5" : "1") + "</decision>\n<summary>" + EscapeXmlText(summary) +
         "</summary>\n";
}

std::string Simulator::Decompose(const PromptRequest& request) const {
  const std::string& name = Var(request, "concept_name");
  std::string description = Var(request, "concept_description");
  if (description.empty()) description = name;
  std::string out = "<new-description>" + EscapeXmlText(description) +
                    "</new-description>\n<reasoning>Split into necessary conditions.</reasoning>\n"
                    "<conditions>\n";
  const auto it = options_.decompositions.find(NormalizeText(name));
  if (it != options_.decompositions.end()) {
    for (const UnitSpec& u : it->second) {
      out += "  <condition>\n    <description>" + EscapeXmlText(u.description) +
             "</description>\n    <name>" + EscapeXmlText(u.name) + "</name>\n  </condition>\n";
    }
  }
  return out + "</conditions>\n";
}

std::string Simulator::Propose(const PromptRequest& request, bool borderline) const {
  const ConceptDefinition def = ParseRenderedDefinition(Var(request, "definition"));
  std::set<std::string> used;
  std::vector<const ConceptNode*> all;
  CollectAccepted(def.root, all);
  for (const ConceptNode* n : all) used.insert(NormalizeText(n->name));
  std::istringstream prior(Var(request, "previous_signals"));
  std::string line;
  while (std::getline(prior, line)) {
    const size_t colon = line.find(':');
    std::string name = line.substr(0, colon);
    if (name.starts_with("- ")) name = name.substr(2);
    used.insert(NormalizeText(name));
  }
  std::vector<std::string> order = options_.vocabulary;
  if (borderline) std::reverse(order.begin(), order.end());
  if (order.empty()) throw Error(ErrorCode::kBackendRefusal, "simulator vocabulary is empty");
  std::string pick = order.front();
  for (const std::string& attr : order) {
    if (!used.contains(attr)) {
      pick = attr;
      break;
    }
  }
  return "<primary-concept>" + EscapeXmlText(def.concept_name) +
         "</primary-concept>\n<subconcept>\n  <description>Images show " + pick +
         " things, such as " + pick + " items</description>\n  <name>" + pick +
         "</name>\n</subconcept>\n";
}

std::string Simulator::Queries(const PromptRequest& request) const {
  const ConceptDefinition def = ParseRenderedDefinition(Var(request, "definition"));
  std::vector<std::string> anchors;
  std::vector<const ConceptNode*> all;
  CollectAccepted(def.root, all);
  for (const ConceptNode* n : all) {
    if (n->kind == NodeKind::kPositive) anchors.push_back(n->name);
  }
  if (anchors.empty()) {
    for (const ConceptNode* n : all) anchors.push_back(n->name);
  }
  if (anchors.empty()) anchors.push_back(def.concept_name);

  std::set<std::string> prior;
  std::istringstream in(Var(request, "previous_descriptions"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with("- ")) line = line.substr(2);
    prior.insert(NormalizeText(line));
  }
  std::vector<std::string> fresh;
  const auto offer = [&](const std::string& q) {
    if (!prior.contains(NormalizeText(q)) &&
        std::find(fresh.begin(), fresh.end(), q) == fresh.end()) {
      fresh.push_back(q);
    }
  };
  const auto& vocab = options_.vocabulary;
  for (const std::string& anchor : anchors) {
    for (const std::string& a : vocab) {
      if (NormalizeText(anchor) != a) offer(anchor + " with " + a);
    }
  }
  for (const std::string& anchor : anchors) {
    for (size_t i = 0; i < vocab.size(); ++i) {
      for (size_t k = i + 1; k < vocab.size(); ++k) {
        offer(anchor + " with " + vocab[i] + " and " + vocab[k]);
      }
    }
  }
  size_t n = 1;
  try {
    n = std::stoul(Var(request, "num_descriptions"));
  } catch (const std::exception&) {
  }
  std::string out = "<reasoning>Combine included elements with other visual elements.</reasoning>\n"
                    "<descriptions>\n";
  if (!fresh.empty()) {
    const size_t start =
        Fnv1a64(Var(request, "image_type") + "|" + Var(request, "previous_descriptions")) %
        fresh.size();
    for (size_t i = 0; i < std::min(n, fresh.size()); ++i) {
      out += "  <description>" + EscapeXmlText(fresh[(start + i) % fresh.size()]) +
             "</description>\n";
    }
  }
  return out + "</descriptions>\n";
}

std::string Simulator::Ambiguity(const PromptRequest& request) const {
  const std::string& text = Var(request, "definition");
  PromptRequest classify = request;
  classify.template_id = TemplateId::kClassify;
  const ParsedFields verdict =
      ParseXmlFields(Classify(classify), GetTemplate(TemplateId::kClassify).schema);
  const bool in_scope = verdict.values.at("decision") == "5";
  const ConceptDefinition def = ParseRenderedDefinition(text);
  std::set<std::string> addressed;
  std::vector<const ConceptNode*> all;
  CollectAccepted(def.root, all);
  for (const ConceptNode* n : all) {
    if (auto attr = AttributeOf(*n)) addressed.insert(*attr);
  }
  if (all.empty()) {
    const auto words = Words(def.concept_name + " " + def.free_description);
    for (const std::string& w : words) addressed.insert(w);
  }
  const auto seen = Perceive(request.image_refs, Var(request, "caption"));
  std::vector<std::string> open;
  for (const std::string& attr : options_.vocabulary) {
    if (seen.at(attr) && !addressed.contains(attr)) open.push_back(attr);
  }
  std::string summary;
  if (in_scope && !open.empty()) {
    const std::string list = Join(open, " and ");
    summary = "The image shows " + list + " elements, but it is unclear whether " + list +
              " is acceptable.";
  }
  return "<classification>" + ScopeWord(in_scope) + "</classification>\n<summary>" +
         EscapeXmlText(summary) + "</summary>\n";
}

std::string Simulator::Articulate(const PromptRequest& request) const {
  const bool owner_in = Var(request, "ground_truth").find("out-of-scope") == std::string::npos;
  const bool rater_in = Var(request, "rater_decision").find("out-of-scope") == std::string::npos;
  const std::string& feedback = Var(request, "user_feedback");
  std::string clarification;
  if (!feedback.empty()) {
    clarification = "The owner rates this image " + ScopeWord(owner_in) + " and explains: " + feedback;
  } else if (owner_in != rater_in) {
    clarification = "The owner rates this image " + ScopeWord(owner_in) +
                    ", while the raters said: " + Var(request, "rater_summary");
  } else {
    clarification = "The owner agrees that this image is " + ScopeWord(owner_in) +
                    "; this only confirms the current definition for " + Var(request, "caption") +
                    ".";
  }
  return "<reasoning>Compare the owner's rating with the raters.</reasoning>\n<clarification>" +
         EscapeXmlText(clarification) + "</clarification>\n";
}

std::string Simulator::Refine(const PromptRequest& request) const {
  const std::string& text = Var(request, "definition");
  const std::string& clarifications = Var(request, "clarifications");
  const ConceptDefinition def = ParseRenderedDefinition(text);
  const ConceptNode* parent = SignalParent(def.root);
  const uint64_t sample = request.decoding.sample_index;
  const std::string garbage =
      "<keypoints>Unclear.</keypoints>\n<improve-description>\n<concept>\n  <name>?</name>\n"
      "</concept>\n</improve-description>\n";
  if (parent == nullptr || options_.vocabulary.empty()) return garbage;
  const uint64_t h = Fnv1a64(clarifications);
  const auto& vocab = options_.vocabulary;

  const auto decoy = [&](uint64_t style, const std::string& attr, NodeKind kind) {
    switch (style) {
      case 1:
        return RefineResponse(
            "Flip the treatment of " + attr + ".",
            AddSignalBlock(parent->name,
                           kind == NodeKind::kNegative ? NodeKind::kPositive : NodeKind::kNegative,
                           attr));
      case 2:
        return RefineResponse("Tighten the wording.", EditBlock(*parent));
      case 3: {
        const std::string& other = vocab[(h + sample) % vocab.size()];
        return RefineResponse("Exclude " + other + ".",
                              AddSignalBlock(parent->name, NodeKind::kNegative, other));
      }
      default:
        return garbage;
    }
  };

  if (options_.refiner == RefinerMode::kOracle) {
    std::optional<Formula::Literal> missing;
    std::vector<const ConceptNode*> all;
    CollectAccepted(def.root, all);
    for (const Formula::Literal& lit : target_->ConjunctiveLiterals()) {
      const bool covered = std::any_of(all.begin(), all.end(), [&](const ConceptNode* n) {
        const auto attr = AttributeOf(*n);
        if (!attr || *attr != lit.predicate) return false;
        return lit.negated ? n->kind == NodeKind::kNegative : n->kind != NodeKind::kNegative;
      });
      if (!covered) {
        missing = lit;
        break;
      }
    }
    const NodeKind kind =
        missing && missing->negated ? NodeKind::kNegative : NodeKind::kPositive;
    const std::string attr = missing ? missing->predicate : vocab.front();
    if (missing && sample % 5 == Fnv1a64(text) % 5) {
      return RefineResponse("Add the missing clause on " + attr + ".",
                            AddSignalBlock(parent->name, kind, attr));
    }
    return decoy((sample + h) % 4 + 1, attr, kind);
  }

  // Feedback refiner: find the attribute the owner's explanations mention most.
  std::map<std::string, int> out_mentions;
  std::map<std::string, int> in_mentions;
  std::istringstream in(clarifications);
  std::string line;
  bool any_explained = clarifications.find("and explains:") != std::string::npos;
  while (std::getline(in, line)) {
    const bool explained = line.find("and explains:") != std::string::npos;
    const bool disagreed = line.find("while the raters said:") != std::string::npos;
    if (!(explained || (!any_explained && disagreed))) continue;
    const size_t cut = line.find(':', line.find(explained ? "explains" : "said"));
    const auto words = Words(line.substr(cut == std::string::npos ? 0 : cut));
    const bool out_of_scope = line.find("rates this image out-of-scope") != std::string::npos;
    for (const std::string& attr : vocab) {
      if (HasWord(words, attr)) ++(out_of_scope ? out_mentions : in_mentions)[attr];
    }
  }
  std::string top;
  int best = 0;
  for (const std::string& attr : vocab) {
    const int count = out_mentions[attr] + in_mentions[attr];
    if (count > best) {
      best = count;
      top = attr;
    }
  }
  const uint64_t style = (sample + h) % 5;
  if (top.empty()) return style == 4 ? garbage : RefineResponse("No clear pattern.", EditBlock(*parent));
  const NodeKind kind =
      out_mentions[top] >= in_mentions[top] ? NodeKind::kNegative : NodeKind::kPositive;
  if (style == 0) {
    return RefineResponse("The owner's remarks center on " + top + ".",
                          AddSignalBlock(parent->name, kind, top));
  }
  return decoy(style, top, kind);
}

}  // namespace deliberate
