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

#include "deliberate/prompts.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>

#include "deliberate/error.h"

namespace deliberate {
namespace prompt_data {
struct Entry {
  const char* name;
  const char* text;
};
extern const Entry kEntries[];
extern const size_t kEntryCount;
}  // namespace prompt_data

namespace {

// Decoding temperatures per template. Classification runs at 0 so candidate
// comparisons see stable labels.
double DefaultTemperature(TemplateId id) {
  switch (id) {
    case TemplateId::kClassify: return 0.0;
    case TemplateId::kDecompose: return 0.3;
    case TemplateId::kProposeCategory: return 0.7;
    case TemplateId::kProposeBorderline: return 0.7;
    case TemplateId::kGenerateQueries: return 0.7;
    case TemplateId::kAmbiguity: return 0.7;
    case TemplateId::kArticulate: return 0.3;
    case TemplateId::kRefine: return 0.8;
  }
  return 0.0;
}

TagSchema SchemaFor(TemplateId id) {
  TagSchema s;
  switch (id) {
    case TemplateId::kClassify:
      s.required = {"decision", "summary"};
      s.optional = {"requirements", "condition-eval", "evaluation"};
      break;
    case TemplateId::kDecompose:
      s.required = {"new-description"};
      s.optional = {"reasoning", "examination"};
      s.repeated = {{"condition", {"description", "name"}, {"description", "name"}, 0}};
      break;
    case TemplateId::kProposeCategory:
    case TemplateId::kProposeBorderline:
      s.repeated = {{"subconcept", {"description", "name"}, {"description", "name"}, 1}};
      break;
    case TemplateId::kGenerateQueries:
      s.optional = {"reasoning"};
      s.repeated = {{"description", {}, {}, 1}};
      break;
    case TemplateId::kAmbiguity:
      s.required = {"summary"};
      s.optional = {"classification"};
      break;
    case TemplateId::kArticulate:
      s.required = {"clarification"};
      s.optional = {"reasoning"};
      break;
    case TemplateId::kRefine:
      s.optional = {"keypoints", "reasoning"};
      s.repeated = {{"concept",
                     {"name", "old-name", "old-description", "new-description",
                      "parent-signal", "type", "new-name"},
                     {},
                     0}};
      break;
  }
  return s;
}

std::array<PromptTemplate, std::size(kAllTemplates)> BuildCatalog() {
  std::array<PromptTemplate, std::size(kAllTemplates)> catalog{};
  for (size_t i = 0; i < std::size(kAllTemplates); ++i) {
    const TemplateId id = kAllTemplates[i];
    const std::string_view name = TemplateName(id);
    const prompt_data::Entry* entry = nullptr;
    for (size_t e = 0; e < prompt_data::kEntryCount; ++e) {
      if (name == prompt_data::kEntries[e].name) entry = &prompt_data::kEntries[e];
    }
    if (entry == nullptr) {
      throw Error(ErrorCode::kInternal,
                  "prompt template '" + std::string(name) + "' is not compiled in");
    }
    catalog[i] = PromptTemplate{id,
                                name,
                                entry->text,
                                SchemaFor(id),
                                DefaultTemperature(id),
                                FindPlaceholders(entry->text)};
  }
  return catalog;
}

}  // namespace

std::string_view TemplateName(TemplateId id) {
  switch (id) {
    case TemplateId::kClassify: return "classify";
    case TemplateId::kDecompose: return "decompose";
    case TemplateId::kProposeCategory: return "propose_category";
    case TemplateId::kProposeBorderline: return "propose_borderline";
    case TemplateId::kGenerateQueries: return "generate_queries";
    case TemplateId::kAmbiguity: return "ambiguity";
    case TemplateId::kArticulate: return "articulate";
    case TemplateId::kRefine: return "refine";
  }
  return "classify";
}

TemplateId ParseTemplateId(std::string_view name) {
  for (TemplateId id : kAllTemplates) {
    if (TemplateName(id) == name) return id;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown template id '" + std::string(name) + "'");
}

std::vector<std::string> FindPlaceholders(std::string_view text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    size_t end = pos + 1;
    while (end < text.size() &&
           (std::islower(static_cast<unsigned char>(text[end])) || text[end] == '_')) {
      ++end;
    }
    if (end < text.size() && text[end] == '}' && end > pos + 1) {
      out.emplace_back(text.substr(pos + 1, end - pos - 1));
    }
    pos = end;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const PromptTemplate& GetTemplate(TemplateId id) {
  static const auto catalog = BuildCatalog();
  for (const PromptTemplate& t : catalog) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::kInternal, "template missing from catalog");
}

std::string RenderPrompt(TemplateId id,
                         const std::map<std::string, std::string>& variables) {
  const PromptTemplate& tmpl = GetTemplate(id);
  std::string missing;
  for (const std::string& name : tmpl.placeholders) {
    if (!variables.contains(name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "template '" + std::string(tmpl.name) +
                    "' has unbound placeholders: " + missing);
  }
  std::string out;
  out.reserve(tmpl.text.size() + 256);
  const std::string_view text = tmpl.text;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const size_t close = text.find('}', open);
    if (close != std::string_view::npos) {
      const auto it = variables.find(std::string(text.substr(open + 1, close - open - 1)));
      if (it != variables.end()) {
        out.append(it->second);
        pos = close + 1;
        continue;
      }
    }
    out.push_back('{');
    pos = open + 1;
  }
  return out;
}

}  // namespace deliberate
