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

#ifndef DELIBERATE_PROMPTS_H_
#define DELIBERATE_PROMPTS_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "deliberate/xml_fields.h"

namespace deliberate {

// The prompt catalog. Template text lives in prompts/*.txt and is compiled
// in; this is the only place prompt text enters the engine.
enum class TemplateId {
  kClassify,
  kDecompose,
  kProposeCategory,
  kProposeBorderline,
  kGenerateQueries,
  kAmbiguity,
  kArticulate,
  kRefine,
};

inline constexpr TemplateId kAllTemplates[] = {
    TemplateId::kClassify,          TemplateId::kDecompose,
    TemplateId::kProposeCategory,   TemplateId::kProposeBorderline,
    TemplateId::kGenerateQueries,   TemplateId::kAmbiguity,
    TemplateId::kArticulate,        TemplateId::kRefine,
};

std::string_view TemplateName(TemplateId id);
TemplateId ParseTemplateId(std::string_view name);

struct PromptTemplate {
  TemplateId id;
  std::string_view name;
  std::string_view text;
  TagSchema schema;
  double default_temperature;
  // Named {placeholders} in the text, sorted and unique.
  std::vector<std::string> placeholders;
};

const PromptTemplate& GetTemplate(TemplateId id);

// Substitutes every {placeholder}; unbound placeholders are an
// kInvalidArgument error listing them.
std::string RenderPrompt(TemplateId id,
                         const std::map<std::string, std::string>& variables);

std::vector<std::string> FindPlaceholders(std::string_view text);

}  // namespace deliberate

#endif  // DELIBERATE_PROMPTS_H_
