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

#ifndef DELIBERATE_SIMULATOR_H_
#define DELIBERATE_SIMULATOR_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deliberate/concept.h"
#include "deliberate/formula.h"
#include "deliberate/gateway.h"
#include "deliberate/image_index.h"

namespace deliberate {

struct UnitSpec {
  std::string name;
  std::string description;
};

enum class RefinerMode {
  // Mixes one helpful edit with decoys, keyed on the clarifications.
  kFeedback,
  // One of the samples adds the first target literal the definition lacks.
  kOracle,
};

struct SimulatorOptions {
  // Attribute names the simulated model can perceive, in priority order.
  std::vector<std::string> vocabulary;
  // Decompositions keyed by normalized concept name. Concepts not listed
  // decompose to their refined description alone.
  std::map<std::string, std::vector<UnitSpec>> decompositions;
  RefinerMode refiner = RefinerMode::kFeedback;
  // Oracle refiner only: a conjunction of literals.
  std::string target_formula;
};

void to_json(nlohmann::json& j, const SimulatorOptions& o);
void from_json(const nlohmann::json& j, SimulatorOptions& o);

// A stand-in vision-language model over an attribute world. It perceives an
// image through its manifest attributes (looked up by URI in the attached
// indexes) or, failing that, through attribute words in the caption, and it
// reads definitions by parsing the rendered prompt text back into a tree.
// Every answer is a pure function of the request.
class Simulator {
 public:
  Simulator(std::vector<std::shared_ptr<const ImageIndex>> indexes,
            SimulatorOptions options);

  std::string Respond(const PromptRequest& request) const;

  // Attribute truth values the simulator perceives for an image.
  std::map<std::string, bool> Perceive(const std::vector<std::string>& image_refs,
                                       const std::string& caption) const;

  // The attribute a definition node refers to, if any.
  std::optional<std::string> AttributeOf(const ConceptNode& node) const;

  const SimulatorOptions& options() const { return options_; }

 private:
  std::string Classify(const PromptRequest& request) const;
  std::string Decompose(const PromptRequest& request) const;
  std::string Propose(const PromptRequest& request, bool borderline) const;
  std::string Queries(const PromptRequest& request) const;
  std::string Ambiguity(const PromptRequest& request) const;
  std::string Articulate(const PromptRequest& request) const;
  std::string Refine(const PromptRequest& request) const;

  std::vector<std::shared_ptr<const ImageIndex>> indexes_;
  SimulatorOptions options_;
  std::optional<Formula> target_;
};

// Inverse of RenderDefinition for the text it produces. Node ids are
// assigned in reading order, which preserves sibling order.
ConceptDefinition ParseRenderedDefinition(const std::string& text);

}  // namespace deliberate

#endif  // DELIBERATE_SIMULATOR_H_
