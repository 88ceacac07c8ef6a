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

#ifndef DELIBERATE_SIM_USER_H_
#define DELIBERATE_SIM_USER_H_

#include <map>
#include <optional>
#include <string>

#include "deliberate/classifier.h"
#include "deliberate/formula.h"
#include "deliberate/image_index.h"
#include "deliberate/rng.h"
#include "json.hpp"

namespace deliberate {

// Scripted stand-in for the concept owner. Labels come from a hidden formula
// over image attributes.
struct SimUserSpec {
  std::string target_formula;
  // Predicate -> feedback sentence. Predicates without an entry use a
  // generic sentence naming the predicate.
  std::map<std::string, std::string> feedback_templates;
  double noise_rate = 0.0;
};

struct SimLabel {
  bool label = false;
  std::optional<std::string> feedback;
};

class SimUser {
 public:
  // kConfig for an unparsable formula or noise_rate outside [0, 0.5).
  explicit SimUser(SimUserSpec spec);

  // kInvalidArgument if the image lacks an attribute the formula reads.
  // Feedback is only given when the label disagrees with `rater`; it names
  // the earliest formula predicate that decides the label, preferring one
  // the rater's rationale mentions.
  SimLabel Label(const ImageRecord& image, const ClassificationResult* rater, Rng& rng) const;

  // Checks that every predicate is an attribute of every record.
  void CheckManifest(const ImageIndex& index) const;

  const SimUserSpec& spec() const { return spec_; }
  const Formula& formula() const { return formula_; }

 private:
  SimUserSpec spec_;
  Formula formula_;
};

std::string DefaultFeedback(const std::string& predicate);

void to_json(nlohmann::json& j, const SimUserSpec& s);
void from_json(const nlohmann::json& j, SimUserSpec& s);

}  // namespace deliberate

#endif  // DELIBERATE_SIM_USER_H_
