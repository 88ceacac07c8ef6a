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

#include "deliberate/sim_user.h"

#include <algorithm>

#include "deliberate/error.h"
#include "deliberate/text_embedding.h"

namespace deliberate {
namespace {

Formula ParseTarget(const std::string& text) {
  try {
    return Formula::Parse(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("sim user target_formula: ") + e.what());
  }
}

bool Mentions(const std::string& text, const std::string& word) {
  const std::string haystack = " " + NormalizeText(text) + " ";
  return haystack.find(" " + NormalizeText(word) + " ") != std::string::npos;
}

}  // namespace

std::string DefaultFeedback(const std::string& predicate) {
  return "The deciding factor is whether the image shows " + predicate + ".";
}

SimUser::SimUser(SimUserSpec spec) : spec_(std::move(spec)), formula_(ParseTarget(spec_.target_formula)) {
  if (!(spec_.noise_rate >= 0.0 && spec_.noise_rate < 0.5)) {
    throw Error(ErrorCode::kConfig, "sim user noise_rate must lie in [0, 0.5)");
  }
}

SimLabel SimUser::Label(const ImageRecord& image, const ClassificationResult* rater,
                        Rng& rng) const {
  for (const std::string& p : formula_.predicates()) {
    if (!image.attributes.is_object() || !image.attributes.contains(p)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image '" + image.id + "' lacks attribute '" + p + "'");
    }
  }
  const bool truth = formula_.Evaluate(image.attributes);
  // Always draw so the stream does not depend on the noise setting.
  const bool flip = rng.UniformReal() < spec_.noise_rate;
  SimLabel out;
  out.label = flip ? !truth : truth;
  if (rater == nullptr || rater->label == out.label) return out;

  std::vector<std::string> deciding;
  for (const std::string& p : formula_.predicates()) {
    nlohmann::json flipped = image.attributes;
    flipped[p] = AttributeTruth(image.attributes, p) ? 0 : 1;
    if (formula_.Evaluate(flipped) != truth) deciding.push_back(p);
  }
  if (deciding.empty()) return out;
  const std::string rationale = rater->rationale + " " + rater->rating.summary;
  auto pick = std::find_if(deciding.begin(), deciding.end(),
                           [&](const std::string& p) { return Mentions(rationale, p); });
  if (pick == deciding.end()) {
    pick = std::find_if(deciding.begin(), deciding.end(),
                        [&](const std::string& p) { return AttributeTruth(image.attributes, p); });
  }
  if (pick == deciding.end()) pick = deciding.begin();
  const auto it = spec_.feedback_templates.find(*pick);
  out.feedback = it != spec_.feedback_templates.end() ? it->second : DefaultFeedback(*pick);
  return out;
}

void SimUser::CheckManifest(const ImageIndex& index) const {
  for (const ImageRecord& r : index.records()) {
    for (const std::string& p : formula_.predicates()) {
      if (!r.attributes.is_object() || !r.attributes.contains(p)) {
        throw Error(ErrorCode::kConfig, "sim user formula reads attribute '" + p +
                                            "' missing from image '" + r.id + "'");
      }
    }
  }
}

void to_json(nlohmann::json& j, const SimUserSpec& s) {
  j = {{"target_formula", s.target_formula},
       {"feedback_templates", s.feedback_templates},
       {"noise_rate", s.noise_rate}};
}

void from_json(const nlohmann::json& j, SimUserSpec& s) {
  j.at("target_formula").get_to(s.target_formula);
  s.feedback_templates =
      j.value("feedback_templates", std::map<std::string, std::string>{});
  s.noise_rate = j.value("noise_rate", 0.0);
}

}  // namespace deliberate
