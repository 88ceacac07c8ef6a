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

#ifndef DELIBERATE_CLASSIFIER_H_
#define DELIBERATE_CLASSIFIER_H_

#include <optional>
#include <string>
#include <vector>

#include "deliberate/concept.h"
#include "deliberate/error.h"
#include "deliberate/gateway.h"
#include "deliberate/image_index.h"
#include "json.hpp"

namespace deliberate {

struct Rating {
  int value = 1;
  std::string condition_evals;
  std::string summary;

  bool operator==(const Rating&) const = default;
};

struct ClassificationResult {
  std::string image_id;
  int definition_version = 0;
  Rating rating;
  bool label = false;
  std::string rationale;

  bool operator==(const ClassificationResult&) const = default;
};

struct ItemError {
  std::string image_id;
  ErrorCode code = ErrorCode::kInternal;
  std::string message;

  bool operator==(const ItemError&) const = default;
};

// Exactly one of result/error is set.
struct ClassificationOutcome {
  std::optional<ClassificationResult> result;
  std::optional<ItemError> error;

  bool ok() const { return result.has_value(); }
};

inline constexpr int kDefaultPositiveThreshold = 4;

struct ClassifierOptions {
  // Ratings at or above this are positive. The rubric's middle rating is
  // non-committal, so 3 is negative by default.
  int positive_threshold = kDefaultPositiveThreshold;
  // Worker threads for batch classification.
  size_t concurrency = 1;
};

bool LabelFor(int rating, int positive_threshold);

// Parses a <decision> value; anything but an integer in 1..5 is kParse.
int ParseRating(const std::string& text);

// The definition-induced classifier: prompts the model with the rendered
// definition, the caption and the image.
class Classifier {
 public:
  Classifier(const Gateway& gateway, ClassifierOptions options = {});

  ClassificationResult Classify(const ConceptDefinition& def, const ImageRecord& image) const;

  // Classifies against pre-rendered definition text (e.g. the bare concept
  // for the zero-shot baseline).
  ClassificationResult ClassifyRendered(const std::string& rendered, int version,
                                        const ImageRecord& image) const;

  // Order-preserving; a failure is recorded per item without aborting.
  std::vector<ClassificationOutcome> ClassifyBatch(
      const ConceptDefinition& def, const std::vector<const ImageRecord*>& images) const;
  std::vector<ClassificationOutcome> ClassifyRenderedBatch(
      const std::string& rendered, int version,
      const std::vector<const ImageRecord*>& images) const;

  const ClassifierOptions& options() const { return options_; }

 private:
  const Gateway& gateway_;
  ClassifierOptions options_;
};

void to_json(nlohmann::json& j, const Rating& r);
void from_json(const nlohmann::json& j, Rating& r);
void to_json(nlohmann::json& j, const ClassificationResult& r);
void from_json(const nlohmann::json& j, ClassificationResult& r);
void to_json(nlohmann::json& j, const ItemError& e);

}  // namespace deliberate

#endif  // DELIBERATE_CLASSIFIER_H_
