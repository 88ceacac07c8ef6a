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

#include "deliberate/classifier.h"

#include <cctype>

#include "deliberate/parallel.h"

namespace deliberate {

bool LabelFor(int rating, int positive_threshold) { return rating >= positive_threshold; }

int ParseRating(const std::string& text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  if (end - begin != 1 || text[begin] < '1' || text[begin] > '5') {
    throw Error(ErrorCode::kParse, "decision '" + text + "' is not an integer rating 1-5");
  }
  return text[begin] - '0';
}

Classifier::Classifier(const Gateway& gateway, ClassifierOptions options)
    : gateway_(gateway), options_(options) {
  if (options_.positive_threshold < 1 || options_.positive_threshold > 5) {
    throw Error(ErrorCode::kConfig, "positive_threshold must lie in 1..5");
  }
}

ClassificationResult Classifier::Classify(const ConceptDefinition& def,
                                          const ImageRecord& image) const {
  return ClassifyRendered(RenderDefinition(def), def.version, image);
}

ClassificationResult Classifier::ClassifyRendered(const std::string& rendered, int version,
                                                  const ImageRecord& image) const {
  PromptRequest request =
      MakeRequest(TemplateId::kClassify, {{"definition", rendered}, {"caption", image.caption}},
                  {image.uri});
  try {
    const ModelResponse response = gateway_.Complete(request);
    ClassificationResult result;
    result.image_id = image.id;
    result.definition_version = version;
    try {
      result.rating.value = ParseRating(response.parsed.values.at("decision"));
    } catch (Error& e) {
      throw e.set_raw_text(response.raw_text);
    }
    const auto evals = response.parsed.values.find("condition-eval");
    if (evals != response.parsed.values.end()) result.rating.condition_evals = evals->second;
    result.rating.summary = response.parsed.values.at("summary");
    result.rationale = result.rating.summary;
    result.label = LabelFor(result.rating.value, options_.positive_threshold);
    return result;
  } catch (const Error& e) {
    Error wrapped(e.code(), "image '" + image.id + "': " + e.what());
    wrapped.set_raw_text(e.raw_text());
    throw wrapped;
  }
}

std::vector<ClassificationOutcome> Classifier::ClassifyBatch(
    const ConceptDefinition& def, const std::vector<const ImageRecord*>& images) const {
  return ClassifyRenderedBatch(RenderDefinition(def), def.version, images);
}

std::vector<ClassificationOutcome> Classifier::ClassifyRenderedBatch(
    const std::string& rendered, int version,
    const std::vector<const ImageRecord*>& images) const {
  std::vector<ClassificationOutcome> out(images.size());
  ParallelFor(images.size(), options_.concurrency, [&](size_t i) {
    try {
      out[i].result = ClassifyRendered(rendered, version, *images[i]);
    } catch (const Error& e) {
      out[i].error = ItemError{images[i]->id, e.code(), e.what()};
    } catch (const std::exception& e) {
      out[i].error = ItemError{images[i]->id, ErrorCode::kInternal, e.what()};
    }
  });
  return out;
}

void to_json(nlohmann::json& j, const Rating& r) {
  j = nlohmann::json{
      {"value", r.value}, {"condition_evals", r.condition_evals}, {"summary", r.summary}};
}

void from_json(const nlohmann::json& j, Rating& r) {
  r.value = j.at("value").get<int>();
  r.condition_evals = j.value("condition_evals", std::string());
  r.summary = j.value("summary", std::string());
}

void to_json(nlohmann::json& j, const ClassificationResult& r) {
  j = nlohmann::json{{"image_id", r.image_id},
                     {"definition_version", r.definition_version},
                     {"rating", r.rating},
                     {"label", r.label},
                     {"rationale", r.rationale}};
}

void from_json(const nlohmann::json& j, ClassificationResult& r) {
  r.image_id = j.at("image_id").get<std::string>();
  r.definition_version = j.at("definition_version").get<int>();
  r.rating = j.at("rating").get<Rating>();
  r.label = j.at("label").get<bool>();
  r.rationale = j.value("rationale", std::string());
}

void to_json(nlohmann::json& j, const ItemError& e) {
  j = nlohmann::json{
      {"image_id", e.image_id}, {"code", ErrorCodeName(e.code)}, {"message", e.message}};
}

}  // namespace deliberate
