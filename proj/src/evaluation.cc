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

#include "deliberate/evaluation.h"

#include <cstdio>

#include "deliberate/error.h"

namespace deliberate {

ConfusionCounts Confusion(const std::map<std::string, bool>& predictions,
                          const std::map<std::string, bool>& labels) {
  std::vector<std::string> mismatched;
  for (const auto& [id, _] : predictions) {
    if (!labels.contains(id)) mismatched.push_back(id);
  }
  for (const auto& [id, _] : labels) {
    if (!predictions.contains(id)) mismatched.push_back(id);
  }
  if (!mismatched.empty()) {
    std::string message = "prediction and label ids differ:";
    for (const std::string& id : mismatched) message += " " + id;
    throw Error(ErrorCode::kInvalidArgument, message);
  }
  ConfusionCounts c;
  for (const auto& [id, predicted] : predictions) {
    const bool actual = labels.at(id);
    if (predicted && actual) {
      ++c.tp;
    } else if (predicted) {
      ++c.fp;
    } else if (actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

MetricsReport Prf1(const ConfusionCounts& counts) {
  MetricsReport r;
  r.counts = counts;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) r.precision = tp / static_cast<double>(counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) r.recall = tp / static_cast<double>(counts.tp + counts.fn);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

double F1(const std::map<std::string, bool>& predictions,
          const std::map<std::string, bool>& labels) {
  return Prf1(Confusion(predictions, labels)).f1;
}

MetricsReport EvaluateDefinition(const Classifier& classifier, const ConceptDefinition& def,
                                 const ImageIndex& manifest,
                                 const std::map<std::string, bool>& gold) {
  return EvaluateRendered(classifier, RenderDefinition(def), def.version, manifest, gold);
}

MetricsReport EvaluateRendered(const Classifier& classifier, const std::string& rendered,
                               int version, const ImageIndex& manifest,
                               const std::map<std::string, bool>& gold) {
  if (gold.empty()) throw Error(ErrorCode::kInvalidArgument, "gold set is empty");
  std::vector<const ImageRecord*> images;
  images.reserve(gold.size());
  for (const auto& [id, _] : gold) {
    const ImageRecord* record = manifest.Find(id);
    if (record == nullptr) {
      throw Error(ErrorCode::kNotFound, "gold image '" + id + "' is not in the manifest");
    }
    images.push_back(record);
  }
  const auto outcomes = classifier.ClassifyRenderedBatch(rendered, version, images);
  std::map<std::string, bool> predictions;
  std::map<std::string, bool> labels;
  std::vector<ClassificationResult> results;
  std::vector<ItemError> errors;
  for (const ClassificationOutcome& o : outcomes) {
    if (o.ok()) {
      predictions[o.result->image_id] = o.result->label;
      labels[o.result->image_id] = gold.at(o.result->image_id);
      results.push_back(*o.result);
    } else {
      errors.push_back(*o.error);
    }
  }
  MetricsReport report = Prf1(Confusion(predictions, labels));
  report.coverage = static_cast<double>(results.size()) / static_cast<double>(gold.size());
  report.results = std::move(results);
  report.errors = std::move(errors);
  return report;
}

void WriteMetricsCsv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "round,precision,recall,f1\n";
  char line[128];
  for (const MetricsRow& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", r.round, r.precision, r.recall, r.f1);
    out << line;
  }
}

void to_json(nlohmann::json& j, const ConfusionCounts& c) {
  j = nlohmann::json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

void from_json(const nlohmann::json& j, ConfusionCounts& c) {
  c.tp = j.at("tp").get<size_t>();
  c.fp = j.at("fp").get<size_t>();
  c.fn = j.at("fn").get<size_t>();
  c.tn = j.at("tn").get<size_t>();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json{{"precision", r.precision}, {"recall", r.recall},
                     {"f1", r.f1},               {"counts", r.counts},
                     {"coverage", r.coverage},   {"results", r.results}};
  nlohmann::json errors = nlohmann::json::array();
  for (const ItemError& e : r.errors) errors.push_back(e);
  j["errors"] = errors;
  if (!r.per_round.empty()) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const RoundF1& p : r.per_round) rounds.push_back({{"t", p.t}, {"f1", p.f1}});
    j["per_round"] = rounds;
  }
}

}  // namespace deliberate
