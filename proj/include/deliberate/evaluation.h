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

#ifndef DELIBERATE_EVALUATION_H_
#define DELIBERATE_EVALUATION_H_

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "deliberate/classifier.h"
#include "deliberate/concept.h"
#include "deliberate/image_index.h"
#include "json.hpp"

namespace deliberate {

struct ConfusionCounts {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  size_t tn = 0;

  size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct RoundF1 {
  int t = 0;
  double f1 = 0.0;
};

// Precision, recall and F1. There is deliberately no accuracy field: label
// sets are imbalanced.
struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  std::vector<RoundF1> per_round;
  // Fraction of gold images classified successfully.
  double coverage = 1.0;
  std::vector<ClassificationResult> results;
  std::vector<ItemError> errors;
};

// Keys must match exactly; a mismatch is kInvalidArgument listing the ids.
ConfusionCounts Confusion(const std::map<std::string, bool>& predictions,
                          const std::map<std::string, bool>& labels);

// Zero denominators yield 0.
MetricsReport Prf1(const ConfusionCounts& counts);

double F1(const std::map<std::string, bool>& predictions,
          const std::map<std::string, bool>& labels);

// Classifies every gold image and scores the successes. Gold ids must be in
// the manifest; an empty gold set is an error.
MetricsReport EvaluateDefinition(const Classifier& classifier, const ConceptDefinition& def,
                                 const ImageIndex& manifest,
                                 const std::map<std::string, bool>& gold);

MetricsReport EvaluateRendered(const Classifier& classifier, const std::string& rendered,
                               int version, const ImageIndex& manifest,
                               const std::map<std::string, bool>& gold);

struct MetricsRow {
  int round = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// "round,precision,recall,f1" with one row per entry.
void WriteMetricsCsv(std::ostream& out, const std::vector<MetricsRow>& rows);

void to_json(nlohmann::json& j, const ConfusionCounts& c);
void from_json(const nlohmann::json& j, ConfusionCounts& c);
void to_json(nlohmann::json& j, const MetricsReport& r);

}  // namespace deliberate

#endif  // DELIBERATE_EVALUATION_H_
