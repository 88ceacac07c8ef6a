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

#ifndef DELIBERATE_SYNTHETIC_H_
#define DELIBERATE_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "deliberate/image_index.h"
#include "json.hpp"

namespace deliberate {

struct AttributeSpec {
  std::string name;
  double probability = 0.5;
};

// A seeded attribute world. Each record's embedding is
//   attribute_weight * sum of the true attributes' directions
//   + caption_weight * trigram(caption) + noise * N(0, I),
// normalized. Attribute directions depend only on the attribute name, so
// manifests generated with different seeds share one geometry.
struct SyntheticSpec {
  size_t count = 500;
  size_t dim = 256;
  std::vector<AttributeSpec> attributes;
  double attribute_weight = 1.0;
  double caption_weight = 0.8;
  double noise = 0.05;
  std::string id_prefix = "img";
  uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

std::vector<ImageRecord> GenerateSynthetic(const SyntheticSpec& spec);

}  // namespace deliberate

#endif  // DELIBERATE_SYNTHETIC_H_
