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

#include "deliberate/synthetic.h"

#include <array>
#include <cstdio>

#include "deliberate/error.h"
#include "deliberate/kernels.h"
#include "deliberate/rng.h"
#include "deliberate/text_embedding.h"

namespace deliberate {
namespace {

constexpr std::array<const char*, 8> kNouns = {"bowl",  "plate", "platter", "snack",
                                               "meal",  "dish",  "tray",    "box"};

std::vector<double> Direction(const std::string& name, size_t dim) {
  Rng rng(DeriveSeed(Fnv1a64(name), "attribute-direction"));
  std::vector<double> v(dim);
  for (double& x : v) x = rng.Normal();
  kernels::NormalizeInPlace(v);
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const AttributeSpec& a : s.attributes) {
    attrs.push_back({{"name", a.name}, {"probability", a.probability}});
  }
  j = nlohmann::json{{"count", s.count},
                     {"dim", s.dim},
                     {"attributes", attrs},
                     {"attribute_weight", s.attribute_weight},
                     {"caption_weight", s.caption_weight},
                     {"noise", s.noise},
                     {"id_prefix", s.id_prefix},
                     {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  s = SyntheticSpec{};
  s.count = j.value("count", s.count);
  s.dim = j.value("dim", s.dim);
  s.attributes.clear();
  for (const auto& a : j.value("attributes", nlohmann::json::array())) {
    s.attributes.push_back({a.at("name").get<std::string>(), a.value("probability", 0.5)});
  }
  s.attribute_weight = j.value("attribute_weight", s.attribute_weight);
  s.caption_weight = j.value("caption_weight", s.caption_weight);
  s.noise = j.value("noise", s.noise);
  s.id_prefix = j.value("id_prefix", s.id_prefix);
  s.seed = j.value("seed", s.seed);
}

std::vector<ImageRecord> GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.dim == 0) throw Error(ErrorCode::kInvalidArgument, "synthetic dim must be positive");
  for (const AttributeSpec& a : spec.attributes) {
    if (a.probability < 0.0 || a.probability > 1.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "attribute '" + a.name + "' probability must lie in [0, 1]");
    }
  }
  std::vector<std::vector<double>> directions;
  for (const AttributeSpec& a : spec.attributes) directions.push_back(Direction(a.name, spec.dim));

  Rng rng(DeriveSeed(spec.seed, "synthetic-manifest"));
  std::vector<ImageRecord> out;
  out.reserve(spec.count);
  const int width = std::max<int>(4, static_cast<int>(std::to_string(spec.count).size()));
  for (size_t i = 0; i < spec.count; ++i) {
    ImageRecord r;
    char id[64];
    std::snprintf(id, sizeof(id), "%s%0*zu", spec.id_prefix.c_str(), width, i);
    r.id = id;
    r.uri = "synthetic://" + r.id;
    std::vector<double> e(spec.dim, 0.0);
    std::string caption;
    for (size_t a = 0; a < spec.attributes.size(); ++a) {
      const bool on = rng.UniformReal() < spec.attributes[a].probability;
      r.attributes[spec.attributes[a].name] = on ? 1 : 0;
      if (!on) continue;
      caption += spec.attributes[a].name + " ";
      kernels::Axpy(spec.attribute_weight, directions[a], e);
    }
    caption += kNouns[rng.Uniform(kNouns.size())];
    r.caption = caption;
    kernels::Axpy(spec.caption_weight, TrigramEmbedding(caption, spec.dim), e);
    for (double& x : e) x += spec.noise * rng.Normal();
    kernels::NormalizeInPlace(e);
    r.embedding = std::move(e);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace deliberate
