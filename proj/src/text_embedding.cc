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

#include "deliberate/text_embedding.h"

#include <cctype>

#include "deliberate/error.h"
#include "deliberate/kernels.h"
#include "deliberate/rng.h"

namespace deliberate {

std::string NormalizeText(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<double> TrigramEmbedding(std::string_view text, size_t dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim is 0");
  const std::string normalized = NormalizeText(text);
  if (normalized.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "text has no trigrams to embed: '" + std::string(text) + "'");
  }
  const std::string padded = " " + normalized + " ";
  std::vector<double> v(dim, 0.0);
  for (size_t i = 0; i + 3 <= padded.size(); ++i) {
    v[Fnv1a64(std::string_view(padded).substr(i, 3)) % dim] += 1.0;
  }
  kernels::NormalizeInPlace(v);
  return v;
}

}  // namespace deliberate
