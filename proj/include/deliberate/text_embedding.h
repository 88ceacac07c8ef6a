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

#ifndef DELIBERATE_TEXT_EMBEDDING_H_
#define DELIBERATE_TEXT_EMBEDDING_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace deliberate {

inline constexpr size_t kDefaultEmbeddingDim = 256;

// Lowercases, maps non-alphanumerics to spaces and collapses runs of spaces.
std::string NormalizeText(std::string_view text);

// Character-trigram hashing embedding: every trigram of " " + normalized + " "
// adds 1 to bucket FNV-1a(trigram) mod dim; the result is L2-normalized.
// Throws kInvalidArgument when the text normalizes to nothing.
std::vector<double> TrigramEmbedding(std::string_view text,
                                     size_t dim = kDefaultEmbeddingDim);

}  // namespace deliberate

#endif  // DELIBERATE_TEXT_EMBEDDING_H_
