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

#ifndef DELIBERATE_IMAGE_INDEX_H_
#define DELIBERATE_IMAGE_INDEX_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace deliberate {

struct ImageRecord {
  std::string id;
  std::string uri;
  std::string caption;
  // Unit norm once loaded into an index; may be empty in a bare record.
  std::vector<double> embedding;
  // Simulation-only attributes (e.g. {"fried": 1}).
  nlohmann::json attributes = nlohmann::json::object();
};

struct QueryResult {
  std::string image_id;
  double score = 0.0;

  bool operator==(const QueryResult&) const = default;
};

inline constexpr double kDefaultDedupThreshold = 0.97;

// Exact cosine index over a manifest. Immutable after construction, so
// concurrent reads are safe.
class ImageIndex {
 public:
  // Normalizes embeddings; rejects duplicate ids, empty or inconsistent
  // dimensions (kManifest).
  explicit ImageIndex(std::vector<ImageRecord> records);

  size_t size() const { return records_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<ImageRecord>& records() const { return records_; }

  const ImageRecord& Get(std::string_view id) const;
  const ImageRecord* Find(std::string_view id) const;
  const ImageRecord* FindByUri(std::string_view uri) const;
  std::span<const double> Embedding(std::string_view id) const;

  // Top-k by cosine against a query vector (normalized here). Sorted by
  // score descending, ties by id ascending. k larger than the corpus
  // returns everything.
  std::vector<QueryResult> Search(std::span<const double> query, size_t k) const;

  // Greedy near-duplicate removal. Candidates are visited in ascending id
  // order; one is dropped iff its cosine to an already-kept image is >=
  // threshold. Kept ids are returned in input order. Input ids are
  // deduplicated by identity first.
  std::vector<std::string> Dedup(const std::vector<std::string>& ids,
                                 double threshold = kDefaultDedupThreshold) const;

 private:
  size_t RowOf(std::string_view id) const;

  std::vector<ImageRecord> records_;
  size_t dim_ = 0;
  // Row-major copy of the normalized embeddings for the scan kernels.
  std::vector<double> matrix_;
  std::unordered_map<std::string, size_t> by_id_;
  std::unordered_map<std::string, size_t> by_uri_;
};

// Reads a JSONL manifest: one {"id", "uri", "caption", "embedding",
// "attributes"?} object per line; blank lines skipped. Errors name the line.
ImageIndex LoadManifest(const std::filesystem::path& path);

std::vector<ImageRecord> ParseManifest(std::istream& in);

void WriteManifest(const std::filesystem::path& path,
                   const std::vector<ImageRecord>& records);

void to_json(nlohmann::json& j, const ImageRecord& r);

}  // namespace deliberate

#endif  // DELIBERATE_IMAGE_INDEX_H_
